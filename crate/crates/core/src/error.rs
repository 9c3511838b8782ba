use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the ambient domain: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("non-finite state at t = {time}")]
    Numerical { time: f64 },
    #[error("orbit did not reach the target within T_max = {t_max} (last distance {distance})")]
    NonConvergence { t_max: f64, distance: f64 },
    #[error("isolation violated: orbit of {witness:?} stays in the neighborhood for the full horizon {horizon}")]
    IsolationViolation { witness: Vec<f64>, horizon: f64 },
    #[error("state outside the neighborhood: diameter {diameter} >= delta {delta}")]
    OutOfNeighborhood { diameter: f64, delta: f64 },
    #[error("chain refinement needs {needed} points, budget is {budget}")]
    RefinementOverflow { needed: usize, budget: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
