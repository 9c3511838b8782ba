//! Lyapunov functions from Whitney size functions on hyperspaces, and
//! expansivity checks through the induced hyperspace dynamics.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for `f32`
//! and `f64`); the aliases below fix `f64`.

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod expansivity;
pub mod hyperspace;
pub mod lyapunov;
pub mod metric;
pub mod scalar;

pub use error::{Error, Result};
pub use exact::Dyadic;
pub use scalar::Scalar;

pub type AmbientSpace = metric::AmbientSpace<f64>;
pub type PointSet = metric::PointSet<f64>;
pub type Point = metric::Point<f64>;
pub type DenseSequence = metric::DenseSequence<f64>;
pub type SizeConfig = hyperspace::SizeConfig<f64>;
pub type SystemSpec = dynamics::SystemSpec<f64>;
pub type OrbitSegment = dynamics::OrbitSegment<f64>;
pub type NeighborhoodSpec = dynamics::NeighborhoodSpec<f64>;
pub type LyapOptions = lyapunov::LyapOptions<f64>;
pub type LyapunovReport = lyapunov::LyapunovReport<f64>;
