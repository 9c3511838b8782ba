//! Expansivity and continuum-wise expansivity of maps, checked on sampled pairs
//! and chains, with Lyapunov functions for the induced hyperspace map near the
//! singletons `F1`.
//!
//! A finite horizon can certify separation but never non-expansivity; a pair or
//! chain that stays within `delta` for every `|n| <= horizon` is reported as a
//! counterexample at that horizon.

mod chain;
mod hyper;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::metric::{AmbientSpace, Point};
use crate::scalar::Scalar;

pub use chain::{advance_chain, advance_chain_dir, check_cw_expansive, Chain, ChainSource, DEFAULT_POINT_BUDGET};
pub use hyper::{audit_chain_orbit, audit_pair_orbit, lyap_chain, lyap_chain_exact, lyap_pair, lyap_pair_exact, HyperspaceSize};

/// Default separation threshold for the cat map.
pub const DEFAULT_DELTA: f64 = 0.2;
/// Default iterate horizon.
pub const DEFAULT_HORIZON: u64 = 64;

/// Two points of `X`; with `x = y` it stands for a singleton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairState<T> {
    pub x: Point<T>,
    pub y: Point<T>,
    pub diam: T,
}

impl<T: Scalar> PairState<T> {
    pub fn new(space: &AmbientSpace<T>, x: Point<T>, y: Point<T>) -> Result<Self> {
        let diam = space.distance(&x, &y)?;
        Ok(PairState { x, y, diam })
    }

    pub fn is_degenerate(&self) -> bool {
        self.diam == T::zero()
    }

    /// Image under the map (or its inverse).
    pub fn step(&self, map: &SystemSpec<T>, forward: bool) -> Result<Self> {
        let f = |p: &[T]| if forward { map.forward(p) } else { map.inverse(p) };
        PairState::new(map.space(), f(&self.x)?, f(&self.y)?)
    }

    pub fn points(&self) -> Vec<Point<T>> {
        if self.is_degenerate() {
            vec![self.x.clone()]
        } else {
            vec![self.x.clone(), self.y.clone()]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every sample exceeded `delta` at some `|n| <= horizon`.
    SeparatedAtHorizon,
    /// Some sample stayed within `delta` for all `|n| <= horizon`.
    Counterexample,
    /// Some sample could not be followed (e.g. chain refinement overflow).
    Inconclusive,
}

/// A sample that never separated, with `(n, diameter)` for `n = -horizon..=horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness<T> {
    Pair { x: Point<T>, y: Point<T>, history: Vec<(i64, T)> },
    Chain { chain: Chain<T>, history: Vec<(i64, T)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansivityReport<T> {
    pub verdict: Verdict,
    pub delta: T,
    pub horizon: u64,
    pub witness: Option<Witness<T>>,
    /// Per sample: the iterate `n` (negative for backward) of smallest `|n|` with
    /// diameter above `delta`, forward preferred on ties; `None` if none.
    pub first_separation: Vec<Option<i64>>,
    /// Per-sample failures that did not stop the run.
    pub errors: Vec<(usize, String)>,
}

pub(crate) fn check_run<T: Scalar>(map: &SystemSpec<T>, delta: T, horizon: u64) -> Result<()> {
    if !map.is_map() {
        return Err(Error::Argument("expansivity needs a map system".into()));
    }
    if !(delta > T::zero()) {
        return Err(Error::Argument("delta must be positive".into()));
    }
    if horizon == 0 {
        return Err(Error::Argument("horizon must be at least 1".into()));
    }
    Ok(())
}

/// First `n` with `|n| <= horizon` at which `diam` of the iterated state exceeds `delta`.
pub(crate) fn first_separation<S, T: Scalar>(
    start: &S,
    delta: T,
    horizon: u64,
    step: impl Fn(&S, bool) -> Result<S>,
    diam: impl Fn(&S) -> Result<T>,
) -> Result<Option<i64>> {
    if diam(start)? > delta {
        return Ok(Some(0));
    }
    let (mut fwd, mut bwd) = (step(start, true)?, step(start, false)?);
    for n in 1..=horizon {
        if diam(&fwd)? > delta {
            return Ok(Some(n as i64));
        }
        if diam(&bwd)? > delta {
            return Ok(Some(-(n as i64)));
        }
        if n < horizon {
            fwd = step(&fwd, true)?;
            bwd = step(&bwd, false)?;
        }
    }
    Ok(None)
}

/// `(n, diam)` for `n = -horizon..=horizon`.
pub(crate) fn diameter_history<S, T: Scalar>(
    start: &S,
    horizon: u64,
    step: impl Fn(&S, bool) -> Result<S>,
    diam: impl Fn(&S) -> Result<T>,
) -> Result<Vec<(i64, T)>> {
    let mut back = Vec::with_capacity(horizon as usize);
    let mut s = step(start, false)?;
    for n in 1..=horizon {
        back.push((-(n as i64), diam(&s)?));
        if n < horizon {
            s = step(&s, false)?;
        }
    }
    back.reverse();
    back.push((0, diam(start)?));
    let mut s = step(start, true)?;
    for n in 1..=horizon {
        back.push((n as i64, diam(&s)?));
        if n < horizon {
            s = step(&s, true)?;
        }
    }
    Ok(back)
}

/// Check pairs for separation within `horizon` iterates in either direction.
/// Degenerate pairs are skipped.
pub fn check_expansive_pairs<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    horizon: u64,
    samples: &[PairState<T>],
) -> Result<ExpansivityReport<T>> {
    check_run(map, delta, horizon)?;
    let step = |s: &PairState<T>, fwd: bool| s.step(map, fwd);
    let diam = |s: &PairState<T>| Ok(s.diam);
    let mut report = ExpansivityReport {
        verdict: Verdict::SeparatedAtHorizon,
        delta,
        horizon,
        witness: None,
        first_separation: Vec::with_capacity(samples.len()),
        errors: Vec::new(),
    };
    for pair in samples {
        if pair.is_degenerate() {
            report.first_separation.push(None);
            continue;
        }
        let n = first_separation(pair, delta, horizon, step, diam)?;
        if n.is_none() && report.witness.is_none() {
            let history = diameter_history(pair, horizon, step, diam)?;
            report.witness = Some(Witness::Pair { x: pair.x.clone(), y: pair.y.clone(), history });
            report.verdict = Verdict::Counterexample;
        }
        report.first_separation.push(n);
    }
    Ok(report)
}

/// Recompute a witness's history and confirm it matches and stays within `delta`.
pub fn replay_witness<T: Scalar>(map: &SystemSpec<T>, delta: T, horizon: u64, witness: &Witness<T>) -> Result<bool> {
    check_run(map, delta, horizon)?;
    let (history, stored) = match witness {
        Witness::Pair { x, y, history } => {
            let pair = PairState::new(map.space(), x.clone(), y.clone())?;
            (diameter_history(&pair, horizon, |s, f| s.step(map, f), |s| Ok(s.diam))?, history)
        }
        Witness::Chain { chain, history } => {
            let step = |c: &Chain<T>, f: bool| advance_chain_dir(map, c, f, DEFAULT_POINT_BUDGET);
            (diameter_history(chain, horizon, step, |c| Ok(c.diameter(map.space())))?, history)
        }
    };
    Ok(&history == stored && history.iter().all(|&(_, d)| d <= delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unstable_offset(scale: f64) -> Vec<f64> {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let n = (1.0 + g * g).sqrt();
        vec![scale / n, scale * g / n]
    }

    #[test]
    fn cat_map_unstable_pair_separates_forward_at_six() {
        let cat = SystemSpec::<f64>::cat_map();
        let pair = PairState::new(cat.space(), vec![0.0, 0.0], unstable_offset(1e-3)).unwrap();
        let rep = check_expansive_pairs(&cat, 0.2, 64, &[pair]).unwrap();
        assert_eq!(rep.first_separation, vec![Some(6)]);
        assert_eq!(rep.verdict, Verdict::SeparatedAtHorizon);
    }

    #[test]
    fn cat_map_stable_pair_separates_backward_at_six() {
        let cat = SystemSpec::<f64>::cat_map();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let n = (1.0 + g * g).sqrt();
        // stable direction (-g, 1)/n, shifted into the torus
        let y = vec![1.0 - 1e-3 * g / n, 1e-3 / n];
        let pair = PairState::new(cat.space(), vec![0.0, 0.0], y).unwrap();
        let rep = check_expansive_pairs(&cat, 0.2, 64, &[pair]).unwrap();
        assert_eq!(rep.first_separation, vec![Some(-6)]);
    }

    #[test]
    fn rotation_pair_is_a_counterexample() {
        let rot = SystemSpec::<f64>::rotation(1.0).unwrap();
        let pair = PairState::new(rot.space(), vec![0.5], vec![0.6]).unwrap();
        let rep = check_expansive_pairs(&rot, 0.2, 500, &[pair]).unwrap();
        assert_eq!(rep.verdict, Verdict::Counterexample);
        let w = rep.witness.unwrap();
        assert!(replay_witness(&rot, 0.2, 500, &w).unwrap());
        match &w {
            Witness::Pair { history, .. } => assert_eq!(history.len(), 1001),
            _ => panic!("pair witness expected"),
        }
    }

    #[test]
    fn degenerate_pairs_are_skipped_and_horizon_zero_rejected() {
        let cat = SystemSpec::<f64>::cat_map();
        let pair = PairState::new(cat.space(), vec![0.3, 0.3], vec![0.3, 0.3]).unwrap();
        let rep = check_expansive_pairs(&cat, 0.2, 8, &[pair.clone()]).unwrap();
        assert_eq!(rep.first_separation, vec![None]);
        assert_eq!(rep.verdict, Verdict::SeparatedAtHorizon);
        assert!(check_expansive_pairs(&cat, 0.2, 0, &[pair]).is_err());
    }
}
