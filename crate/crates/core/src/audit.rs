//! Per-step strict-decrease checks on sampled Lyapunov series.

use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::hyperspace::SizeConfig;
use crate::scalar::Scalar;

/// Base strictness slack before the truncation term is added.
pub const BASE_TOL: f64 = 1e-9;

/// `1e-9 + 2 * tail_bound`: the slack a truncated size series needs. Sets along one
/// sampled orbit are nested exactly, so no mesh term is added.
pub fn default_tol<T: Scalar>(cfg: &SizeConfig<T>) -> T {
    T::lit(BASE_TOL) + T::lit(2.0) * cfg.tail_bound()
}

fn check_params<T: Scalar>(params: impl Iterator<Item = T>, len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::Argument("monotonicity audit needs at least two samples".into()));
    }
    let params: Vec<T> = params.collect();
    if params.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("audit parameters must be strictly increasing".into()));
    }
    Ok(())
}

/// Indices `i` with `V[i+1] >= V[i] - tol`.
pub fn monotonicity_audit<T: Scalar>(series: &[(T, T)], tol: T) -> Result<Vec<usize>> {
    check_params(series.iter().map(|s| s.0), series.len())?;
    Ok(series
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].1 >= w[0].1 - tol)
        .map(|(i, _)| i)
        .collect())
}

/// Exact version for series held as dyadic rationals; returns each failing index
/// with its increment `V[i+1] - V[i]`.
pub fn monotonicity_audit_exact<T: Scalar>(params: &[T], values: &[Dyadic], tol: T) -> Result<Vec<(usize, f64)>> {
    if params.len() != values.len() {
        return Err(Error::Argument("parameter and value series differ in length".into()));
    }
    check_params(params.iter().copied(), params.len())?;
    let neg_tol = Dyadic::from_f64(-tol.as_f64());
    Ok(values
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let delta = &w[1] - &w[0];
            (delta >= neg_tol).then(|| (i, delta.to_f64()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_decreasing_series_passes() {
        assert!(monotonicity_audit(&[(0.0, 3.0), (1.0, 2.0), (2.0, 1.0)], 0.0).unwrap().is_empty());
    }

    #[test]
    fn flat_step_is_flagged() {
        assert_eq!(monotonicity_audit(&[(0.0, 1.0), (1.0, 1.0)], 1e-9).unwrap(), vec![0]);
    }

    #[test]
    fn decrease_below_tolerance_is_flagged() {
        let s = [(0.0, 1.0), (0.5, 1.0 - 1e-12), (1.0, 0.5)];
        assert_eq!(monotonicity_audit(&s, 1e-9).unwrap(), vec![0]);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(monotonicity_audit(&[(0.0, 1.0)], 0.0).is_err());
        assert!(monotonicity_audit(&[(1.0, 1.0), (1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn exact_audit_sees_tiny_steps() {
        let vals = [Dyadic::scaled(1.0, 0), &Dyadic::scaled(1.0, 0) - &Dyadic::scaled(1.0, 900), Dyadic::zero()];
        let bad = monotonicity_audit_exact(&[0.0, 1.0, 2.0], &vals, 0.0).unwrap();
        assert!(bad.is_empty());
        let bad = monotonicity_audit_exact(&[0.0, 1.0, 2.0], &vals, 1e-9).unwrap();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].0, 0);
    }
}
