//! Lyapunov functions built from Whitney sizes of orbit pieces.
//!
//! Every construction evaluates `mu` exactly (see [`crate::exact`]) so that the
//! strict decrease along an orbit is decided on the truncated series itself, not
//! on its floating point rounding. Audits evaluate `V` along one sampled orbit,
//! which makes the sets at consecutive samples exactly nested.

mod asymptotic;
mod isolated;
mod singularity;

use serde::{Deserialize, Serialize};

use crate::audit::{default_tol, monotonicity_audit_exact};
use crate::dynamics::DEFAULT_HORIZON;
use crate::error::Result;
use crate::exact::Dyadic;
use crate::hyperspace::SizeConfig;
use crate::metric::{AmbientSpace, Point};
use crate::scalar::Scalar;

pub use asymptotic::{lyap_asymptotic, AsymptoticLyapunov};
pub use isolated::{lyap_discrete, lyap_isolated_set, DiscreteLyapunov, IsolatedKind, IsolatedSetLyapunov};
pub use singularity::{lyap_singularity, vpm_sets, SingularityLyapunov};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapMode {
    Asymptotic,
    Singularity,
    Isolated,
    Discrete,
    /// Induced dynamics on two-point sets.
    Pair,
    /// Induced dynamics on chains.
    Chain,
}

/// Sampling and tolerance knobs shared by the constructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapOptions<T> {
    /// Grid spacing for `C = X \ U` and classified manifolds.
    pub grid: T,
    /// Time (or iterate) budget for orbit pieces.
    pub horizon: T,
    /// An orbit within this distance of the target counts as arrived.
    pub eps_stop: T,
    /// Audit steps closer than this to the target are not checked.
    pub floor: T,
    /// Strictness slack; `None` uses [`default_tol`].
    pub tol: Option<T>,
}

impl<T: Scalar> Default for LyapOptions<T> {
    fn default() -> Self {
        LyapOptions {
            grid: T::lit(0.05),
            horizon: T::lit(DEFAULT_HORIZON),
            eps_stop: T::lit(1e-6),
            floor: T::lit(1e-4),
            tol: None,
        }
    }
}

impl<T: Scalar> LyapOptions<T> {
    pub fn tol_for(&self, cfg: &SizeConfig<T>) -> T {
        self.tol.unwrap_or_else(|| default_tol(cfg))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub point: Point<T>,
    pub step: usize,
    pub delta: f64,
}

/// `V` sampled along one orbit, with the steps that failed to decrease by more than `tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport<T> {
    pub mode: LyapMode,
    pub params: Vec<T>,
    pub points: Vec<Point<T>>,
    pub values: Vec<f64>,
    pub mu_plus: Option<Vec<f64>>,
    pub mu_minus: Option<Vec<f64>>,
    /// Whether each sample lies in the audited region (outside the floor).
    pub checked: Vec<bool>,
    pub violations: Vec<Violation<T>>,
    pub tol: T,
    pub mesh: T,
    pub depth: usize,
    pub tail_bound: T,
    pub horizon: T,
    /// Some orbit piece ran into the horizon rather than leaving or arriving.
    pub truncated: bool,
}

impl<T: Scalar> LyapunovReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> Option<f64> {
        self.violations.iter().map(|v| v.delta).reduce(f64::max)
    }
}

/// One evaluation along an audited orbit.
pub(crate) struct Sample<T> {
    pub param: T,
    pub point: Point<T>,
    pub value: Dyadic,
    pub parts: Option<(Dyadic, Dyadic)>,
    pub checked: bool,
}

pub(crate) struct ReportMeta<T> {
    pub mode: LyapMode,
    pub tol: T,
    pub mesh: T,
    pub horizon: T,
    pub truncated: bool,
}

pub(crate) fn build_report<T: Scalar>(
    samples: Vec<Sample<T>>,
    cfg: &SizeConfig<T>,
    meta: ReportMeta<T>,
) -> Result<LyapunovReport<T>> {
    let mut violations = Vec::new();
    // audit each maximal run of checked samples
    let mut start = 0;
    while start < samples.len() {
        if !samples[start].checked {
            start += 1;
            continue;
        }
        let mut end = start;
        while end + 1 < samples.len() && samples[end + 1].checked {
            end += 1;
        }
        if end > start {
            let run = &samples[start..=end];
            let params: Vec<T> = run.iter().map(|s| s.param).collect();
            let values: Vec<Dyadic> = run.iter().map(|s| s.value.clone()).collect();
            for (i, delta) in monotonicity_audit_exact(&params, &values, meta.tol)? {
                violations.push(Violation { point: run[i].point.clone(), step: start + i, delta });
            }
        }
        start = end + 1;
    }
    let has_parts = samples.iter().all(|s| s.parts.is_some());
    let (mu_plus, mu_minus) = if has_parts && !samples.is_empty() {
        let plus = samples.iter().map(|s| s.parts.as_ref().map_or(0.0, |p| p.0.to_f64())).collect();
        let minus = samples.iter().map(|s| s.parts.as_ref().map_or(0.0, |p| p.1.to_f64())).collect();
        (Some(plus), Some(minus))
    } else {
        (None, None)
    };
    Ok(LyapunovReport {
        mode: meta.mode,
        params: samples.iter().map(|s| s.param).collect(),
        values: samples.iter().map(|s| s.value.to_f64()).collect(),
        checked: samples.iter().map(|s| s.checked).collect(),
        points: samples.into_iter().map(|s| s.point).collect(),
        mu_plus,
        mu_minus,
        violations,
        tol: meta.tol,
        mesh: meta.mesh,
        depth: cfg.depth(),
        tail_bound: cfg.tail_bound(),
        horizon: meta.horizon,
        truncated: meta.truncated,
    })
}

/// Empirical modulus of continuity: the largest `|V(x) - V(y)|` over sample pairs
/// at distance at most `link_radius`.
pub fn continuity_modulus<T: Scalar>(space: &AmbientSpace<T>, samples: &[(Point<T>, T)], link_radius: T) -> T {
    let mut worst = T::zero();
    for (i, (x, vx)) in samples.iter().enumerate() {
        for (y, vy) in &samples[i + 1..] {
            if space.dist(x, y) <= link_radius {
                worst = worst.max((*vx - *vy).abs());
            }
        }
    }
    worst
}
