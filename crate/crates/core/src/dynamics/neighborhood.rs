//! Adapted neighborhoods of isolated rest points.
//!
//! `U_rho` is the set of points of the open ball `B_r(p)` whose orbit component in
//! that ball comes within `rho` of `p`. Small enough `rho` make it adapted: an
//! orbit segment inside the closure with both endpoints in `U_rho` stays in
//! `U_rho`. No finite procedure certifies that for all segments, so the search
//! below halves `rho` until a sampled audit finds no violation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ball_grid, Point};
use crate::scalar::Scalar;

use super::orbit::{sample_orbit, Direction, StopRule};
use super::SystemSpec;

pub const DEFAULT_HORIZON: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec<T> {
    pub center: Point<T>,
    pub r: T,
    pub rho: T,
}

impl<T: Scalar> NeighborhoodSpec<T> {
    pub fn new(center: Point<T>, r: T, rho: T) -> Result<Self> {
        if !(T::zero() < rho && rho < r) {
            return Err(Error::Argument("neighborhood needs 0 < rho < r".into()));
        }
        Ok(NeighborhoodSpec { center, r, rho })
    }

    pub fn in_ball(&self, sys: &SystemSpec<T>, x: &[T]) -> bool {
        sys.space().dist(x, &self.center) < self.r
    }
}

/// Whether `x` belongs to `U_rho`: its orbit component inside `B_r(p)`, followed
/// both ways until the first exit or `horizon`, meets `B_rho(p)`.
pub fn adapted_membership<T: Scalar>(
    sys: &SystemSpec<T>,
    nbhd: &NeighborhoodSpec<T>,
    x: &[T],
    horizon: T,
) -> Result<bool> {
    sys.space().check(x)?;
    if !nbhd.in_ball(sys, x) {
        return Err(Error::Argument(format!("{x:?} lies outside B_r(p)")));
    }
    Ok(member_unchecked(sys, nbhd, x, horizon))
}

fn member_unchecked<T: Scalar>(sys: &SystemSpec<T>, nbhd: &NeighborhoodSpec<T>, x: &[T], horizon: T) -> bool {
    let space = sys.space();
    if space.dist(x, &nbhd.center) < nbhd.rho {
        return true;
    }
    let ball = |y: &[T]| space.dist(y, &nbhd.center) < nbhd.r;
    // the target rule stops at <= rho; strictness is rechecked on the last sample
    let shrink = nbhd.rho * (T::one() - T::epsilon());
    [Direction::Forward, Direction::Backward].into_iter().any(|dir| {
        let stop = StopRule { region: Some(&ball), target: Some((nbhd.center.as_slice(), shrink)) };
        match sample_orbit(sys, x, dir, horizon, stop) {
            Ok(seg) => seg.reached,
            Err(_) => false,
        }
    })
}

/// `U_rho` as a membership oracle.
#[derive(Clone, Debug)]
pub struct AdaptedNeighborhood<T> {
    sys: SystemSpec<T>,
    spec: NeighborhoodSpec<T>,
    horizon: T,
}

impl<T: Scalar> AdaptedNeighborhood<T> {
    pub fn new(sys: SystemSpec<T>, spec: NeighborhoodSpec<T>, horizon: T) -> Result<Self> {
        sys.space().check(&spec.center)?;
        Ok(AdaptedNeighborhood { sys, spec, horizon })
    }

    pub fn spec(&self) -> &NeighborhoodSpec<T> {
        &self.spec
    }

    pub fn system(&self) -> &SystemSpec<T> {
        &self.sys
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn center(&self) -> &[T] {
        &self.spec.center
    }

    pub fn in_ball(&self, x: &[T]) -> bool {
        self.spec.in_ball(&self.sys, x)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.sys.space().contains(x) && self.in_ball(x) && member_unchecked(&self.sys, &self.spec, x, self.horizon)
    }
}

/// Result of the sampled adapted-neighborhood audit at one `rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedAudit<T> {
    pub rho: T,
    pub starts: usize,
    /// `(start, re-entry)` pairs whose connecting segment left `U_rho` inside the
    /// closure and came back.
    pub violations: Vec<(Point<T>, Point<T>)>,
    /// Grid spacing of the starts; also the slack used for "inside the closure".
    pub resolution: T,
}

impl<T> AdaptedAudit<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sampled check of the adapted property for `U_rho` on a grid of starts.
pub fn audit_adapted<T: Scalar>(u: &AdaptedNeighborhood<T>, spacing: T) -> Result<AdaptedAudit<T>> {
    let sys = &u.sys;
    let space = sys.space();
    let p = u.center();
    let r = u.spec.r;
    let closure = |y: &[T]| space.dist(y, p) <= r + spacing;
    let mut audit = AdaptedAudit { rho: u.spec.rho, starts: 0, violations: Vec::new(), resolution: spacing };
    for a in ball_grid(space, p, r, spacing)? {
        if !u.contains(&a) {
            continue;
        }
        audit.starts += 1;
        let seg = sample_orbit(sys, &a, Direction::Forward, u.horizon, StopRule::leaves(&closure))?;
        let mut left = false;
        for s in seg.points.iter().skip(1) {
            if !u.in_ball(s) {
                left = true;
            } else if left && u.contains(s) {
                audit.violations.push((a.clone(), s.clone()));
                break;
            }
        }
    }
    Ok(audit)
}

/// Halve `rho` from `r/2` until the sampled audit passes.
pub fn search_rho<T: Scalar>(
    sys: &SystemSpec<T>,
    center: Point<T>,
    r: T,
    spacing: T,
    horizon: T,
    max_halvings: usize,
) -> Result<(AdaptedNeighborhood<T>, AdaptedAudit<T>)> {
    let mut rho = r;
    for _ in 0..max_halvings.max(1) {
        rho = rho * T::lit(0.5);
        let spec = NeighborhoodSpec::new(center.clone(), r, rho)?;
        let u = AdaptedNeighborhood::new(sys.clone(), spec, horizon)?;
        let audit = audit_adapted(&u, spacing)?;
        if audit.passed() {
            return Ok((u, audit));
        }
    }
    Err(Error::Argument(format!("no adapted rho found down to {rho}")))
}
