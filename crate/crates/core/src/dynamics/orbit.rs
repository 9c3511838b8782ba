use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Point, PointSet};
use crate::scalar::Scalar;

use super::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Membership test for a region of the ambient space.
pub type Region<'a, T> = &'a (dyn Fn(&[T]) -> bool + Sync);

/// When to stop sampling before the time budget runs out.
#[derive(Clone, Copy, Default)]
pub struct StopRule<'a, T> {
    /// Stop before the first sample outside this region; the exit is recorded.
    pub region: Option<Region<'a, T>>,
    /// Stop after the first sample within `eps` of `target`.
    pub target: Option<(&'a [T], T)>,
}

impl<'a, T> StopRule<'a, T> {
    pub fn horizon() -> Self {
        StopRule { region: None, target: None }
    }

    pub fn leaves(region: Region<'a, T>) -> Self {
        StopRule { region: Some(region), target: None }
    }

    pub fn within(target: &'a [T], eps: T) -> Self {
        StopRule { region: None, target: Some((target, eps)) }
    }
}

/// Sampled piece of a trajectory. `times` are elapsed times (iterate counts for
/// maps) in the sampling direction; `points[0]` is the base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment<T> {
    pub direction: Direction,
    pub times: Vec<T>,
    pub points: Vec<Point<T>>,
    pub exited: bool,
    pub exit_time: Option<T>,
    /// Set when the target of a [`StopRule`] was reached.
    pub reached: bool,
}

impl<T: Scalar> OrbitSegment<T> {
    pub fn base(&self) -> &[T] {
        &self.points[0]
    }

    pub fn last(&self) -> &[T] {
        self.points.last().expect("segments are nonempty")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest gap between consecutive samples.
    pub fn max_step(&self, sys: &SystemSpec<T>) -> T {
        self.points.windows(2).map(|w| sys.space().dist(&w[0], &w[1])).fold(T::zero(), T::max)
    }

    pub fn to_point_set(&self, sys: &SystemSpec<T>) -> PointSet<T> {
        PointSet::new(self.points.clone(), self.max_step(sys)).expect("segments are nonempty")
    }
}

/// Sample `phi_t(x)` at the integrator step (or unit iterates) in the given
/// direction until `stop` fires or `t_max` is reached.
pub fn sample_orbit<T: Scalar>(
    sys: &SystemSpec<T>,
    x: &[T],
    direction: Direction,
    t_max: T,
    stop: StopRule<'_, T>,
) -> Result<OrbitSegment<T>> {
    sys.space().check(x)?;
    if !(t_max >= T::zero()) {
        return Err(Error::Argument("T_max must be nonnegative".into()));
    }
    let h = sys.step();
    if sys.is_flow() && t_max > T::zero() && h > t_max {
        return Err(Error::Argument("integrator step exceeds T_max".into()));
    }
    let steps = (t_max / h + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let signed_h = match direction {
        Direction::Forward => h,
        Direction::Backward => -h,
    };
    let reached_target = |p: &[T]| stop.target.is_some_and(|(target, eps)| sys.space().dist(p, target) <= eps);

    let mut seg = OrbitSegment {
        direction,
        times: vec![T::zero()],
        points: vec![x.to_vec()],
        exited: false,
        exit_time: None,
        reached: reached_target(x),
    };
    if seg.reached {
        return Ok(seg);
    }
    let mut cur = x.to_vec();
    for k in 1..=steps {
        let t = T::from_usize(k).expect("step count fits scalar") * h;
        let next = if sys.is_map() {
            match direction {
                Direction::Forward => sys.forward(&cur)?,
                Direction::Backward => sys.inverse(&cur)?,
            }
        } else {
            sys.rk4_step(&cur, signed_h)
        };
        if next.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical { time: t.as_f64() });
        }
        if let Some(region) = stop.region {
            if !region(&next) {
                seg.exited = true;
                seg.exit_time = Some(t);
                return Ok(seg);
            }
        }
        seg.times.push(t);
        seg.points.push(next.clone());
        if reached_target(&next) {
            seg.reached = true;
            return Ok(seg);
        }
        cur = next;
    }
    Ok(seg)
}

/// `{phi_t(x) : t >= 0} ∪ {p}` sampled until the orbit is within `eps_stop` of `p`.
/// The mesh is the largest step displacement, including the final jump to `p`.
pub fn orbit_closure_to_point<T: Scalar>(
    sys: &SystemSpec<T>,
    x: &[T],
    p: &[T],
    eps_stop: T,
    t_max: T,
) -> Result<PointSet<T>> {
    sys.space().check(p)?;
    if x == p {
        return Ok(PointSet::singleton(p.to_vec()));
    }
    let seg = sample_orbit(sys, x, Direction::Forward, t_max, StopRule::within(p, eps_stop))?;
    if !seg.reached {
        return Err(Error::NonConvergence {
            t_max: t_max.as_f64(),
            distance: sys.space().dist(seg.last(), p).as_f64(),
        });
    }
    let mesh = seg.max_step(sys).max(sys.space().dist(seg.last(), p));
    let mut points = seg.points;
    points.push(p.to_vec());
    PointSet::new(points, mesh)
}

/// True when `x` does not move under the system (zero vector field or fixed by the map).
pub fn is_rest_point<T: Scalar>(sys: &SystemSpec<T>, x: &[T]) -> Result<bool> {
    if sys.is_map() {
        Ok(sys.space().dist(&sys.forward(x)?, x) == T::zero())
    } else {
        Ok(sys.vector_field(x).iter().all(|&c| c == T::zero()))
    }
}

/// Samples from `x` in `direction` up to, excluding, the first exit of `region`:
/// the orbit component through `x` inside the region.
pub fn orbit_segment_in_region<T: Scalar>(
    sys: &SystemSpec<T>,
    x: &[T],
    region: Region<'_, T>,
    direction: Direction,
    horizon: T,
) -> Result<OrbitSegment<T>> {
    sys.space().check(x)?;
    if !region(x) {
        return Err(Error::Argument(format!("{x:?} is not in the region")));
    }
    if is_rest_point(sys, x)? {
        return Ok(OrbitSegment {
            direction,
            times: vec![T::zero()],
            points: vec![x.to_vec()],
            exited: false,
            exit_time: None,
            reached: false,
        });
    }
    sample_orbit(sys, x, direction, horizon, StopRule::leaves(region))
}
