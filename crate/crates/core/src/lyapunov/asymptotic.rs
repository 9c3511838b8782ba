use crate::dynamics::{is_rest_point, sample_orbit, Direction, OrbitSegment, StopRule, SystemSpec};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::hyperspace::{Extents, SizeConfig};
use crate::metric::Point;
use crate::scalar::Scalar;

use super::{build_report, LyapMode, LyapOptions, LyapunovReport, ReportMeta, Sample};

/// `V(x) = mu({phi_t(x) : t >= 0} ∪ {p})` on `U = B_delta(p)` for an
/// asymptotically stable rest point `p`.
#[derive(Clone, Debug)]
pub struct AsymptoticLyapunov<T> {
    sys: SystemSpec<T>,
    p: Point<T>,
    delta: T,
    cfg: SizeConfig<T>,
    opts: LyapOptions<T>,
}

impl<T: Scalar> AsymptoticLyapunov<T> {
    pub fn new(sys: SystemSpec<T>, p: Point<T>, delta: T, cfg: &SizeConfig<T>, opts: LyapOptions<T>) -> Result<Self> {
        sys.space().check(&p)?;
        if !(delta > T::zero()) {
            return Err(Error::Argument("basin radius delta must be positive".into()));
        }
        let cfg = if cfg.space() == sys.space() { cfg.clone() } else { cfg.with_space(sys.space().clone()) };
        Ok(AsymptoticLyapunov { sys, p, delta, cfg, opts })
    }

    pub fn system(&self) -> &SystemSpec<T> {
        &self.sys
    }

    pub fn config(&self) -> &SizeConfig<T> {
        &self.cfg
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.sys.space().contains(x) && self.sys.space().dist(x, &self.p) < self.delta
    }

    fn check(&self, x: &[T]) -> Result<()> {
        self.sys.space().check(x)?;
        if !self.contains(x) {
            return Err(Error::Argument(format!("{x:?} is outside B_delta(p)")));
        }
        Ok(())
    }

    /// Forward orbit of `x` until it is within `eps_stop` of `p`.
    pub(crate) fn orbit(&self, x: &[T]) -> Result<OrbitSegment<T>> {
        let space = self.sys.space();
        if space.dist(x, &self.p) == T::zero() || is_rest_point(&self.sys, x)? {
            let mut seg = sample_orbit(&self.sys, x, Direction::Forward, T::zero(), StopRule::horizon())?;
            seg.reached = space.dist(x, &self.p) == T::zero();
            return Ok(seg);
        }
        let seg = sample_orbit(&self.sys, x, Direction::Forward, self.opts.horizon, StopRule::within(&self.p, self.opts.eps_stop))?;
        if !seg.reached {
            return Err(Error::NonConvergence {
                t_max: self.opts.horizon.as_f64(),
                distance: space.dist(seg.last(), &self.p).as_f64(),
            });
        }
        Ok(seg)
    }

    pub fn value_exact(&self, x: &[T]) -> Result<Dyadic> {
        self.check(x)?;
        let seg = self.orbit(x)?;
        let mut e = self.cfg.extents(&seg.points);
        e.include_point(&self.cfg, &self.p);
        Ok(e.exact())
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        Ok(T::lit(self.value_exact(x)?.to_f64()))
    }

    /// `V` along the forward orbit of `x` for `t <= t_max`. Samples within `floor` of
    /// `p` are reported but not checked.
    pub fn audit(&self, x: &[T], t_max: T) -> Result<LyapunovReport<T>> {
        self.check(x)?;
        let seg = self.orbit(x)?;
        let space = self.sys.space();
        let mut e = Extents::empty(self.cfg.depth());
        e.include_point(&self.cfg, &self.p);
        let mut samples = Vec::new();
        for k in (0..seg.len()).rev() {
            e.include_point(&self.cfg, &seg.points[k]);
            if seg.times[k] <= t_max {
                let point = seg.points[k].clone();
                let checked = space.dist(&point, &self.p) >= self.opts.floor && self.contains(&point);
                samples.push(Sample { param: seg.times[k], point, value: e.exact(), parts: None, checked });
            }
        }
        samples.reverse();
        let mesh = seg.max_step(&self.sys).max(space.dist(seg.last(), &self.p));
        let meta = ReportMeta {
            mode: LyapMode::Asymptotic,
            tol: self.opts.tol_for(&self.cfg),
            mesh,
            horizon: self.opts.horizon,
            truncated: false,
        };
        build_report(samples, &self.cfg, meta)
    }
}

/// `V(x) = mu(O(x))` with `O(x)` the forward orbit closure of `x` at `p`.
pub fn lyap_asymptotic<T: Scalar>(
    sys: &SystemSpec<T>,
    p: &[T],
    delta: T,
    cfg: &SizeConfig<T>,
    opts: &LyapOptions<T>,
    x: &[T],
) -> Result<T> {
    AsymptoticLyapunov::new(sys.clone(), p.to_vec(), delta, cfg, opts.clone())?.value(x)
}
