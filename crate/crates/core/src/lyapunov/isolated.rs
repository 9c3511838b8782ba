use serde::{Deserialize, Serialize};

use crate::dynamics::{quotient_system, sample_orbit, Direction, NeighborhoodSpec, StopRule, SystemSpec};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::hyperspace::{Extents, SizeConfig};
use crate::metric::{Point, PointSet};
use crate::scalar::Scalar;

use super::{
    build_report, AsymptoticLyapunov, LyapMode, LyapOptions, LyapunovReport, ReportMeta, Sample, SingularityLyapunov,
};

/// How nearby orbits behave relative to the isolated set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsolatedKind {
    Attracting,
    Repelling,
    SaddleType,
}

#[derive(Clone, Debug)]
enum Inner<T> {
    /// Asymptotic construction on the quotient, for the system or its reversal.
    Basin(AsymptoticLyapunov<T>),
    Saddle(SingularityLyapunov<T>),
}

/// Lyapunov function for an isolated set `L`: collapse `L` to a point and apply the
/// construction for a singular point of the induced flow.
///
/// Attracting `L` gets `mu(O+(x) ∪ L)`, repelling `L` gets `-mu(O-(x) ∪ L)`; both
/// vanish exactly on `L`. Saddle-type `L` gets the `V+`/`V-` difference shifted so
/// that it vanishes on `L`.
#[derive(Clone, Debug)]
pub struct IsolatedSetLyapunov<T> {
    kind: IsolatedKind,
    lambda: PointSet<T>,
    sys: SystemSpec<T>,
    r: T,
    opts: LyapOptions<T>,
    inner: Inner<T>,
}

impl<T: Scalar> IsolatedSetLyapunov<T> {
    /// `r` and `rho` are measured in the quotient metric, i.e. as distances to `L`.
    pub fn new(
        sys: &SystemSpec<T>,
        lambda: &PointSet<T>,
        r: T,
        rho: T,
        cfg: &SizeConfig<T>,
        opts: &LyapOptions<T>,
    ) -> Result<Self> {
        let qsys = quotient_system(sys, lambda)?;
        let center = lambda.points()[0].clone();
        // sampled L is only resolved to its mesh
        let mut opts = opts.clone();
        opts.eps_stop = opts.eps_stop.max(T::lit(2.0) * lambda.mesh());
        opts.floor = opts.floor.max(T::lit(2.0) * opts.eps_stop);
        let kind = classify(&qsys, &center, r, &opts)?;
        let inner = match kind {
            IsolatedKind::Attracting => Inner::Basin(AsymptoticLyapunov::new(qsys.clone(), center, r, cfg, opts.clone())?),
            IsolatedKind::Repelling => {
                Inner::Basin(AsymptoticLyapunov::new(qsys.clone().reversed(), center, r, cfg, opts.clone())?)
            }
            IsolatedKind::SaddleType => {
                let nbhd = NeighborhoodSpec::new(center, r, rho)?;
                Inner::Saddle(SingularityLyapunov::new(qsys.clone(), nbhd, cfg, opts.clone())?.normalized()?)
            }
        };
        Ok(IsolatedSetLyapunov { kind, lambda: lambda.clone(), sys: qsys, r, opts, inner })
    }

    pub fn kind(&self) -> IsolatedKind {
        self.kind
    }

    /// The induced system on the quotient.
    pub fn quotient_system(&self) -> &SystemSpec<T> {
        &self.sys
    }

    pub fn collapsed(&self) -> &PointSet<T> {
        &self.lambda
    }

    pub fn contains(&self, x: &[T]) -> bool {
        match &self.inner {
            Inner::Basin(a) => a.contains(x),
            Inner::Saddle(s) => s.contains(x),
        }
    }

    fn isolation(&self, x: &[T], err: Error) -> Error {
        match err {
            Error::NonConvergence { .. } => Error::IsolationViolation {
                witness: x.iter().map(|c| c.as_f64()).collect(),
                horizon: self.opts.horizon.as_f64(),
            },
            other => other,
        }
    }

    pub fn value_exact(&self, x: &[T]) -> Result<Dyadic> {
        match &self.inner {
            Inner::Basin(a) => {
                let v = a.value_exact(x).map_err(|e| self.isolation(x, e))?;
                Ok(if self.kind == IsolatedKind::Repelling { -v } else { v })
            }
            Inner::Saddle(s) => s.value_exact(x),
        }
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        Ok(T::lit(self.value_exact(x)?.to_f64()))
    }

    /// `V` along the forward orbit of `x` while it stays in `U`, for `t <= t_max`.
    pub fn audit(&self, x: &[T], t_max: T) -> Result<LyapunovReport<T>> {
        match &self.inner {
            Inner::Saddle(s) => s.audit_as(x, t_max, LyapMode::Isolated),
            Inner::Basin(a) if self.kind == IsolatedKind::Attracting => {
                let mut report = a.audit(x, t_max).map_err(|e| self.isolation(x, e))?;
                report.mode = LyapMode::Isolated;
                Ok(report)
            }
            Inner::Basin(a) => self.audit_repelling(a, x, t_max),
        }
    }

    /// Backward orbit to `L` (the reversed system's approach) followed by the forward
    /// orbit until it leaves `U`; `-mu` of the growing prefix.
    fn audit_repelling(&self, a: &AsymptoticLyapunov<T>, x: &[T], t_max: T) -> Result<LyapunovReport<T>> {
        if !a.contains(x) {
            return Err(Error::Argument(format!("{x:?} is outside the isolating neighborhood")));
        }
        let cfg = a.config();
        let space = self.sys.space();
        let center = &self.lambda.points()[0];
        let back = a.orbit(x).map_err(|e| self.isolation(x, e))?;
        let ball = |y: &[T]| space.dist(y, center) < self.r;
        let fwd = sample_orbit(&self.sys, x, Direction::Forward, t_max, StopRule::leaves(&ball))?;

        let mut e = Extents::empty(cfg.depth());
        e.include_point(cfg, center);
        for pt in back.points.iter().skip(1) {
            e.include_point(cfg, pt);
        }
        let mut samples = Vec::with_capacity(fwd.len());
        for (t, pt) in fwd.times.iter().zip(&fwd.points) {
            e.include_point(cfg, pt);
            let checked = space.dist(pt, center) >= self.opts.floor;
            samples.push(Sample { param: *t, point: pt.clone(), value: -e.exact(), parts: None, checked });
        }
        let sys = a.system();
        let meta = ReportMeta {
            mode: LyapMode::Isolated,
            tol: self.opts.tol_for(cfg),
            mesh: back.max_step(sys).max(fwd.max_step(&self.sys)),
            horizon: self.opts.horizon,
            truncated: false,
        };
        build_report(samples, cfg, meta)
    }
}

/// Probe points around `L` at half the isolating radius decide whether nearby
/// orbits arrive forward, backward, or neither.
fn classify<T: Scalar>(qsys: &SystemSpec<T>, center: &[T], r: T, opts: &LyapOptions<T>) -> Result<IsolatedKind> {
    let space = qsys.space();
    let lambda = space.collapsed().expect("quotient system");
    let stride = (lambda.len() / 8).max(1);
    let half = r * T::lit(0.5);
    let ball = |y: &[T]| space.dist(y, center) < r;
    let stop = StopRule { region: Some(&ball), target: Some((center, opts.eps_stop)) };
    let (mut probes, mut forward, mut backward) = (0usize, 0usize, 0usize);
    for base in lambda.points().iter().step_by(stride) {
        for axis in 0..space.dim() {
            for sign in [T::one(), -T::one()] {
                let mut y = base.clone();
                y[axis] = y[axis] + sign * half;
                space.normalize(&mut y);
                if !space.contains(&y) || !ball(&y) || space.dist(&y, center) <= opts.eps_stop {
                    continue;
                }
                probes += 1;
                if sample_orbit(qsys, &y, Direction::Forward, opts.horizon, stop)?.reached {
                    forward += 1;
                }
                if sample_orbit(qsys, &y, Direction::Backward, opts.horizon, stop)?.reached {
                    backward += 1;
                }
            }
        }
    }
    if probes == 0 {
        return Err(Error::Argument("no probe points fit inside the isolating neighborhood".into()));
    }
    Ok(if forward == probes {
        IsolatedKind::Attracting
    } else if backward == probes {
        IsolatedKind::Repelling
    } else {
        IsolatedKind::SaddleType
    })
}

/// `V` for the isolated set `lambda`, with `r` and `rho` measured from `lambda`.
pub fn lyap_isolated_set<T: Scalar>(
    sys: &SystemSpec<T>,
    lambda: &PointSet<T>,
    r: T,
    rho: T,
    cfg: &SizeConfig<T>,
    opts: &LyapOptions<T>,
    x: &[T],
) -> Result<T> {
    IsolatedSetLyapunov::new(sys, lambda, r, rho, cfg, opts)?.value(x)
}

/// Discrete-time construction for an isolated set of a map: orbit pieces are the
/// maximal runs of iterates inside `U`, manifolds are eigenlines or classified
/// iterates, and `V` is shifted to vanish on `L`.
#[derive(Clone, Debug)]
pub struct DiscreteLyapunov<T> {
    inner: SingularityLyapunov<T>,
}

impl<T: Scalar> DiscreteLyapunov<T> {
    /// `nbhd.center` is replaced by the first point of `lambda`; for more than one
    /// point, `r` and `rho` are distances to `lambda`.
    pub fn new(
        map: &SystemSpec<T>,
        lambda: &PointSet<T>,
        nbhd: &NeighborhoodSpec<T>,
        cfg: &SizeConfig<T>,
        opts: &LyapOptions<T>,
    ) -> Result<Self> {
        if !map.is_map() {
            return Err(Error::Argument("discrete construction needs a map system".into()));
        }
        let sys = if lambda.len() > 1 { quotient_system(map, lambda)? } else { map.clone() };
        let center: Point<T> = lambda.points()[0].clone();
        let nbhd = NeighborhoodSpec::new(center, nbhd.r, nbhd.rho)?;
        let mut opts = opts.clone();
        opts.floor = opts.floor.max(T::lit(2.0) * lambda.mesh());
        let inner = SingularityLyapunov::new(sys, nbhd, cfg, opts)?.normalized()?;
        Ok(DiscreteLyapunov { inner })
    }

    pub fn construction(&self) -> &SingularityLyapunov<T> {
        &self.inner
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.inner.contains(x)
    }

    pub fn value_exact(&self, x: &[T]) -> Result<Dyadic> {
        self.inner.value_exact(x)
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        self.inner.value(x)
    }

    /// `V` along the iterates of `x` while they stay in `U`, up to `n_max` iterates.
    pub fn audit(&self, x: &[T], n_max: T) -> Result<LyapunovReport<T>> {
        self.inner.audit_as(x, n_max, LyapMode::Discrete)
    }
}

/// `V` for an isolated set of a map.
pub fn lyap_discrete<T: Scalar>(
    map: &SystemSpec<T>,
    lambda: &PointSet<T>,
    nbhd: &NeighborhoodSpec<T>,
    cfg: &SizeConfig<T>,
    opts: &LyapOptions<T>,
    x: &[T],
) -> Result<T> {
    DiscreteLyapunov::new(map, lambda, nbhd, cfg, opts)?.value(x)
}
