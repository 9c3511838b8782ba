use crate::dynamics::{
    invariant_manifold_sample, is_rest_point, sample_orbit, AdaptedNeighborhood, Direction, ManifoldKind,
    ManifoldSample, NeighborhoodSpec, OrbitSegment, StopRule, SystemSpec,
};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::hyperspace::{Extents, SizeConfig};
use crate::metric::{domain_grid, Point, PointSet};
use crate::scalar::Scalar;

use super::{build_report, LyapMode, LyapOptions, LyapunovReport, ReportMeta, Sample};

/// `V(x) = mu(V+(x)) - mu(V-(x))` with
/// `V+(x) = O+_U(x) ∪ W^u_U(p) ∪ C` and `V-(x) = O-_U(x) ∪ W^s_U(p) ∪ C`,
/// where `U` is an adapted neighborhood of `p` and `C` samples `X \ U`.
///
/// The fixed parts are sampled once at construction. Works for flows and maps.
#[derive(Clone, Debug)]
pub struct SingularityLyapunov<T> {
    u: AdaptedNeighborhood<T>,
    cfg: SizeConfig<T>,
    opts: LyapOptions<T>,
    wu: ManifoldSample<T>,
    ws: ManifoldSample<T>,
    complement: Vec<Point<T>>,
    plus_anchor: Extents<T>,
    minus_anchor: Extents<T>,
    offset: Dyadic,
}

/// Forward and backward orbit pieces of a point inside `U`.
pub(crate) struct Pieces<T> {
    pub forward: OrbitSegment<T>,
    pub backward: OrbitSegment<T>,
}

impl<T: Scalar> Pieces<T> {
    fn truncated(&self) -> bool {
        [&self.forward, &self.backward].iter().any(|s| !s.exited && !s.reached && s.len() > 1)
    }
}

impl<T: Scalar> SingularityLyapunov<T> {
    pub fn new(sys: SystemSpec<T>, nbhd: NeighborhoodSpec<T>, cfg: &SizeConfig<T>, opts: LyapOptions<T>) -> Result<Self> {
        let cfg = if cfg.space() == sys.space() { cfg.clone() } else { cfg.with_space(sys.space().clone()) };
        let u = AdaptedNeighborhood::new(sys.clone(), nbhd.clone(), opts.horizon)?;
        let region = |x: &[T]| u.contains(x);
        let wu = invariant_manifold_sample(&sys, &nbhd, &region, ManifoldKind::Unstable, opts.grid, opts.horizon)?;
        let ws = invariant_manifold_sample(&sys, &nbhd, &region, ManifoldKind::Stable, opts.grid, opts.horizon)?;
        let complement: Vec<Point<T>> =
            domain_grid(sys.space(), opts.grid)?.into_iter().filter(|x| !u.contains(x)).collect();
        let c_ext = cfg.extents(&complement);
        let plus_anchor = cfg.extents(wu.set.points()).merged(&c_ext);
        let minus_anchor = cfg.extents(ws.set.points()).merged(&c_ext);
        Ok(SingularityLyapunov {
            u,
            cfg,
            opts,
            wu,
            ws,
            complement,
            plus_anchor,
            minus_anchor,
            offset: Dyadic::zero(),
        })
    }

    /// Shift so that `V(p) = 0`.
    pub fn normalized(mut self) -> Result<Self> {
        let p = self.u.center().to_vec();
        self.offset = self.value_exact(&p)?;
        Ok(self)
    }

    pub fn neighborhood(&self) -> &AdaptedNeighborhood<T> {
        &self.u
    }

    pub fn system(&self) -> &SystemSpec<T> {
        self.u.system()
    }

    pub fn config(&self) -> &SizeConfig<T> {
        &self.cfg
    }

    pub fn unstable(&self) -> &ManifoldSample<T> {
        &self.wu
    }

    pub fn stable(&self) -> &ManifoldSample<T> {
        &self.ws
    }

    /// Sample of `C = X \ U`; may be empty when `U` covers the grid.
    pub fn complement(&self) -> &[Point<T>] {
        &self.complement
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.u.contains(x)
    }

    pub(crate) fn pieces(&self, x: &[T]) -> Result<Pieces<T>> {
        let sys = self.u.system();
        sys.space().check(x)?;
        if !self.u.contains(x) {
            return Err(Error::Argument(format!("{x:?} is not in the adapted neighborhood")));
        }
        let p = self.u.center();
        let horizon = self.opts.horizon;
        if sys.space().dist(x, p) == T::zero() || is_rest_point(sys, x)? {
            let still = sample_orbit(sys, x, Direction::Forward, T::zero(), StopRule::horizon())?;
            return Ok(Pieces { forward: still.clone(), backward: still });
        }
        let ball = |y: &[T]| self.u.in_ball(y);
        let stop = StopRule { region: Some(&ball), target: Some((p, self.opts.eps_stop)) };
        let forward = sample_orbit(sys, x, Direction::Forward, horizon, stop)?;
        let backward = sample_orbit(sys, x, Direction::Backward, horizon, stop)?;
        let stuck = |s: &OrbitSegment<T>| !s.exited && !s.reached;
        if stuck(&forward) && stuck(&backward) {
            return Err(Error::IsolationViolation {
                witness: x.iter().map(|c| c.as_f64()).collect(),
                horizon: horizon.as_f64(),
            });
        }
        Ok(Pieces { forward, backward })
    }

    /// `(mu(V+(x)), mu(V-(x)))`, exact.
    pub fn parts_exact(&self, x: &[T]) -> Result<(Dyadic, Dyadic)> {
        let pieces = self.pieces(x)?;
        let plus = self.cfg.extents(&pieces.forward.points).merged(&self.plus_anchor).exact();
        let minus = self.cfg.extents(&pieces.backward.points).merged(&self.minus_anchor).exact();
        Ok((plus, minus))
    }

    pub fn value_exact(&self, x: &[T]) -> Result<Dyadic> {
        let (plus, minus) = self.parts_exact(x)?;
        Ok(&(&plus - &minus) - &self.offset)
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        Ok(T::lit(self.value_exact(x)?.to_f64()))
    }

    /// The sampled sets `V+(x)` and `V-(x)`.
    pub fn vpm_sets(&self, x: &[T]) -> Result<(PointSet<T>, PointSet<T>)> {
        let pieces = self.pieces(x)?;
        let sys = self.u.system();
        let build = |orbit: &OrbitSegment<T>, manifold: &ManifoldSample<T>| {
            let mut pts = orbit.points.clone();
            pts.extend(manifold.set.points().iter().cloned());
            pts.extend(self.complement.iter().cloned());
            let mesh = orbit.max_step(sys).max(manifold.set.mesh()).max(self.opts.grid);
            PointSet::new(pts, mesh)
        };
        Ok((build(&pieces.forward, &self.wu)?, build(&pieces.backward, &self.ws)?))
    }

    /// `V` along the forward orbit of `x` inside `U` for `t <= t_max`, evaluated on
    /// one sampled orbit so that consecutive `V+` (`V-`) sets are exactly nested.
    pub fn audit(&self, x: &[T], t_max: T) -> Result<LyapunovReport<T>> {
        self.audit_as(x, t_max, LyapMode::Singularity)
    }

    pub(crate) fn audit_as(&self, x: &[T], t_max: T, mode: LyapMode) -> Result<LyapunovReport<T>> {
        let pieces = self.pieces(x)?;
        let sys = self.u.system();
        let space = sys.space();
        let p = self.u.center();
        let fwd = &pieces.forward;
        let bwd = &pieces.backward;

        // chain: backward piece reversed, then the forward piece; x sits at k0
        let mut chain: Vec<&Point<T>> = bwd.points.iter().skip(1).rev().collect();
        let k0 = chain.len();
        chain.extend(fwd.points.iter());
        let eval_end = k0 + fwd.times.iter().take_while(|&&t| t <= t_max).count();

        let mut plus = Vec::with_capacity(eval_end - k0);
        let mut e = self.plus_anchor.clone();
        for k in (k0..chain.len()).rev() {
            e.include_point(&self.cfg, chain[k]);
            if k < eval_end {
                plus.push(e.exact());
            }
        }
        plus.reverse();

        let mut e = self.minus_anchor.clone();
        for pt in &chain[..k0] {
            e.include_point(&self.cfg, pt);
        }
        let mut samples = Vec::with_capacity(eval_end - k0);
        for (k, mu_plus) in (k0..eval_end).zip(plus) {
            e.include_point(&self.cfg, chain[k]);
            let mu_minus = e.exact();
            let value = &(&mu_plus - &mu_minus) - &self.offset;
            let point = chain[k].clone();
            let checked = space.dist(&point, p) >= self.opts.floor;
            samples.push(Sample { param: fwd.times[k - k0], point, value, parts: Some((mu_plus, mu_minus)), checked });
        }
        let mesh = fwd.max_step(sys).max(bwd.max_step(sys));
        let meta = ReportMeta {
            mode,
            tol: self.opts.tol_for(&self.cfg),
            mesh,
            horizon: self.opts.horizon,
            truncated: pieces.truncated(),
        };
        build_report(samples, &self.cfg, meta)
    }
}

/// `(V+(x), V-(x))` for the adapted neighborhood `nbhd`.
pub fn vpm_sets<T: Scalar>(
    sys: &SystemSpec<T>,
    nbhd: &NeighborhoodSpec<T>,
    cfg: &SizeConfig<T>,
    opts: &LyapOptions<T>,
    x: &[T],
) -> Result<(PointSet<T>, PointSet<T>)> {
    SingularityLyapunov::new(sys.clone(), nbhd.clone(), cfg, opts.clone())?.vpm_sets(x)
}

/// `V(x) = mu(V+(x)) - mu(V-(x))`.
pub fn lyap_singularity<T: Scalar>(
    sys: &SystemSpec<T>,
    nbhd: &NeighborhoodSpec<T>,
    cfg: &SizeConfig<T>,
    opts: &LyapOptions<T>,
    x: &[T],
) -> Result<T> {
    SingularityLyapunov::new(sys.clone(), nbhd.clone(), cfg, opts.clone())?.value(x)
}
