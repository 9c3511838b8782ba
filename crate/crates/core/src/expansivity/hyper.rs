//! Size functions on the hyperspace with `F1` collapsed to a point, and the
//! Lyapunov functions of the induced map near `F1`.
//!
//! Distances between finite sets use `min(d_H(A, B), diam(A)/2 + diam(B)/2)`.
//! `diam/2` is 1-Lipschitz for `d_H` and vanishes exactly on singletons, so this
//! is the collapse of `F1` with the token at distance `diam(A)/2` from `A`.

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::hyperspace::{hausdorff_points, Extents, SizeConfig};
use crate::lyapunov::{build_report, LyapMode, LyapunovReport, ReportMeta, Sample};
use crate::metric::{AmbientSpace, DenseSequence, Point};
use crate::scalar::Scalar;

use super::{advance_chain_dir, Chain, PairState, DEFAULT_POINT_BUDGET};

/// Reference sets for the hyperspace size series: the one- and two-point subsets
/// of the dense sequence, ordered by largest index, then smallest.
#[derive(Clone, Debug)]
pub struct HyperspaceSize<T> {
    space: AmbientSpace<T>,
    refs: Vec<Vec<Point<T>>>,
    half_diams: Vec<T>,
    tail_bound: T,
}

impl<T: Scalar> HyperspaceSize<T> {
    pub fn new(space: AmbientSpace<T>, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Argument("size depth must be at least 1".into()));
        }
        let seq = DenseSequence::new(&space);
        let mut refs = Vec::with_capacity(depth);
        'outer: for b in 1.. {
            for a in 1..=b {
                if refs.len() == depth {
                    break 'outer;
                }
                refs.push(if a == b { vec![seq.point(a)] } else { vec![seq.point(a), seq.point(b)] });
            }
        }
        let half = T::lit(0.5);
        let half_diams = refs
            .iter()
            .map(|q: &Vec<Point<T>>| if q.len() == 2 { space.dist(&q[0], &q[1]) * half } else { T::zero() })
            .collect();
        let tail_bound = space.diameter_upper() / T::lit(2.0).powi(depth.min(i32::MAX as usize) as i32);
        Ok(HyperspaceSize { space, refs, half_diams, tail_bound })
    }

    pub fn depth(&self) -> usize {
        self.refs.len()
    }

    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn space(&self) -> &AmbientSpace<T> {
        &self.space
    }

    /// Collapsed-hyperspace distances from each reference to the set `a` of diameter `diam`.
    pub fn distances(&self, a: &[Point<T>], diam: T) -> Extents<T> {
        if diam == T::zero() {
            return self.token();
        }
        let g = diam * T::lit(0.5);
        let d = self
            .refs
            .iter()
            .zip(&self.half_diams)
            .map(|(q, &gq)| hausdorff_points(&self.space, q, a).min(gq + g))
            .collect();
        Extents::from_distances(d)
    }

    /// Distances from each reference to the collapsed `F1`.
    pub fn token(&self) -> Extents<T> {
        Extents::from_distances(self.half_diams.clone())
    }
}

/// Iterates of `start` while the diameter stays below `delta`, at most `horizon`.
fn run_in_u<S, T: Scalar>(
    start: &S,
    forward: bool,
    delta: T,
    horizon: u64,
    step: &impl Fn(&S, bool) -> Result<S>,
    diam: &impl Fn(&S) -> T,
) -> Result<(Vec<S>, bool)>
where
    S: Clone,
{
    let mut out = vec![start.clone()];
    for _ in 0..horizon {
        let next = step(out.last().expect("nonempty"), forward)?;
        if diam(&next) >= delta {
            return Ok((out, true));
        }
        out.push(next);
    }
    Ok((out, false))
}

fn family_size<T: Scalar>(h: &HyperspaceSize<T>, members: &[Extents<T>]) -> Dyadic {
    let mut e = h.token();
    for m in members {
        e.merge(m);
    }
    e.exact()
}

struct Induced<'a, S, T, F, D, P> {
    h: &'a HyperspaceSize<T>,
    delta: T,
    horizon: u64,
    step: F,
    diam: D,
    points: P,
    _state: std::marker::PhantomData<S>,
}

impl<S, T, F, D, P> Induced<'_, S, T, F, D, P>
where
    S: Clone,
    T: Scalar,
    F: Fn(&S, bool) -> Result<S>,
    D: Fn(&S) -> T,
    P: Fn(&S) -> Vec<Point<T>>,
{
    fn extents(&self, s: &S) -> Extents<T> {
        self.h.distances(&(self.points)(s), (self.diam)(s))
    }

    fn check(&self, s: &S) -> Result<()> {
        let d = (self.diam)(s);
        if d >= self.delta {
            return Err(Error::OutOfNeighborhood { diameter: d.as_f64(), delta: self.delta.as_f64() });
        }
        Ok(())
    }

    /// `mu(O+_U(A) ∪ {F1}) - mu(O-_U(A) ∪ {F1})`.
    fn value(&self, s: &S) -> Result<Dyadic> {
        self.check(s)?;
        if (self.diam)(s) == T::zero() {
            return Ok(Dyadic::zero());
        }
        let (fwd, _) = run_in_u(s, true, self.delta, self.horizon, &self.step, &self.diam)?;
        let (bwd, _) = run_in_u(s, false, self.delta, self.horizon, &self.step, &self.diam)?;
        let plus: Vec<Extents<T>> = fwd.iter().map(|m| self.extents(m)).collect();
        let minus: Vec<Extents<T>> = bwd.iter().map(|m| self.extents(m)).collect();
        Ok(&family_size(self.h, &plus) - &family_size(self.h, &minus))
    }

    /// `V` at each of the first `steps` iterates of `s` that stay in `U`, all taken
    /// from one sampled orbit.
    fn audit(&self, s: &S, steps: u64, tol: T, mode: LyapMode, flat: impl Fn(&S) -> Point<T>) -> Result<LyapunovReport<T>> {
        self.check(s)?;
        let h = self.horizon as usize;
        let (bwd, _) = run_in_u(s, false, self.delta, self.horizon, &self.step, &self.diam)?;
        let (fwd, _) = run_in_u(s, true, self.delta, steps + self.horizon, &self.step, &self.diam)?;
        let mut chain: Vec<S> = bwd.into_iter().skip(1).rev().collect();
        let k0 = chain.len();
        chain.extend(fwd);
        let ext: Vec<Extents<T>> = chain.iter().map(|m| self.extents(m)).collect();
        let last = (k0 + steps as usize).min(chain.len() - 1);
        let mut samples = Vec::with_capacity(last - k0 + 1);
        for k in k0..=last {
            let plus = family_size(self.h, &ext[k..=(k + h).min(chain.len() - 1)]);
            let minus = family_size(self.h, &ext[k.saturating_sub(h)..=k]);
            let value = &plus - &minus;
            samples.push(Sample {
                param: T::from_usize(k - k0).expect("iterate fits scalar"),
                point: flat(&chain[k]),
                value,
                parts: Some((plus, minus)),
                checked: (self.diam)(&chain[k]) > T::zero(),
            });
        }
        let mesh = T::zero();
        let meta = ReportMeta { mode, tol, mesh, horizon: T::from_u64(self.horizon).expect("horizon fits scalar"), truncated: false };
        let cfg = SizeConfig::new(self.h.space.clone(), 1)?;
        let mut report = build_report(samples, &cfg, meta)?;
        report.depth = self.h.depth();
        report.tail_bound = self.h.tail_bound();
        Ok(report)
    }
}

fn pair_induced<'a, T: Scalar>(
    map: &'a SystemSpec<T>,
    delta: T,
    h: &'a HyperspaceSize<T>,
    horizon: u64,
) -> Result<
    Induced<
        'a,
        PairState<T>,
        T,
        impl Fn(&PairState<T>, bool) -> Result<PairState<T>> + 'a,
        impl Fn(&PairState<T>) -> T,
        impl Fn(&PairState<T>) -> Vec<Point<T>>,
    >,
> {
    if !map.is_map() {
        return Err(Error::Argument("induced dynamics needs a map system".into()));
    }
    Ok(Induced {
        h,
        delta,
        horizon,
        step: move |s: &PairState<T>, fwd: bool| s.step(map, fwd),
        diam: |s: &PairState<T>| s.diam,
        points: |s: &PairState<T>| s.points(),
        _state: std::marker::PhantomData,
    })
}

fn chain_induced<'a, T: Scalar>(
    map: &'a SystemSpec<T>,
    delta: T,
    h: &'a HyperspaceSize<T>,
    horizon: u64,
) -> Result<
    Induced<
        'a,
        Chain<T>,
        T,
        impl Fn(&Chain<T>, bool) -> Result<Chain<T>> + 'a,
        impl Fn(&Chain<T>) -> T + 'a,
        impl Fn(&Chain<T>) -> Vec<Point<T>> + 'a,
    >,
> {
    if !map.is_map() {
        return Err(Error::Argument("induced dynamics needs a map system".into()));
    }
    let space = map.space();
    Ok(Induced {
        h,
        delta,
        horizon,
        step: move |c: &Chain<T>, fwd: bool| advance_chain_dir(map, c, fwd, DEFAULT_POINT_BUDGET),
        diam: move |c: &Chain<T>| c.diameter(space),
        points: move |c: &Chain<T>| c.normalized_points(space),
        _state: std::marker::PhantomData,
    })
}

/// `V(A)` for a pair with `diam(A) < delta`, using runs of at most `horizon` iterates.
pub fn lyap_pair<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    a: &PairState<T>,
    horizon: u64,
) -> Result<T> {
    Ok(T::lit(lyap_pair_exact(map, delta, h, a, horizon)?.to_f64()))
}

pub fn lyap_pair_exact<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    a: &PairState<T>,
    horizon: u64,
) -> Result<Dyadic> {
    pair_induced(map, delta, h, horizon)?.value(a)
}

/// `V(C)` for a chain with `diam(C) < delta`.
pub fn lyap_chain<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    c: &Chain<T>,
    horizon: u64,
) -> Result<T> {
    Ok(T::lit(lyap_chain_exact(map, delta, h, c, horizon)?.to_f64()))
}

pub fn lyap_chain_exact<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    c: &Chain<T>,
    horizon: u64,
) -> Result<Dyadic> {
    chain_induced(map, delta, h, horizon)?.value(c)
}

/// Decrease audit of `V` along the first `steps` images of a pair. Points in the
/// report are `x` followed by `y`.
pub fn audit_pair_orbit<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    a: &PairState<T>,
    steps: u64,
    horizon: u64,
    tol: T,
) -> Result<LyapunovReport<T>> {
    let flat = |s: &PairState<T>| s.x.iter().chain(&s.y).copied().collect();
    pair_induced(map, delta, h, horizon)?.audit(a, steps, tol, LyapMode::Pair, flat)
}

/// Decrease audit of `V` along the first `steps` images of a chain. Points in the
/// report are the chain's first and last sample.
pub fn audit_chain_orbit<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    h: &HyperspaceSize<T>,
    c: &Chain<T>,
    steps: u64,
    horizon: u64,
    tol: T,
) -> Result<LyapunovReport<T>> {
    let flat = |c: &Chain<T>| {
        let p = c.points();
        p[0].iter().chain(&p[p.len() - 1]).copied().collect()
    };
    chain_induced(map, delta, h, horizon)?.audit(c, steps, tol, LyapMode::Chain, flat)
}
