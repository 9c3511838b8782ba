//! Hausdorff distance and Whitney size functions on finite samples of compact sets.
//!
//! The size of a compact set `A` is `sum_i (max_{x in A} d(q_i, x) - min_{x in A} d(q_i, x)) / 2^i`
//! over a dense sequence `q_i`. Truncated at depth `N` the remainder is at most
//! `diameter_upper / 2^N`, which is reported with every value.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::exact::{Dyadic, DyadicSeries};
use crate::metric::{AmbientSpace, DenseSequence, MetricRule, Point, PointSet};
use crate::scalar::Scalar;

pub const DEFAULT_DEPTH: usize = 64;

fn check_dims<T: Scalar>(a: &PointSet<T>, b: &PointSet<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Argument(format!("sets of dimension {} and {} are not in the same space", a.dim(), b.dim())));
    }
    Ok(())
}

/// `max_{a in from} min_{b in to} d(a, b)`.
pub fn directed_hausdorff<T: Scalar>(space: &AmbientSpace<T>, from: &[Point<T>], to: &[Point<T>]) -> T {
    from.iter().map(|a| space.dist_to_set(a, to)).fold(T::zero(), T::max)
}

pub fn hausdorff_points<T: Scalar>(space: &AmbientSpace<T>, a: &[Point<T>], b: &[Point<T>]) -> T {
    directed_hausdorff(space, a, b).max(directed_hausdorff(space, b, a))
}

pub fn hausdorff_distance<T: Scalar>(space: &AmbientSpace<T>, a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
    check_dims(a, b)?;
    if a.dim() != space.dim() {
        return Err(Error::Argument("sets do not live in the given space".into()));
    }
    Ok(hausdorff_points(space, a.points(), b.points()))
}

/// `max_{x in A} d(q, x) - min_{x in A} d(q, x)`.
pub fn size_component<T: Scalar>(space: &AmbientSpace<T>, a: &PointSet<T>, q: &[T]) -> T {
    let (lo, hi) = a
        .points()
        .iter()
        .map(|x| space.dist(q, x))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), d| (lo.min(d), hi.max(d)));
    hi - lo
}

/// Truncation depth plus the reference points the series is evaluated against.
#[derive(Clone, Debug)]
pub struct SizeConfig<T> {
    space: AmbientSpace<T>,
    refs: Arc<Vec<Point<T>>>,
    /// Distance from each reference to the collapsed set, for quotient spaces.
    gaps: Option<Arc<Vec<T>>>,
    tail_bound: T,
    density: T,
}

impl<T: Scalar> SizeConfig<T> {
    /// First `depth` points of the dyadic dense sequence of `space`.
    pub fn new(space: AmbientSpace<T>, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Argument("size depth must be at least 1".into()));
        }
        let seq = DenseSequence::new(&space);
        let refs = seq.prefix(depth);
        let density = seq.density(depth);
        Ok(Self::from_parts(space, refs, density))
    }

    fn from_parts(space: AmbientSpace<T>, refs: Vec<Point<T>>, density: T) -> Self {
        let depth = refs.len();
        let tail_bound = space.diameter_upper() / T::lit(2.0).powi(depth.min(i32::MAX as usize) as i32);
        let gaps = Self::gaps_for(&space, &refs);
        SizeConfig { space, refs: Arc::new(refs), gaps, tail_bound, density }
    }

    fn gaps_for(space: &AmbientSpace<T>, refs: &[Point<T>]) -> Option<Arc<Vec<T>>> {
        match space.rule() {
            MetricRule::QuotientCollapse { base, collapsed } => {
                Some(Arc::new(refs.iter().map(|q| base.dist_to_set(q, collapsed.points())).collect()))
            }
            _ => None,
        }
    }

    /// Same references, distances measured in `space` (e.g. a quotient of the original).
    pub fn with_space(&self, space: AmbientSpace<T>) -> Self {
        let mut cfg = self.clone();
        cfg.tail_bound = space.diameter_upper() / T::lit(2.0).powi(self.depth() as i32);
        cfg.gaps = Self::gaps_for(&space, &self.refs);
        cfg.space = space;
        cfg
    }

    pub fn space(&self) -> &AmbientSpace<T> {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.refs.len()
    }

    pub fn references(&self) -> &[Point<T>] {
        &self.refs
    }

    /// Remainder bound of the truncated series.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    /// Covering radius of the reference prefix.
    pub fn density(&self) -> T {
        self.density
    }

    /// Per-reference extents of a sampled set.
    pub fn extents(&self, points: &[Point<T>]) -> Extents<T> {
        let mut e = Extents::empty(self.depth());
        for p in points {
            e.include_point(self, p);
        }
        e
    }
}

/// Running `max` and `min` of distances from each reference point to a set.
///
/// Extents of a union are the componentwise merge, so fixed parts of a set can be
/// evaluated once and combined with moving parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Extents<T> {
    max: Vec<T>,
    min: Vec<T>,
}

impl<T: Scalar> Extents<T> {
    pub fn empty(depth: usize) -> Self {
        Extents { max: vec![T::neg_infinity(); depth], min: vec![T::infinity(); depth] }
    }

    /// Extents of a single element given its distance to each reference.
    pub fn from_distances(distances: Vec<T>) -> Self {
        Extents { max: distances.clone(), min: distances }
    }

    pub fn is_empty(&self) -> bool {
        self.min.first().is_none_or(|m| m.is_infinite())
    }

    pub fn include_point(&mut self, cfg: &SizeConfig<T>, p: &[T]) {
        let refs = cfg.references().iter().zip(&mut self.max).zip(&mut self.min);
        match (cfg.space().rule(), &cfg.gaps) {
            // same arithmetic as the quotient distance, with the reference side cached
            (MetricRule::QuotientCollapse { base, collapsed }, Some(gaps)) => {
                let gap_p = base.dist_to_set(p, collapsed.points());
                for (((q, hi), lo), &gap_q) in refs.zip(gaps.iter()) {
                    let d = base.dist(q, p).min(gap_q + gap_p);
                    *hi = hi.max(d);
                    *lo = lo.min(d);
                }
            }
            _ => {
                for ((q, hi), lo) in refs {
                    let d = cfg.space().dist(q, p);
                    *hi = hi.max(d);
                    *lo = lo.min(d);
                }
            }
        }
    }

    pub fn merge(&mut self, other: &Extents<T>) {
        for (a, b) in self.max.iter_mut().zip(&other.max) {
            *a = a.max(*b);
        }
        for (a, b) in self.min.iter_mut().zip(&other.min) {
            *a = a.min(*b);
        }
    }

    pub fn merged(&self, other: &Extents<T>) -> Extents<T> {
        let mut e = self.clone();
        e.merge(other);
        e
    }

    fn components(&self) -> impl Iterator<Item = T> + '_ {
        self.max.iter().zip(&self.min).map(|(&hi, &lo)| if hi >= lo { hi - lo } else { T::zero() })
    }

    /// Floating point value of the truncated series.
    pub fn size(&self) -> T {
        let half = T::lit(0.5);
        let mut w = T::one();
        let mut total = T::zero();
        for c in self.components() {
            w = w * half;
            total = total + c * w;
        }
        total
    }

    /// Exact value of the truncated series.
    pub fn exact(&self) -> Dyadic {
        let mut s = DyadicSeries::new(self.max.len());
        for (i, c) in self.components().enumerate() {
            s.push(i + 1, c.as_f64());
        }
        s.finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeValue<T> {
    pub value: T,
    pub tail_bound: T,
}

/// Truncated Whitney size of `a` with its remainder bound.
pub fn whitney_size<T: Scalar>(a: &PointSet<T>, cfg: &SizeConfig<T>) -> SizeValue<T> {
    SizeValue { value: cfg.extents(a.points()).size(), tail_bound: cfg.tail_bound() }
}

/// Exact truncated Whitney size of `a`.
pub fn whitney_size_exact<T: Scalar>(a: &PointSet<T>, cfg: &SizeConfig<T>) -> Dyadic {
    cfg.extents(a.points()).exact()
}

/// `f'(A) = { f(x) : x in A }` for a map system.
pub fn induced_image<T: Scalar>(sys: &SystemSpec<T>, a: &PointSet<T>) -> Result<PointSet<T>> {
    if !sys.is_map() {
        return Err(Error::Argument("induced image needs a map system, got a flow".into()));
    }
    let points = a.points().iter().map(|x| sys.forward(x)).collect::<Result<Vec<_>>>()?;
    PointSet::new(points, a.mesh())
}
