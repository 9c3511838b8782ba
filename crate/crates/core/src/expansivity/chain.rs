use serde::{Deserialize, Serialize};

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::metric::{diameter_of, AmbientSpace, MetricRule, Point};
use crate::scalar::Scalar;

use super::{check_run, diameter_history, first_separation, ExpansivityReport, Verdict, Witness};

/// Default cap on the number of points a re-sampled chain may need.
pub const DEFAULT_POINT_BUDGET: usize = 1_000_000;

/// The curve a chain samples, in covering-space coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainSource<T> {
    /// Straight segment; catalog maps lift to affine maps, so images stay segments.
    Segment { start: Point<T>, end: Point<T> },
}

/// Ordered sample of a continuum with consecutive gaps at most `eps_chain`.
/// Points are kept in covering-space coordinates so the segment never breaks at
/// the edge of the fundamental domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain<T> {
    source: ChainSource<T>,
    eps_chain: T,
    points: Vec<Point<T>>,
}

fn euclid<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

impl<T: Scalar> Chain<T> {
    pub fn segment(start: Point<T>, end: Point<T>, eps_chain: T) -> Result<Self> {
        Self::segment_with_budget(start, end, eps_chain, DEFAULT_POINT_BUDGET)
    }

    pub fn segment_with_budget(start: Point<T>, end: Point<T>, eps_chain: T, budget: usize) -> Result<Self> {
        if start.is_empty() || start.len() != end.len() {
            return Err(Error::Argument("segment endpoints must have equal nonzero dimension".into()));
        }
        if !(eps_chain > T::zero()) {
            return Err(Error::Argument("eps_chain must be positive".into()));
        }
        if start.iter().chain(&end).any(|c| !c.is_finite()) {
            return Err(Error::Argument("segment endpoints must be finite".into()));
        }
        let points = resample(&start, &end, eps_chain, budget)?;
        Ok(Chain { source: ChainSource::Segment { start, end }, eps_chain, points })
    }

    pub fn singleton(x: Point<T>, eps_chain: T) -> Result<Self> {
        Self::segment(x.clone(), x, eps_chain)
    }

    pub fn source(&self) -> &ChainSource<T> {
        &self.source
    }

    pub fn eps_chain(&self) -> T {
        self.eps_chain
    }

    /// Covering-space coordinates.
    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn endpoints(&self) -> (&Point<T>, &Point<T>) {
        match &self.source {
            ChainSource::Segment { start, end } => (start, end),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        let (a, b) = self.endpoints();
        a == b
    }

    pub fn max_gap(&self) -> T {
        self.points.windows(2).map(|w| euclid(&w[0], &w[1])).fold(T::zero(), T::max)
    }

    /// Points reduced to the fundamental domain of `space`.
    pub fn normalized_points(&self, space: &AmbientSpace<T>) -> Vec<Point<T>> {
        self.points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                space.normalize(&mut q);
                q
            })
            .collect()
    }

    /// Diameter in `space`. A segment shorter than half of every period is
    /// embedded isometrically, so its diameter is the endpoint distance; longer
    /// segments fall back to the sampled points.
    pub fn diameter(&self, space: &AmbientSpace<T>) -> T {
        let (a, b) = self.endpoints();
        let half_periods: Vec<Option<T>> = match space.geometric().rule() {
            MetricRule::FlatTorus { periods } => periods.iter().map(|&p| Some(p * T::lit(0.5))).collect(),
            MetricRule::CircleArc { circumference } => vec![Some(*circumference * T::lit(0.5))],
            _ => vec![None; a.len()],
        };
        let short = a.iter().zip(b).zip(&half_periods).all(|((&x, &y), h)| h.is_none_or(|h| (x - y).abs() < h));
        if short && space.collapsed().is_none() {
            return euclid(a, b);
        }
        diameter_of(space, &self.normalized_points(space)).unwrap_or(T::zero())
    }

    /// Shift by a period vector so the start lies in the fundamental domain.
    fn recentered(mut self, space: &AmbientSpace<T>) -> Self {
        let periods: Vec<Option<T>> = match space.geometric().rule() {
            MetricRule::FlatTorus { periods } => periods.iter().map(|&p| Some(p)).collect(),
            MetricRule::CircleArc { circumference } => vec![Some(*circumference)],
            _ => return self,
        };
        let (start, _) = self.endpoints();
        let shift: Vec<T> =
            start.iter().zip(&periods).map(|(&s, p)| p.map_or(T::zero(), |p| (s / p).floor() * p)).collect();
        if shift.iter().all(|&s| s == T::zero()) {
            return self;
        }
        let sub = |p: &mut Point<T>| {
            for (c, &s) in p.iter_mut().zip(&shift) {
                *c = *c - s;
            }
        };
        let ChainSource::Segment { start, end } = &mut self.source;
        sub(start);
        sub(end);
        self.points.iter_mut().for_each(sub);
        self
    }
}

/// `n` evenly spaced points from `a` to `b` with every computed gap at most `eps`.
fn resample<T: Scalar>(a: &[T], b: &[T], eps: T, budget: usize) -> Result<Vec<Point<T>>> {
    if a == b {
        return Ok(vec![a.to_vec()]);
    }
    let len = euclid(a, b);
    let needed = (len / eps).ceil().to_f64().unwrap_or(f64::INFINITY) + 1.0;
    if !(needed <= budget as f64) {
        return Err(Error::RefinementOverflow { needed: needed.min(usize::MAX as f64) as usize, budget });
    }
    let mut n = (needed as usize).max(2);
    loop {
        let cells = T::from_usize(n - 1).expect("point count fits scalar");
        let pts: Vec<Point<T>> = (0..n)
            .map(|k| {
                let s = T::from_usize(k).expect("index fits scalar") / cells;
                a.iter().zip(b).map(|(&x, &y)| x + (y - x) * s).collect()
            })
            .collect();
        // rounding can push a computed gap just over eps
        if pts.windows(2).all(|w| euclid(&w[0], &w[1]) <= eps) {
            return Ok(pts);
        }
        n += 1;
        if n > budget {
            return Err(Error::RefinementOverflow { needed: n, budget });
        }
    }
}

/// Image of a chain under the map, re-sampled from the image of its source curve.
pub fn advance_chain<T: Scalar>(map: &SystemSpec<T>, chain: &Chain<T>) -> Result<Chain<T>> {
    advance_chain_dir(map, chain, true, DEFAULT_POINT_BUDGET)
}

/// Image under the map (`forward`) or its inverse, with a point budget.
pub fn advance_chain_dir<T: Scalar>(
    map: &SystemSpec<T>,
    chain: &Chain<T>,
    forward: bool,
    budget: usize,
) -> Result<Chain<T>> {
    let (a, b) = chain.endpoints();
    let (fa, fb) = (map.lift(a, forward)?, map.lift(b, forward)?);
    Ok(Chain::segment_with_budget(fa, fb, chain.eps_chain, budget)?.recentered(map.space()))
}

/// Check chains for diameter above `delta` within `horizon` iterates in either
/// direction. Refinement failures are recorded per chain.
pub fn check_cw_expansive<T: Scalar>(
    map: &SystemSpec<T>,
    delta: T,
    horizon: u64,
    seeds: &[Chain<T>],
) -> Result<ExpansivityReport<T>> {
    check_run(map, delta, horizon)?;
    let space = map.space();
    for (i, c) in seeds.iter().enumerate() {
        if c.is_degenerate() {
            return Err(Error::Argument(format!("seed chain {i} is a single point")));
        }
        if c.diameter(space) >= delta {
            return Err(Error::OutOfNeighborhood { diameter: c.diameter(space).as_f64(), delta: delta.as_f64() });
        }
    }
    let step = |c: &Chain<T>, fwd: bool| advance_chain_dir(map, c, fwd, DEFAULT_POINT_BUDGET);
    let diam = |c: &Chain<T>| Ok(c.diameter(space));
    let mut report = ExpansivityReport {
        verdict: Verdict::SeparatedAtHorizon,
        delta,
        horizon,
        witness: None,
        first_separation: Vec::with_capacity(seeds.len()),
        errors: Vec::new(),
    };
    let mut counterexample = false;
    for (i, c) in seeds.iter().enumerate() {
        match first_separation(c, delta, horizon, step, diam) {
            Ok(n) => {
                if n.is_none() && report.witness.is_none() {
                    let history = diameter_history(c, horizon, step, diam)?;
                    report.witness = Some(Witness::Chain { chain: c.clone(), history });
                    counterexample = true;
                }
                report.first_separation.push(n);
            }
            Err(e @ Error::RefinementOverflow { .. }) => {
                report.errors.push((i, e.to_string()));
                report.first_separation.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    report.verdict = if counterexample {
        Verdict::Counterexample
    } else if !report.errors.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::SeparatedAtHorizon
    };
    Ok(report)
}
