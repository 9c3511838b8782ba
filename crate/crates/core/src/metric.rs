//! Ambient compact metric spaces, finite point sets and the dyadic dense sequence.

use std::collections::VecDeque;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::scalar::{wrap, Scalar};

pub type Point<T> = Vec<T>;

/// How distances are measured in an [`AmbientSpace`].
#[derive(Clone, Debug, PartialEq)]
pub enum MetricRule<T> {
    EuclideanBox { lower: Vec<T>, upper: Vec<T> },
    /// Product of circles of the given periods, per-axis minimum image.
    FlatTorus { periods: Vec<T> },
    /// One-dimensional circle parameterized by arc length in `[0, circumference)`.
    CircleArc { circumference: T },
    /// `base` with the finite set `collapsed` identified to a single point.
    QuotientCollapse { base: Box<AmbientSpace<T>>, collapsed: PointSet<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbientSpace<T> {
    dim: usize,
    rule: MetricRule<T>,
    diameter_upper: T,
}

impl<T: Scalar> AmbientSpace<T> {
    pub fn euclidean_box(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Argument("box bounds must be nonempty and of equal length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Argument("box needs lower < upper on every axis".into()));
        }
        let diameter_upper = lower
            .iter()
            .zip(&upper)
            .fold(T::zero(), |acc, (&l, &u)| acc + (u - l) * (u - l))
            .sqrt();
        Ok(AmbientSpace { dim: lower.len(), rule: MetricRule::EuclideanBox { lower, upper }, diameter_upper })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn centered_box(dim: usize, half_width: T) -> Result<Self> {
        Self::euclidean_box(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn flat_torus(periods: Vec<T>) -> Result<Self> {
        if periods.is_empty() || periods.iter().any(|&p| !(p > T::zero())) {
            return Err(Error::Argument("torus periods must be positive".into()));
        }
        let half = T::lit(0.5);
        let diameter_upper = periods.iter().fold(T::zero(), |acc, &p| acc + (p * half) * (p * half)).sqrt();
        Ok(AmbientSpace { dim: periods.len(), rule: MetricRule::FlatTorus { periods }, diameter_upper })
    }

    pub fn circle(circumference: T) -> Result<Self> {
        if !(circumference > T::zero()) {
            return Err(Error::Argument("circumference must be positive".into()));
        }
        Ok(AmbientSpace {
            dim: 1,
            rule: MetricRule::CircleArc { circumference },
            diameter_upper: circumference * T::lit(0.5),
        })
    }

    /// Collapse the sampled set `collapsed` of `base` to a point.
    pub fn quotient(base: AmbientSpace<T>, collapsed: PointSet<T>) -> Result<Self> {
        if collapsed.dim() != base.dim {
            return Err(Error::Argument("collapsed set dimension differs from base space".into()));
        }
        for p in collapsed.points() {
            base.check(p)?;
        }
        Ok(AmbientSpace {
            dim: base.dim,
            diameter_upper: base.diameter_upper,
            rule: MetricRule::QuotientCollapse { base: Box::new(base), collapsed },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rule(&self) -> &MetricRule<T> {
        &self.rule
    }

    pub fn diameter_upper(&self) -> T {
        self.diameter_upper
    }

    /// The space whose geometry carries coordinates (the base of a quotient).
    pub fn geometric(&self) -> &AmbientSpace<T> {
        match &self.rule {
            MetricRule::QuotientCollapse { base, .. } => base.geometric(),
            _ => self,
        }
    }

    /// The collapsed set, if this is a quotient space.
    pub fn collapsed(&self) -> Option<&PointSet<T>> {
        match &self.rule {
            MetricRule::QuotientCollapse { collapsed, .. } => Some(collapsed),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        if x.len() != self.dim || x.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match &self.rule {
            MetricRule::EuclideanBox { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(&c, (&l, &u))| l <= c && c <= u)
            }
            MetricRule::FlatTorus { periods } => x.iter().zip(periods).all(|(&c, &p)| T::zero() <= c && c <= p),
            MetricRule::CircleArc { circumference } => T::zero() <= x[0] && x[0] <= *circumference,
            MetricRule::QuotientCollapse { base, .. } => base.contains(x),
        }
    }

    pub fn check(&self, x: &[T]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{x:?}")))
        }
    }

    /// Bring a point of the covering space back into the fundamental domain
    /// (identity for boxes).
    pub fn normalize(&self, x: &mut [T]) {
        match &self.rule {
            MetricRule::FlatTorus { periods } => {
                for (c, &p) in x.iter_mut().zip(periods) {
                    *c = wrap(*c, p);
                }
            }
            MetricRule::CircleArc { circumference } => x[0] = wrap(x[0], *circumference),
            MetricRule::QuotientCollapse { base, .. } => base.normalize(x),
            MetricRule::EuclideanBox { .. } => {}
        }
    }

    /// Distance with domain checks on both points.
    pub fn distance(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.dist(x, y))
    }

    /// Distance without domain checks; the caller guarantees both points are valid.
    pub fn dist(&self, x: &[T], y: &[T]) -> T {
        match &self.rule {
            MetricRule::EuclideanBox { .. } => euclid(x, y),
            MetricRule::FlatTorus { periods } => x
                .iter()
                .zip(y)
                .zip(periods)
                .fold(T::zero(), |acc, ((&a, &b), &p)| {
                    let d = periodic_gap(a, b, p);
                    acc + d * d
                })
                .sqrt(),
            MetricRule::CircleArc { circumference } => periodic_gap(x[0], y[0], *circumference),
            MetricRule::QuotientCollapse { base, collapsed } => {
                let direct = base.dist(x, y);
                let via = base.dist_to_set(x, collapsed.points()) + base.dist_to_set(y, collapsed.points());
                direct.min(via)
            }
        }
    }

    /// `min_{a in set} dist(x, a)`; `+inf` for an empty slice.
    pub fn dist_to_set(&self, x: &[T], set: &[Point<T>]) -> T {
        set.iter().map(|a| self.dist(x, a)).fold(T::infinity(), T::min)
    }
}

#[inline]
fn euclid<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b)).sqrt()
}

#[inline]
fn periodic_gap<T: Scalar>(a: T, b: T, period: T) -> T {
    let d = wrap((a - b).abs(), period);
    d.min(period - d)
}

/// Finite sample of a compact set: every point of the intended set lies within
/// `mesh` of some listed point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T> {
    points: Vec<Point<T>>,
    mesh: T,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(points: Vec<Point<T>>, mesh: T) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Argument("point set must be nonempty".into()));
        };
        let dim = first.len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::Argument("points must share a positive dimension".into()));
        }
        if !(mesh >= T::zero()) {
            return Err(Error::Argument("mesh must be nonnegative".into()));
        }
        Ok(PointSet { points, mesh })
    }

    pub fn singleton(p: Point<T>) -> Self {
        assert!(!p.is_empty(), "zero-dimensional point");
        PointSet { points: vec![p], mesh: T::zero() }
    }

    /// Validates every point against `space`.
    pub fn in_space(points: Vec<Point<T>>, mesh: T, space: &AmbientSpace<T>) -> Result<Self> {
        let set = Self::new(points, mesh)?;
        for p in &set.points {
            space.check(p)?;
        }
        Ok(set)
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point<T>> {
        self.points
    }

    pub fn mesh(&self) -> T {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_point(&self, x: &[T]) -> bool {
        self.points.iter().any(|p| p.as_slice() == x)
    }

    /// Union of the listed points; mesh is the larger of the two.
    pub fn union(&self, other: &PointSet<T>) -> PointSet<T> {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        PointSet { points, mesh: self.mesh.max(other.mesh) }
    }

    pub fn with_mesh(mut self, mesh: T) -> Self {
        self.mesh = mesh;
        self
    }
}

/// Largest pairwise distance. Errors on an empty slice.
pub fn diameter_of<T: Scalar>(space: &AmbientSpace<T>, points: &[Point<T>]) -> Result<T> {
    if points.is_empty() {
        return Err(Error::Argument("diameter of an empty set".into()));
    }
    let mut best = T::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(space.dist(a, b));
        }
    }
    Ok(best)
}

pub fn diameter<T: Scalar>(space: &AmbientSpace<T>, set: &PointSet<T>) -> T {
    diameter_of(space, set.points()).expect("point sets are nonempty")
}

/// Points of `set` reachable from `x` by hops of length at most `link_radius`.
pub fn connected_component<T: Scalar>(
    space: &AmbientSpace<T>,
    set: &PointSet<T>,
    x: &[T],
    link_radius: T,
) -> Result<PointSet<T>> {
    if !(link_radius > T::zero()) {
        return Err(Error::Argument("link radius must be positive".into()));
    }
    let pts = set.points();
    let start = pts
        .iter()
        .position(|p| p.as_slice() == x)
        .ok_or_else(|| Error::Argument(format!("{x:?} is not a point of the set")))?;
    let mut seen = vec![false; pts.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for (j, q) in pts.iter().enumerate() {
            if !seen[j] && space.dist(&pts[i], q) <= link_radius {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    let points = pts.iter().zip(&seen).filter(|(_, &s)| s).map(|(p, _)| p.clone()).collect();
    PointSet::new(points, set.mesh())
}

/// Default link radius for a sampled set: twice its mesh.
pub fn default_link_radius<T: Scalar>(set: &PointSet<T>) -> T {
    set.mesh() * T::lit(2.0)
}

#[derive(Clone, Debug)]
struct Axis<T> {
    lower: T,
    width: T,
    periodic: bool,
}

/// Deterministic dense sequence: dyadic grids of the domain, level by level,
/// lexicographic within a level, points of coarser levels skipped.
#[derive(Debug)]
pub struct DenseSequence<T> {
    axes: Vec<Axis<T>>,
    diameter_upper: T,
    cache: RwLock<(Vec<Point<T>>, u32)>,
}

impl<T: Scalar> Clone for DenseSequence<T> {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("dense sequence cache poisoned").clone();
        DenseSequence { axes: self.axes.clone(), diameter_upper: self.diameter_upper, cache: RwLock::new(cache) }
    }
}

impl<T: Scalar> DenseSequence<T> {
    pub fn new(space: &AmbientSpace<T>) -> Self {
        let geo = space.geometric();
        let axes = match geo.rule() {
            MetricRule::EuclideanBox { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| Axis { lower: l, width: u - l, periodic: false })
                .collect(),
            MetricRule::FlatTorus { periods } => {
                periods.iter().map(|&p| Axis { lower: T::zero(), width: p, periodic: true }).collect()
            }
            MetricRule::CircleArc { circumference } => {
                vec![Axis { lower: T::zero(), width: *circumference, periodic: true }]
            }
            MetricRule::QuotientCollapse { .. } => unreachable!("geometric() strips quotients"),
        };
        DenseSequence { axes, diameter_upper: space.diameter_upper(), cache: RwLock::new((Vec::new(), 0)) }
    }

    fn per_axis(&self, level: u32, axis: &Axis<T>) -> usize {
        let n = 1usize << level;
        if axis.periodic {
            n
        } else {
            n + 1
        }
    }

    /// Number of points through the end of dyadic level `level`.
    pub fn level_end(&self, level: u32) -> usize {
        self.axes.iter().map(|a| self.per_axis(level, a)).product()
    }

    fn push_level(&self, level: u32, out: &mut Vec<Point<T>>) {
        let counts: Vec<usize> = self.axes.iter().map(|a| self.per_axis(level, a)).collect();
        let denom = T::from_usize(1usize << level).expect("level fits scalar");
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            if level == 0 || idx.iter().any(|j| j % 2 == 1) {
                let p = idx
                    .iter()
                    .zip(&self.axes)
                    .map(|(&j, a)| a.lower + a.width * T::from_usize(j).expect("index fits scalar") / denom)
                    .collect();
                out.push(p);
            }
            // lexicographic increment, first axis most significant
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn ensure(&self, n: usize) {
        if self.cache.read().expect("dense sequence cache poisoned").0.len() >= n {
            return;
        }
        let mut guard = self.cache.write().expect("dense sequence cache poisoned");
        while guard.0.len() < n {
            let level = guard.1;
            let (points, next) = &mut *guard;
            self.push_level(level, points);
            *next += 1;
        }
    }

    /// The `i`-th point, 1-based.
    pub fn point(&self, i: usize) -> Point<T> {
        assert!(i >= 1, "dense sequence is 1-based");
        self.ensure(i);
        self.cache.read().expect("dense sequence cache poisoned").0[i - 1].clone()
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Vec<Point<T>> {
        self.ensure(n);
        self.cache.read().expect("dense sequence cache poisoned").0[..n].to_vec()
    }

    /// A covering radius of the first `n` points: `diameter_upper / 2^k` for the
    /// deepest level `k` fully enumerated.
    pub fn density(&self, n: usize) -> T {
        let mut density = self.diameter_upper;
        let mut level = 0;
        while self.level_end(level) <= n {
            density = self.diameter_upper / T::from_usize(1usize << level).expect("level fits scalar");
            level += 1;
            if level > 60 {
                break;
            }
        }
        density
    }
}

/// Regular grid over the fundamental domain with the given spacing (per axis
/// counts rounded up so the grid reaches the far side of closed axes).
pub fn domain_grid<T: Scalar>(space: &AmbientSpace<T>, spacing: T) -> Result<Vec<Point<T>>> {
    if !(spacing > T::zero()) {
        return Err(Error::Argument("grid spacing must be positive".into()));
    }
    let geo = space.geometric();
    let axes: Vec<(T, T, bool)> = match geo.rule() {
        MetricRule::EuclideanBox { lower, upper } => lower.iter().zip(upper).map(|(&l, &u)| (l, u - l, false)).collect(),
        MetricRule::FlatTorus { periods } => periods.iter().map(|&p| (T::zero(), p, true)).collect(),
        MetricRule::CircleArc { circumference } => vec![(T::zero(), *circumference, true)],
        MetricRule::QuotientCollapse { .. } => unreachable!("geometric() strips quotients"),
    };
    let counts: Vec<usize> = axes
        .iter()
        .map(|&(_, w, periodic)| {
            let n = (w / spacing).ceil().to_usize().unwrap_or(1).max(1);
            if periodic {
                n
            } else {
                n + 1
            }
        })
        .collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let p = idx
            .iter()
            .zip(&axes)
            .zip(&counts)
            .map(|((&j, &(l, w, periodic)), &n)| {
                let cells = if periodic { n } else { n - 1 };
                l + w * T::from_usize(j).unwrap() / T::from_usize(cells.max(1)).unwrap()
            })
            .collect();
        out.push(p);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// Grid points of spacing `spacing` inside the open ball `B_radius(center)`,
/// reduced to the fundamental domain.
pub fn ball_grid<T: Scalar>(space: &AmbientSpace<T>, center: &[T], radius: T, spacing: T) -> Result<Vec<Point<T>>> {
    if !(spacing > T::zero()) || !(radius > T::zero()) {
        return Err(Error::Argument("ball grid needs positive radius and spacing".into()));
    }
    let n = (radius / spacing).floor().to_i64().unwrap_or(0);
    let d = center.len();
    let side = (2 * n + 1) as usize;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    for _ in 0..side.pow(d as u32) {
        let mut p: Vec<T> = idx
            .iter()
            .zip(center)
            .map(|(&j, &c)| c + spacing * T::from_i64(j as i64 - n).unwrap())
            .collect();
        space.normalize(&mut p);
        if space.contains(&p) && space.dist(&p, center) < radius {
            out.push(p);
        }
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < side {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// Parse a headerless CSV of points, one per row.
pub fn points_from_csv<T: Scalar>(text: &str) -> Result<Vec<Point<T>>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .and_then(T::from_f64)
                    .ok_or_else(|| Error::Argument(format!("line {}: bad number {f:?}", line_no + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = out.first() {
            let first: &Vec<T> = first;
            if first.len() != row.len() {
                return Err(Error::Argument(format!("line {}: expected {} columns", line_no + 1, first.len())));
            }
        }
        out.push(row);
    }
    Ok(out)
}

pub fn points_to_csv<T: Scalar>(points: &[Point<T>]) -> String {
    let mut s = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
