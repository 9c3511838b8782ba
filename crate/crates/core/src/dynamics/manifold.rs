use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metric::{ball_grid, domain_grid, Point, PointSet};
use crate::scalar::Scalar;

use super::neighborhood::NeighborhoodSpec;
use super::orbit::{sample_orbit, Direction, Region, StopRule};
use super::{CatalogId, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSample<T> {
    pub set: PointSet<T>,
    /// Sampled from known eigen-structure rather than classified.
    pub analytic: bool,
    /// Classification found nothing besides the rest point.
    pub empty: bool,
}

/// Real eigenpairs of a 2x2 row-major matrix, or `None` when complex or repeated.
pub(crate) fn eigen2<T: Scalar>(m: &[T]) -> Option<[(T, [T; 2]); 2]> {
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let half = T::lit(0.5);
    let tr = a + d;
    let disc = tr * tr * half * half - (a * d - b * c);
    if !(disc > T::zero()) {
        return None;
    }
    let s = disc.sqrt();
    let pair = |lam: T| -> (T, [T; 2]) {
        let v = if b != T::zero() {
            [b, lam - a]
        } else if c != T::zero() {
            [lam - d, c]
        } else if (lam - a).abs() <= (lam - d).abs() {
            [T::one(), T::zero()]
        } else {
            [T::zero(), T::one()]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        (lam, [v[0] / n, v[1] / n])
    };
    Some([pair(tr * half + s), pair(tr * half - s)])
}

/// Eigen-direction of the requested manifold for catalog saddles (planar flows
/// with one contracting and one expanding direction, hyperbolic toral maps).
pub fn analytic_direction<T: Scalar>(sys: &SystemSpec<T>, which: ManifoldKind) -> Option<[T; 2]> {
    if sys.dim() != 2 || !matches!(sys.id(), CatalogId::PlanarSaddle | CatalogId::CatMap | CatalogId::CustomLinear) {
        return None;
    }
    let pairs = eigen2(&sys.linear_part()?)?;
    let contracting = |lam: T| if sys.is_map() { lam.abs() < T::one() } else { lam < T::zero() };
    let kinds: Vec<bool> = pairs.iter().map(|(l, _)| contracting(*l)).collect();
    if kinds[0] == kinds[1] {
        return None;
    }
    let want_contracting = which == ManifoldKind::Stable;
    pairs.iter().find(|(l, _)| contracting(*l) == want_contracting).map(|(_, v)| *v)
}

/// Sample of `W^s_U(p)` or `W^u_U(p)`. Analytic eigenlines are used when the
/// catalog knows them; otherwise grid points of `B_r(p)` inside `region` are
/// classified by convergence to `p` (forward for stable, backward for unstable)
/// without leaving `region` within `horizon`. Always contains `p`.
pub fn invariant_manifold_sample<T: Scalar>(
    sys: &SystemSpec<T>,
    nbhd: &NeighborhoodSpec<T>,
    region: Region<'_, T>,
    which: ManifoldKind,
    spacing: T,
    horizon: T,
) -> Result<ManifoldSample<T>> {
    let p = &nbhd.center;
    let space = sys.space();
    space.check(p)?;
    let on_rest_point = sys.rest_point().is_some_and(|q| space.dist(&q, p) == T::zero());
    let mut points: Vec<Point<T>> = vec![p.clone()];

    if let Some(dir) = analytic_direction(sys, which).filter(|_| on_rest_point) {
        let n = (nbhd.r / spacing).floor().to_i64().unwrap_or(0);
        for k in -n..=n {
            if k == 0 {
                continue;
            }
            let s = spacing * T::from_i64(k).expect("grid index fits scalar");
            let mut x = vec![p[0] + s * dir[0], p[1] + s * dir[1]];
            space.normalize(&mut x);
            if space.contains(&x) && nbhd.in_ball(sys, &x) && region(&x) {
                points.push(x);
            }
        }
        return Ok(ManifoldSample { set: PointSet::new(points, spacing)?, analytic: true, empty: false });
    }

    let direction = match which {
        ManifoldKind::Stable => Direction::Forward,
        ManifoldKind::Unstable => Direction::Backward,
    };
    let eps = spacing * T::lit(0.5);
    // a ball around the collapsed class is not a coordinate ball; scan the domain
    let candidates = if space.collapsed().is_some() {
        domain_grid(space, spacing)?.into_iter().filter(|x| space.dist(x, p) < nbhd.r).collect()
    } else {
        ball_grid(space, p, nbhd.r, spacing)?
    };
    for x in candidates {
        if space.dist(&x, p) == T::zero() || !region(&x) {
            continue;
        }
        let stop = StopRule { region: Some(region), target: Some((p.as_slice(), eps)) };
        if sample_orbit(sys, &x, direction, horizon, stop)?.reached {
            points.push(x);
        }
    }
    let empty = points.len() == 1;
    Ok(ManifoldSample { set: PointSet::new(points, spacing)?, analytic: false, empty })
}
