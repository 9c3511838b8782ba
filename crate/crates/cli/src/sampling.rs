use lyapsize::metric::{AmbientSpace, MetricRule, Point};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const MAX_TRIES_PER_POINT: usize = 10_000;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coordinate ranges of the fundamental domain.
pub(crate) fn bounds(space: &AmbientSpace<f64>) -> Vec<(f64, f64)> {
    match space.geometric().rule() {
        MetricRule::EuclideanBox { lower, upper } => lower.iter().copied().zip(upper.iter().copied()).collect(),
        MetricRule::FlatTorus { periods } => periods.iter().map(|&p| (0.0, p)).collect(),
        MetricRule::CircleArc { circumference } => vec![(0.0, *circumference)],
        MetricRule::QuotientCollapse { .. } => unreachable!("geometric() strips quotients"),
    }
}

/// Rejection sampling of `count` points of the domain satisfying `keep`.
pub(crate) fn points_where(
    rng: &mut ChaCha8Rng,
    space: &AmbientSpace<f64>,
    count: usize,
    keep: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Point<f64>>, CliError> {
    let b = bounds(space);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        if tries == MAX_TRIES_PER_POINT * count.max(1) {
            return Err(CliError::Config(format!(
                "could not draw {count} random starts in the requested region; give `sampling.starts` instead"
            )));
        }
        tries += 1;
        let x: Point<f64> = b.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        if space.contains(&x) && keep(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Vector of length uniform in `[lo, hi]` and uniformly random direction.
pub(crate) fn offset(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    let len = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c * len / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_have_requested_length() {
        let mut r = rng(3);
        for _ in 0..100 {
            let v = offset(&mut r, 2, 1e-3, 1e-2);
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((1e-3 - 1e-15..=1e-2 + 1e-15).contains(&n));
        }
    }

    #[test]
    fn same_seed_same_points() {
        let s = AmbientSpace::flat_torus(vec![1.0, 1.0]).unwrap();
        let a = points_where(&mut rng(9), &s, 5, |_| true).unwrap();
        let b = points_where(&mut rng(9), &s, 5, |_| true).unwrap();
        assert_eq!(a, b);
    }
}
