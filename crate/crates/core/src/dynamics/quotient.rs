use crate::error::{Error, Result};
use crate::metric::{AmbientSpace, PointSet};
use crate::scalar::Scalar;

use super::SystemSpec;

/// `min{d(x, y), d(x, L) + d(y, L)}`: the metric of the base space with the sampled
/// set `L` collapsed to one point.
pub fn quotient_distance<T: Scalar>(base: &AmbientSpace<T>, lambda: &[Vec<T>], x: &[T], y: &[T]) -> Result<T> {
    if lambda.is_empty() {
        return Err(Error::Argument("collapsed set is empty".into()));
    }
    base.check(x)?;
    base.check(y)?;
    let direct = base.dist(x, y);
    Ok(direct.min(base.dist_to_set(x, lambda) + base.dist_to_set(y, lambda)))
}

/// The system's flow or map acting on the space with `lambda` collapsed. The
/// collapsed class is represented by any of its sample points.
pub fn quotient_system<T: Scalar>(sys: &SystemSpec<T>, lambda: &PointSet<T>) -> Result<SystemSpec<T>> {
    let space = AmbientSpace::quotient(sys.space().geometric().clone(), lambda.clone())?;
    sys.clone().with_space(space)
}
