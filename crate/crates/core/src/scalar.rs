use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the geometry and dynamics are written against: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Reduce `x` into `[0, period)`.
#[inline]
pub(crate) fn wrap<T: Scalar>(x: T, period: T) -> T {
    let r = x - (x / period).floor() * period;
    // floor can leave r == period after rounding
    if r >= period || r < T::zero() {
        T::zero()
    } else {
        r
    }
}
