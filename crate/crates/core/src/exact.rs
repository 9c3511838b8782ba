//! Exact dyadic arithmetic for truncated size-function series.
//!
//! Every `f64` is a dyadic rational, and the series weights are powers of two,
//! so a truncated series can be accumulated without rounding. Comparisons between
//! nested sets then see every reference point, including deep ones whose weight
//! underflows any floating point sum.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exponent offset applied to every accumulated term; covers the subnormal range.
const BASE_SHIFT: u64 = 1100;

/// A dyadic rational `mantissa * 2^-shift`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mantissa: BigInt,
    shift: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mantissa: BigInt::zero(), shift: 0 }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value in exact sum");
        if x == 0.0 {
            return Self::zero();
        }
        let (mant, exp, sign) = num_traits::Float::integer_decode(x);
        let mut m = BigInt::from(mant);
        if sign < 0 {
            m = -m;
        }
        if exp >= 0 {
            Dyadic { mantissa: m << exp as usize, shift: 0 }
        } else {
            Dyadic { mantissa: m, shift: (-exp) as u64 }
        }
    }

    /// Exact value of `x * 2^-k`.
    pub fn scaled(x: f64, k: u64) -> Self {
        let mut d = Self::from_f64(x);
        d.shift += k;
        d
    }

    fn aligned(&self, shift: u64) -> BigInt {
        debug_assert!(shift >= self.shift);
        &self.mantissa << (shift - self.shift) as usize
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.mantissa.is_zero() {
            0
        } else if self.mantissa.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Nearest `f64` (ties resolved by the two-step conversion; exactness is not needed here).
    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        // keep 64 significant bits before converting
        let drop = bits.saturating_sub(64);
        let top = (&self.mantissa >> drop as usize).to_f64().unwrap_or(f64::NAN);
        let mut exp = drop as i64 - self.shift as i64;
        let mut v = top;
        // step through the exponent so intermediates stay normal
        while exp < -1000 && v != 0.0 {
            v *= 2f64.powi(-1000);
            exp += 1000;
        }
        while exp > 1000 && v.is_finite() {
            v *= 2f64.powi(1000);
            exp -= 1000;
        }
        v * 2f64.powi(exp as i32)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let shift = self.shift.max(rhs.shift);
        Dyadic { mantissa: self.aligned(shift) + rhs.aligned(shift), shift }
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let shift = self.shift.max(rhs.shift);
        Dyadic { mantissa: self.aligned(shift) - rhs.aligned(shift), shift }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mantissa: -self.mantissa, shift: self.shift }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let shift = self.shift.max(other.shift);
        self.aligned(shift).cmp(&other.aligned(shift))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Accumulates `sum_i x_i * 2^-i` exactly for `i = 1..=depth`.
#[derive(Clone, Debug)]
pub struct DyadicSeries {
    acc: BigInt,
    shift: u64,
}

impl DyadicSeries {
    pub fn new(depth: usize) -> Self {
        DyadicSeries { acc: BigInt::zero(), shift: BASE_SHIFT + depth as u64 }
    }

    /// Adds `x * 2^-index`.
    pub fn push(&mut self, index: usize, x: f64) {
        assert!(x.is_finite(), "non-finite value in exact sum");
        if x == 0.0 {
            return;
        }
        let (mant, exp, sign) = num_traits::Float::integer_decode(x);
        let total = exp as i64 - index as i64 + self.shift as i64;
        assert!(total >= 0, "term below exact accumulator resolution");
        let mut term = BigInt::from(mant) << total as usize;
        if sign < 0 {
            term = -term;
        }
        self.acc += term;
    }

    pub fn finish(self) -> Dyadic {
        Dyadic { mantissa: self.acc, shift: self.shift }
    }
}
