//! Scalar types accepted by the numeric solvers.
//!
//! Rates and one-step probabilities are always computed exactly as
//! [`Rational`](crate::Rational). The reachability solvers and the interval
//! optimizers are generic so that the same code runs on `f64`, `f32` or on
//! exact rationals (the latter is what the oracle tests use).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// Numeric scalar used for probabilities and reachability values.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_rational(r: &BigRational) -> Self;

    /// Lossy view used for convergence tests and reporting.
    fn to_f64(&self) -> f64;

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// Rounding slack allowed when comparing sums of probabilities.
    fn slack() -> Self {
        Self::zero()
    }

    /// Clamp into the unit interval.
    fn clamp_unit(self) -> Self {
        Self::max_of(Self::zero(), Self::min_of(self, Self::one()))
    }
}

impl Scalar for f64 {
    fn slack() -> Self {
        1e-12
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn slack() -> Self {
        1e-6
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `n/d` as an exact rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
