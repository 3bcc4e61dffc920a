//! Scalar abstractions.
//!
//! Two layers: [`Field`] is what the symbol predicates need (ring operations,
//! ordering, negation) and is implemented for floats and for rationals, which
//! gives an exact decision procedure for boundary cases such as `|B| = |D|`.
//! [`Real`] adds the transcendental functions needed for everything numeric.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Rational64};
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive, Zero};

/// Exact rational scalar used for discriminative predicate tests.
pub type Rational = BigRational;

/// Scalars over which symbol predicates are decided.
///
/// For floats, comparisons take a tolerance; passing `zero()` as the tolerance
/// makes them exact, which is meaningful for rationals.
pub trait Field: Clone + PartialOrd + Num + Neg<Output = Self> + Debug + Send + Sync + 'static {
    /// Checks `|c|^2 e^{|b|^2} = 1` within `tol`.
    ///
    /// For rationals this can only hold with `b = 0`, since `e^q` is irrational
    /// for every non-zero rational `q`.
    fn unit_gaussian_weight(c_norm_sqr: &Self, b_norm_sqr: &Self, tol: &Self) -> bool;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64;
}

/// Floating-point scalars for all numerical work (`f32`, `f64`).
pub trait Real:
    Field
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Display
    + LowerExp
    + Sum
    + Copy
{
    /// Converts a small integer or literal, panicking only if `T` cannot hold it.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

macro_rules! impl_float_field {
    ($t:ty) => {
        impl Field for $t {
            fn unit_gaussian_weight(c_norm_sqr: &Self, b_norm_sqr: &Self, tol: &Self) -> bool {
                // compare in log space so large |b| does not overflow
                if *c_norm_sqr <= 0.0 {
                    return false;
                }
                (c_norm_sqr.ln() + b_norm_sqr).abs() <= *tol
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }

        impl Real for $t {}
    };
}

impl_float_field!(f32);
impl_float_field!(f64);

impl Field for BigRational {
    fn unit_gaussian_weight(c_norm_sqr: &Self, b_norm_sqr: &Self, tol: &Self) -> bool {
        b_norm_sqr.is_zero() && abs_field(&(c_norm_sqr.clone() - Self::from_integer(BigInt::from(1)))) <= *tol
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Field for Rational64 {
    fn unit_gaussian_weight(c_norm_sqr: &Self, b_norm_sqr: &Self, tol: &Self) -> bool {
        b_norm_sqr.is_zero() && abs_field(&(*c_norm_sqr - Self::from_integer(1))) <= *tol
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// `|x|` using only the `Field` operations.
pub fn abs_field<T: Field>(x: &T) -> T {
    if *x < T::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}

/// `|z|^2 <= tol^2`; exact when `tol` is zero.
pub fn complex_near_zero<T: Field>(z: &Complex<T>, tol: &T) -> bool {
    z.norm_sqr() <= tol.clone() * tol.clone()
}

/// Builds a rational complex number from integer numerator pairs over a common denominator.
pub fn rational_complex(re: i64, im: i64, den: i64) -> Complex<Rational> {
    Complex::new(
        BigRational::new(BigInt::from(re), BigInt::from(den)),
        BigRational::new(BigInt::from(im), BigInt::from(den)),
    )
}

/// Converts a complex number between float scalar types.
pub fn cast_complex<S: Real, T: Real>(z: Complex<S>) -> Complex<T> {
    Complex::new(
        T::from(z.re).unwrap_or_else(T::nan),
        T::from(z.im).unwrap_or_else(T::nan),
    )
}
