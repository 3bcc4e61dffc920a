//! Double-word ("double-double") arithmetic with an explicit binary exponent.
//!
//! Matrix entries of weighted composition operators are sums whose terms can
//! exceed the result by many orders of magnitude and whose individual factors
//! (`sqrt(n!)`, `1/n!`) leave the exponent range of `f64` long before the
//! entries themselves do. Terms are therefore carried as an unevaluated sum
//! `hi + lo` (error-free transformations, fma based) times `2^exp`.

use num_complex::Complex;

use crate::scalar::Real;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DWord<T> {
    pub hi: T,
    pub lo: T,
}

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

// named methods rather than operator traits: the error-free steps stay explicit
#[allow(clippy::should_implement_trait)]
impl<T: Real> DWord<T> {
    pub fn new(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    pub fn zero() -> Self {
        Self::new(T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one())
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    pub fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = fast_two_sum(s, e + t);
        let (hi, lo) = fast_two_sum(s, e + f);
        Self { hi, lo }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = fast_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn mul_t(self, x: T) -> Self {
        let (p, e) = two_prod(self.hi, x);
        let (hi, lo) = fast_two_sum(p, e + self.lo * x);
        Self { hi, lo }
    }

    pub fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_t(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_t(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = fast_two_sum(q1, q2);
        Self { hi, lo }.add(Self::new(q3))
    }

    pub fn div_t(self, x: T) -> Self {
        self.div(Self::new(x))
    }

    /// Correctly rounded-to-double-word square root of a non-negative `T`.
    pub fn sqrt_of(x: T) -> Self {
        if x <= T::zero() {
            return Self::zero();
        }
        let s = x.sqrt();
        // x - s^2, exactly representable as a double word
        let (p, e) = two_prod(s, s);
        let r = (x - p) - e;
        let (hi, lo) = fast_two_sum(s, r / (s + s));
        Self { hi, lo }
    }

    pub fn abs(self) -> Self {
        if self.hi < T::zero() {
            self.neg()
        } else {
            self
        }
    }
}

/// Complex number with double-word parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DComplex<T> {
    pub re: DWord<T>,
    pub im: DWord<T>,
}

#[allow(clippy::should_implement_trait)]
impl<T: Real> DComplex<T> {
    pub fn new(re: DWord<T>, im: DWord<T>) -> Self {
        Self { re, im }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(DWord::new(z.re), DWord::new(z.im))
    }

    pub fn real(x: DWord<T>) -> Self {
        Self::new(x, DWord::zero())
    }

    pub fn zero() -> Self {
        Self::real(DWord::zero())
    }

    pub fn one() -> Self {
        Self::real(DWord::one())
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.re.add(o.re), self.im.add(o.im))
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.re.sub(o.re), self.im.sub(o.im))
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(
            self.re.mul(o.re).sub(self.im.mul(o.im)),
            self.re.mul(o.im).add(self.im.mul(o.re)),
        )
    }

    pub fn scale(self, x: DWord<T>) -> Self {
        Self::new(self.re.mul(x), self.im.mul(x))
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, self.im.neg())
    }

    pub fn norm_sqr(self) -> DWord<T> {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }

    pub fn div(self, o: Self) -> Self {
        let den = o.norm_sqr();
        let num = self.mul(o.conj());
        Self::new(num.re.div(den), num.im.div(den))
    }

    pub fn max_abs_hi(self) -> T {
        self.re.hi.abs().max(self.im.hi.abs())
    }

    pub fn is_zero(self) -> bool {
        self.re.hi == T::zero() && self.im.hi == T::zero()
    }
}

/// `value * 2^exp` with `value` kept near unit magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub value: DComplex<T>,
    pub exp: i64,
}

/// Multiplies by `2^e` in steps that stay inside the exponent range of `T`.
pub fn ldexp<T: Real>(mut x: T, mut e: i64) -> T {
    let step = (T::max_exponent_step() / 2).max(1);
    let two = T::one() + T::one();
    while e > step {
        x = x * two.powi(step as i32);
        e -= step;
        if x.is_infinite() || x == T::zero() {
            return x;
        }
    }
    while e < -step {
        x = x * two.powi(-(step as i32));
        e += step;
        if x == T::zero() || x.is_infinite() {
            return x;
        }
    }
    x * two.powi(e as i32)
}

trait ExponentRange {
    fn max_exponent_step() -> i64;
}

impl<T: Real> ExponentRange for T {
    fn max_exponent_step() -> i64 {
        T::max_value().log2().floor().to_i64().unwrap_or(100)
    }
}

#[allow(clippy::should_implement_trait)]
impl<T: Real> Scaled<T> {
    pub fn zero() -> Self {
        Self { value: DComplex::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self { value: DComplex::one(), exp: 0 }
    }

    pub fn from_dcomplex(value: DComplex<T>) -> Self {
        Self { value, exp: 0 }.normalized()
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self::from_dcomplex(DComplex::from_complex(z))
    }

    pub fn from_dword(x: DWord<T>) -> Self {
        Self::from_dcomplex(DComplex::real(x))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn normalized(mut self) -> Self {
        let m = self.value.max_abs_hi();
        if m == T::zero() || !m.is_finite() {
            return self;
        }
        let k = m.log2().floor().to_i64().unwrap_or(0);
        if k != 0 {
            let two = T::one() + T::one();
            let f = DWord::new(two.powi(-(k as i32)));
            self.value = self.value.scale(f);
            self.exp += k;
        }
        self
    }

    pub fn mul(self, o: Self) -> Self {
        Self { value: self.value.mul(o.value), exp: self.exp + o.exp }.normalized()
    }

    pub fn mul_dcomplex(self, z: DComplex<T>) -> Self {
        Self { value: self.value.mul(z), exp: self.exp }.normalized()
    }

    /// Natural log of the magnitude, as a plain float.
    pub fn ln_abs(&self) -> f64 {
        let m = self.value.norm_sqr().value().to_f64().unwrap_or(0.0);
        0.5 * m.ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn to_complex(self) -> Complex<T> {
        let z = self.value.to_complex();
        Complex::new(ldexp(z.re, self.exp), ldexp(z.im, self.exp))
    }

    /// Unscaled double-word value (each limb scaled by `2^exp`).
    pub fn to_dcomplex(self) -> DComplex<T> {
        let limb = |x: DWord<T>| DWord { hi: ldexp(x.hi, self.exp), lo: ldexp(x.lo, self.exp) };
        DComplex::new(limb(self.value.re), limb(self.value.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_is_double_word_accurate() {
        let r = DWord::<f64>::sqrt_of(2.0);
        let sq = r.mul(r);
        let err = sq.sub(DWord::new(2.0)).value().abs();
        assert!(err < 1e-30, "{err}");
    }

    #[test]
    fn division_recovers_third() {
        let third = DWord::new(1.0f64).div_t(3.0);
        let back = third.mul_t(3.0).sub(DWord::one()).value().abs();
        assert!(back < 1e-31);
    }

    #[test]
    fn catastrophic_cancellation_survives() {
        // (1 + 2^-70) - 1 in double words keeps the small part
        let tiny = 2f64.powi(-70);
        let x = DWord::new(1.0f64).add(DWord::new(tiny)).sub(DWord::one());
        assert_eq!(x.value(), tiny);
    }

    #[test]
    fn scaled_product_beyond_exponent_range() {
        let big = Scaled::from_complex(Complex::new(1e300f64, 0.0));
        let small = Scaled::from_complex(Complex::new(1e-300f64, 0.0));
        let p = big.mul(big).mul(small).mul(small);
        let z = p.to_complex();
        assert!((z.re - 1.0).abs() < 1e-14, "{z}");
    }

    #[test]
    fn ldexp_handles_large_shifts() {
        assert_eq!(ldexp(1.0f64, 1000), 2f64.powi(1000));
        assert_eq!(ldexp(2f64.powi(1000), -1000), 1.0);
        assert_eq!(ldexp(1.0f32, -200), 0.0);
    }

    #[test]
    fn complex_division() {
        let a = DComplex::from_complex(Complex::new(1.0f64, 2.0));
        let b = DComplex::from_complex(Complex::new(-3.0f64, 0.5));
        let q = a.div(b).mul(b).to_complex();
        assert!((q - Complex::new(1.0, 2.0)).norm() < 1e-30);
    }
}
