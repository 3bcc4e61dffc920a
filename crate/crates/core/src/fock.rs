//! Truncated model of the Fock space F².
//!
//! Vectors are coefficient lists over the orthonormal basis
//! `e_n(z) = z^n / sqrt(n!)`. Coefficient recurrences use ratio updates
//! (`x / sqrt(n+1)`), never raw factorials.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dword::ldexp;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default truncation used by the harness.
pub const DEFAULT_TRUNC: usize = 64;

/// Finite coefficient vector, `coeffs[n] = <f, e_n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![Complex::new(T::zero(), T::zero()); n] }
    }

    /// The basis vector `e_k` inside a truncation of length `n` (`n > k`).
    pub fn basis(k: usize, n: usize) -> Self {
        let mut v = Self::zeros(n.max(k + 1));
        v.coeffs[k] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Sum of two vectors, padding the shorter with zeros.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.trunc().max(other.trunc());
        let zero = Complex::new(T::zero(), T::zero());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero)
                        + other.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    /// Copy truncated or zero-padded to length `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(n, Complex::new(T::zero(), T::zero()));
        Self::new(c)
    }

    /// Index of the last non-zero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.re != T::zero() || c.im != T::zero())
    }
}

/// Point and derivative order of a reproducing kernel `K_z^{[m]}(u) = u^m e^{conj(z) u}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub z: Complex<T>,
    pub m: usize,
}

impl<T: Real> KernelSpec<T> {
    pub fn plain(z: Complex<T>) -> Self {
        Self { z, m: 0 }
    }

    pub fn derivative(z: Complex<T>, m: usize) -> Self {
        Self { z, m }
    }
}

/// `sum_n f_n conj(g_n)` over the common prefix.
pub fn inner_product<T: Real>(f: &FockVector<T>, g: &FockVector<T>) -> Complex<T> {
    f.coeffs
        .iter()
        .zip(&g.coeffs)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj())
}

/// Coefficients of the truncated kernel `K_z^{[m]}`.
///
/// `coeffs[n] = sqrt(n!)/(n-m)! conj(z)^{n-m}` for `n >= m`, zero below.
pub fn kernel_vector<T: Real>(spec: KernelSpec<T>, n: usize) -> Result<FockVector<T>> {
    let m = spec.m;
    if n <= m {
        return Err(Error::InvalidTruncation(format!(
            "kernel of order {m} needs truncation > {m}, got {n}"
        )));
    }
    let zbar = spec.z.conj();
    let mut out = FockVector::zeros(n);
    // sqrt(m!) by ratio steps
    let mut c = Complex::new(T::one(), T::zero());
    for k in 1..=m {
        c = c * T::from_usize(k).unwrap().sqrt();
    }
    for idx in m..n {
        out.coeffs[idx] = c;
        // coefficient(idx+1) / coefficient(idx) = conj(z) sqrt(idx+1) / (idx+1-m);
        // for m = 0 the same steps as `evaluate`, so <f, K_z> = f(z) bit for bit
        let root = T::from_usize(idx + 1).unwrap().sqrt();
        c = if m == 0 { c * zbar / root } else { c * zbar * (root / T::from_usize(idx + 1 - m).unwrap()) };
    }
    Ok(out)
}

/// `f(z) = sum_n coeffs[n] z^n / sqrt(n!)`.
///
/// The monomial weights `z^n/sqrt(n!)` peak near `n = |z|^2` at roughly
/// `e^{|z|^2/2}`; accumulation carries a binary exponent so intermediate
/// weights never overflow. The result itself may still be infinite.
pub fn evaluate<T: Real>(f: &FockVector<T>, z: Complex<T>) -> Complex<T> {
    let two = T::one() + T::one();
    let rescale_at = two.powi(T::max_exponent_half());
    let down = two.powi(-T::max_exponent_half());
    let mut exp: i64 = 0;
    let mut weight = Complex::new(T::one(), T::zero());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (n, c) in f.coeffs.iter().enumerate() {
        acc = acc + c * weight;
        weight = weight * z / T::from_usize(n + 1).unwrap().sqrt();
        if weight.norm() > rescale_at {
            weight = weight * down;
            acc = acc * down;
            exp += T::max_exponent_half() as i64;
        }
    }
    Complex::new(ldexp(acc.re, exp), ldexp(acc.im, exp))
}

trait HalfExponent {
    fn max_exponent_half() -> i32;
}

impl<T: Real> HalfExponent for T {
    fn max_exponent_half() -> i32 {
        (T::max_value().log2().floor().to_i32().unwrap_or(200)) / 2
    }
}

/// `||e^{beta z}|| = e^{|beta|^2/2}`, since `e^{beta z} = K_{conj(beta)}`.
pub fn exp_norm<T: Real>(beta: Complex<T>) -> T {
    (beta.norm_sqr() / (T::one() + T::one())).exp()
}

/// Tail `sum_{n >= N} |z|^{2n}/n!` of the kernel norm series, used to bound
/// the truncation error of `||K_z||^2`.
pub fn kernel_tail<T: Real>(z: Complex<T>, n: usize) -> T {
    let r2 = z.norm_sqr();
    let mut term = T::one();
    for k in 1..=n {
        term = term * r2 / T::from_usize(k).unwrap();
    }
    let mut tail = T::zero();
    let mut k = n;
    loop {
        tail = tail + term;
        k += 1;
        term = term * r2 / T::from_usize(k).unwrap();
        if term <= tail * T::epsilon() || k > n + 10_000 {
            break;
        }
    }
    tail
}

/// Polynomial coefficients in the monomial basis `z^n` converted to the
/// orthonormal basis (`c_n sqrt(n!)`).
pub fn from_monomials<T: Real>(monomial: &[Complex<T>]) -> FockVector<T> {
    let mut s = T::one();
    let mut out = Vec::with_capacity(monomial.len());
    for (n, c) in monomial.iter().enumerate() {
        if n > 0 {
            s = s * T::from_usize(n).unwrap().sqrt();
        }
        out.push(c * s);
    }
    FockVector::new(out)
}

/// JSON form `{"trunc": N, "coeffs": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FockVectorJson<T> {
    pub trunc: usize,
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> From<&FockVector<T>> for FockVectorJson<T> {
    fn from(v: &FockVector<T>) -> Self {
        Self { trunc: v.trunc(), coeffs: v.coeffs.clone() }
    }
}

impl<T: Real> TryFrom<FockVectorJson<T>> for FockVector<T> {
    type Error = Error;

    fn try_from(j: FockVectorJson<T>) -> Result<Self> {
        if j.trunc != j.coeffs.len() {
            return Err(Error::Format(format!(
                "trunc {} does not match {} coefficients",
                j.trunc,
                j.coeffs.len()
            )));
        }
        Ok(FockVector::new(j.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn orthonormal_basis() {
        let e2 = FockVector::<f64>::basis(2, 5);
        let e1 = FockVector::<f64>::basis(1, 5);
        let e3 = FockVector::<f64>::basis(3, 5);
        assert_eq!(inner_product(&e2, &e2), c(1.0, 0.0));
        assert_eq!(inner_product(&e1, &e3), c(0.0, 0.0));
    }

    #[test]
    fn kernel_norm_at_one() {
        let k = kernel_vector(KernelSpec::plain(c(1.0, 0.0)), 40).unwrap();
        let ip = inner_product(&k, &k);
        assert!((ip.re - E).abs() < 1e-12);
        assert!(ip.im.abs() < 1e-15);
    }

    #[test]
    fn kernel_vector_examples() {
        let k0 = kernel_vector(KernelSpec::plain(c(0.0, 0.0)), 4).unwrap();
        assert_eq!(k0.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let k1 = kernel_vector(KernelSpec::plain(c(1.0, 0.0)), 4).unwrap();
        let expect = [1.0, 1.0, 1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()];
        for (a, b) in k1.coeffs().iter().zip(expect) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }

        let d = kernel_vector(KernelSpec::derivative(c(0.0, 0.0), 1), 4).unwrap();
        assert_eq!(d.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn kernel_vector_rejects_short_truncation() {
        let err = kernel_vector(KernelSpec::derivative(c(1.0, 0.0), 3), 3).unwrap_err();
        assert!(matches!(err, Error::InvalidTruncation(_)));
    }

    #[test]
    fn kernel_uses_conjugate_point() {
        let z = c(0.3, 0.7);
        let k = kernel_vector(KernelSpec::plain(z), 3).unwrap();
        assert!((k.coeffs()[1] - z.conj()).norm() < 1e-15);
    }

    #[test]
    fn derivative_kernel_reproduces_derivative() {
        // <f, K_z^{[2]}> = f''(z) for f = e_3 = z^3/sqrt(6): f'' = 6z/sqrt(6)
        let z = c(0.4, -1.1);
        let f = FockVector::<f64>::basis(3, 8);
        let k = kernel_vector(KernelSpec::derivative(z, 2), 8).unwrap();
        let got = inner_product(&f, &k);
        let want = z * 6.0 / 6f64.sqrt();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn evaluate_examples() {
        let e0 = FockVector::<f64>::basis(0, 3);
        assert_eq!(evaluate(&e0, c(5.0, -2.0)), c(1.0, 0.0));

        let k1 = kernel_vector(KernelSpec::plain(c(1.0, 0.0)), 40).unwrap();
        assert!((evaluate(&k1, c(1.0, 0.0)).re - E).abs() < 1e-12);

        let e2 = FockVector::<f64>::basis(2, 3);
        assert!((evaluate(&e2, c(2.0, 0.0)).re - 4.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn evaluate_far_from_origin_does_not_overflow_weights() {
        // e_0 only: the huge weights multiply zero coefficients
        let mut f = FockVector::<f64>::zeros(2000);
        f.coeffs_mut()[0] = c(1.0, 0.0);
        let v = evaluate(&f, c(35.0, 0.0));
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn reproducing_property_is_exact() {
        let f = FockVector::new(vec![c(0.5, -1.0), c(2.0, 0.25), c(-0.75, 0.0), c(0.0, 1.5)]);
        let z = c(0.6, 0.2);
        let k = kernel_vector(KernelSpec::plain(z), 4).unwrap();
        let lhs = inner_product(&f, &k);
        let rhs = evaluate(&f, z);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn exp_norm_examples() {
        assert_eq!(exp_norm(c(0.0, 0.0)), 1.0);
        assert!((exp_norm(c(2.0, 0.0)) - E * E).abs() < 1e-13);
        assert!((exp_norm(c(0.0, 1.0)) - E.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernel_norm_within_tail_bound() {
        for (z, n) in [(c(2.0, 1.0), 30usize), (c(0.5, 0.5), 10), (c(3.0, 0.0), 64)] {
            let k = kernel_vector(KernelSpec::plain(z), n).unwrap();
            let got = inner_product(&k, &k).re;
            let exact = z.norm_sqr().exp();
            let tail = kernel_tail(z, n);
            assert!((exact - got - tail).abs() <= 1e-12 * exact, "{z} {n}");
        }
    }

    #[test]
    fn json_shape() {
        let v = FockVector::new(vec![c(1.0, 0.0), c(0.5, -2.0)]);
        let s = serde_json::to_string(&FockVectorJson::from(&v)).unwrap();
        assert_eq!(s, r#"{"trunc":2,"coeffs":[[1.0,0.0],[0.5,-2.0]]}"#);
        let back: FockVectorJson<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(FockVector::try_from(back).unwrap(), v);
    }

    #[test]
    fn json_rejects_inconsistent_trunc() {
        let j: FockVectorJson<f64> = serde_json::from_str(r#"{"trunc":3,"coeffs":[[1,0]]}"#).unwrap();
        assert!(FockVector::try_from(j).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let k = kernel_vector(KernelSpec::plain(Complex::new(1.0f32, 0.0)), 20).unwrap();
        let ip = inner_product(&k, &k);
        assert!((ip.re - std::f32::consts::E).abs() < 1e-5);
    }
}
