//! Validated symbol data.
//!
//! * [`WcoSymbols`]: `phi(z) = A z + B`, `psi(z) = C e^{D z}` with `C != 0`.
//! * [`ConjugationTriple`]: `(a, b, c)` with `|a| = 1`, `conj(a) b + conj(b) = 0`
//!   and `|c|^2 e^{|b|^2} = 1`.
//! * [`GaussianSymbol`]: exponent data of `e^{alpha z^2 + beta z + gamma}`.
//!
//! Field names follow the role of each constant. The single letters appear
//! only in the JSON encodings, where they are part of the file format.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_near_zero, Field, Real};

/// Tolerance for conjugation-triple validation.
pub const CONJUGATION_TOL: f64 = 1e-12;

/// Symbols of a weighted composition operator with affine `phi` and exponential `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct WcoSymbols<T> {
    slope: Complex<T>,
    offset: Complex<T>,
    weight_coeff: Complex<T>,
    weight_rate: Complex<T>,
}

impl<T: Field> WcoSymbols<T> {
    /// `phi(z) = slope z + offset`, `psi(z) = weight_coeff e^{weight_rate z}`.
    pub fn new(
        slope: Complex<T>,
        offset: Complex<T>,
        weight_coeff: Complex<T>,
        weight_rate: Complex<T>,
    ) -> Result<Self> {
        if weight_coeff.is_zero() {
            return Err(Error::InvariantViolated("weight coefficient C must be non-zero"));
        }
        Ok(Self { slope, offset, weight_coeff, weight_rate })
    }

    /// `A`.
    pub fn slope(&self) -> &Complex<T> {
        &self.slope
    }

    /// `B`.
    pub fn offset(&self) -> &Complex<T> {
        &self.offset
    }

    /// `C`.
    pub fn weight_coeff(&self) -> &Complex<T> {
        &self.weight_coeff
    }

    /// `D`.
    pub fn weight_rate(&self) -> &Complex<T> {
        &self.weight_rate
    }

    /// The identity operator: `phi(z) = z`, `psi = 1`.
    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Self { slope: one.clone(), offset: zero.clone(), weight_coeff: one, weight_rate: zero }
    }

    /// Same symbols with a different `D`.
    pub fn with_weight_rate(&self, rate: Complex<T>) -> Self {
        Self { weight_rate: rate, ..self.clone() }
    }

    /// Symbols of the adjoint: `(conj A, conj D, conj C, conj B)`.
    pub fn hat(&self) -> Self {
        Self {
            slope: self.slope.conj(),
            offset: self.weight_rate.conj(),
            weight_coeff: self.weight_coeff.conj(),
            weight_rate: self.offset.conj(),
        }
    }
}

impl<T: Real> WcoSymbols<T> {
    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_parts(a: (T, T), b: (T, T), c: (T, T), d: (T, T)) -> Result<Self> {
        Self::new(
            Complex::new(a.0, a.1),
            Complex::new(b.0, b.1),
            Complex::new(c.0, c.1),
            Complex::new(d.0, d.1),
        )
    }

    pub fn phi(&self, z: Complex<T>) -> Complex<T> {
        self.slope * z + self.offset
    }

    pub fn psi(&self, z: Complex<T>) -> Complex<T> {
        self.weight_coeff * (self.weight_rate * z).exp()
    }

    /// `psi^{(k)}(z) = C D^k e^{D z}`.
    pub fn psi_derivative(&self, z: Complex<T>, k: usize) -> Complex<T> {
        self.psi(z) * self.weight_rate.powu(k as u32)
    }

    pub fn to_json(&self) -> SymbolsJson<T> {
        SymbolsJson {
            a: self.slope,
            b: self.offset,
            c: self.weight_coeff,
            d: self.weight_rate,
        }
    }

    pub fn from_json(j: SymbolsJson<T>) -> Result<Self> {
        Self::new(j.a, j.b, j.c, j.d)
    }
}

/// `{"A":[re,im],"B":[re,im],"C":[re,im],"D":[re,im]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SymbolsJson<T> {
    #[serde(rename = "A")]
    pub a: Complex<T>,
    #[serde(rename = "B")]
    pub b: Complex<T>,
    #[serde(rename = "C")]
    pub c: Complex<T>,
    #[serde(rename = "D")]
    pub d: Complex<T>,
}

/// Parameters `(a, b, c)` of the conjugation `f ↦ c e^{bz} conj(f(conj(az + b)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationTriple<T> {
    rotation: Complex<T>,
    shift: Complex<T>,
    scale: Complex<T>,
}

impl<T: Field> ConjugationTriple<T> {
    /// `a`.
    pub fn rotation(&self) -> &Complex<T> {
        &self.rotation
    }

    /// `b`.
    pub fn shift(&self) -> &Complex<T> {
        &self.shift
    }

    /// `c`.
    pub fn scale(&self) -> &Complex<T> {
        &self.scale
    }

    /// The conjugation `f ↦ conj(f(conj z))`, triple `(1, 0, 1)`.
    pub fn standard() -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self { rotation: one.clone(), shift: Complex::zero(), scale: one }
    }

    /// Symbols `(a, b, c, b)` of the weighted composition operator `L` with
    /// `C f = L conj(f)` (coefficient-wise conjugate).
    pub fn linear_symbols(&self) -> WcoSymbols<T> {
        WcoSymbols {
            slope: self.rotation.clone(),
            offset: self.shift.clone(),
            weight_coeff: self.scale.clone(),
            weight_rate: self.shift.clone(),
        }
    }
}

/// Checks the three conjugation conditions within `tol`, naming the first
/// one that fails.
pub fn validate_conjugation<T: Field>(
    rotation: Complex<T>,
    shift: Complex<T>,
    scale: Complex<T>,
    tol: &T,
) -> Result<ConjugationTriple<T>> {
    let unit = rotation.norm_sqr() - T::one();
    let unit_abs = if unit < T::zero() { -unit } else { unit };
    if unit_abs > *tol {
        return Err(Error::ConditionViolated("|a| = 1"));
    }
    let compat = rotation.conj() * shift.clone() + shift.conj();
    if !complex_near_zero(&compat, tol) {
        return Err(Error::ConditionViolated("conj(a) b + conj(b) = 0"));
    }
    if !T::unit_gaussian_weight(&scale.norm_sqr(), &shift.norm_sqr(), tol) {
        return Err(Error::ConditionViolated("|c|^2 e^{|b|^2} = 1"));
    }
    Ok(ConjugationTriple { rotation, shift, scale })
}

/// Parametrized family `a = e^{i theta}`, `b = r e^{i(theta + pi)/2}`, `c = e^{-r^2/2}`.
pub fn make_conjugation<T: Real>(theta: T, r: T) -> Result<ConjugationTriple<T>> {
    if r < T::zero() {
        return Err(Error::Precondition(format!("radius must be non-negative, got {r}")));
    }
    let two = T::one() + T::one();
    let rotation = Complex::from_polar(T::one(), theta);
    let shift = Complex::from_polar(r, (theta + T::PI()) / two);
    let scale = Complex::new((-(r * r) / two).exp(), T::zero());
    let tol = T::from_f64(CONJUGATION_TOL).unwrap().max(T::epsilon() * T::lit(64.0) * (T::one() + r * r));
    validate_conjugation(rotation, shift, scale, &tol)
}

impl<T: Real> ConjugationTriple<T> {
    pub fn to_json(&self) -> ConjugationJson<T> {
        ConjugationJson { a: self.rotation, b: self.shift, c: self.scale }
    }

    pub fn from_json(j: ConjugationJson<T>, tol: T) -> Result<Self> {
        validate_conjugation(j.a, j.b, j.c, &tol)
    }
}

/// `{"a":[re,im],"b":[re,im],"c":[re,im]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConjugationJson<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
}

/// Exponent `h(z) = quad z^2 + linear z + constant` of the entire function `e^h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSymbol<T> {
    pub quad: Complex<T>,
    pub linear: Complex<T>,
    pub constant: Complex<T>,
}

impl<T: Real> GaussianSymbol<T> {
    pub fn new(quad: Complex<T>, linear: Complex<T>, constant: Complex<T>) -> Self {
        Self { quad, linear, constant }
    }

    pub fn real(quad: T, linear: T, constant: T) -> Self {
        Self::new(
            Complex::new(quad, T::zero()),
            Complex::new(linear, T::zero()),
            Complex::new(constant, T::zero()),
        )
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.quad * z * z + self.linear * z + self.constant).exp()
    }
}

/// `e^{alpha z^2 + beta z + gamma}` lies in F² iff `|alpha| < 1/2` (strict).
pub fn gaussian_in_fock<T: Real>(g: &GaussianSymbol<T>) -> bool {
    let quarter = T::one() / T::lit(4.0);
    g.quad.norm_sqr() < quarter
}

/// Exponent of `psi · (e^g ∘ phi)`.
///
/// The constant term uses the principal branch of `log C`; only its real part
/// matters for membership.
pub fn compose_gaussian<T: Real>(s: &WcoSymbols<T>, g: &GaussianSymbol<T>) -> GaussianSymbol<T> {
    let a = s.slope;
    let b = s.offset;
    let two = T::one() + T::one();
    GaussianSymbol {
        quad: g.quad * a * a,
        linear: g.quad * a * b * two + g.linear * a + s.weight_rate,
        constant: g.quad * b * b + g.linear * b + g.constant + s.weight_coeff.ln(),
    }
}

/// Composition of two weighted composition operators, `W_outer W_inner`.
///
/// `W_outer W_inner f = psi_o · (psi_i ∘ phi_o) · f ∘ phi_i ∘ phi_o`.
pub fn compose_symbols<T: Real>(outer: &WcoSymbols<T>, inner: &WcoSymbols<T>) -> Result<WcoSymbols<T>> {
    WcoSymbols::new(
        inner.slope * outer.slope,
        inner.slope * outer.offset + inner.offset,
        outer.weight_coeff * inner.weight_coeff * (inner.weight_rate * outer.offset).exp(),
        outer.weight_rate + inner.weight_rate * outer.slope,
    )
}

/// Partial sums of `||e^g||^2 = sum_n |<e^g, e_n>|^2` for the first `terms` coefficients.
///
/// Coefficients follow from `f' = (2 alpha z + beta) f`, written in the
/// orthonormal basis: `b_{n+1} = (beta b_n + 2 alpha sqrt(n) b_{n-1}) / sqrt(n+1)`.
pub fn gaussian_partial_norms<T: Real>(g: &GaussianSymbol<T>, terms: usize) -> Vec<T> {
    let two = T::one() + T::one();
    let mut out = Vec::with_capacity(terms);
    let mut prev = Complex::new(T::zero(), T::zero());
    let mut cur = g.constant.exp();
    let mut sum = T::zero();
    for n in 0..terms {
        sum = sum + cur.norm_sqr();
        out.push(sum);
        let nf = T::from_usize(n).unwrap();
        let next = (g.linear * cur + g.quad * prev * two * nf.sqrt()) / (nf + T::one()).sqrt();
        prev = cur;
        cur = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational_complex, Rational};
    use num_traits::Zero;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_weight_rejected() {
        let err = WcoSymbols::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::InvariantViolated(_)));
    }

    #[test]
    fn validate_examples() {
        let tol = CONJUGATION_TOL;
        assert!(validate_conjugation(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), &tol).is_ok());
        assert!(validate_conjugation(c(1.0, 0.0), c(0.0, 1.0), c((-0.5f64).exp(), 0.0), &tol).is_ok());
        let err = validate_conjugation(c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), &tol).unwrap_err();
        assert_eq!(err, Error::ConditionViolated("conj(a) b + conj(b) = 0"));
    }

    #[test]
    fn validate_names_each_condition() {
        let tol = CONJUGATION_TOL;
        let e1 = validate_conjugation(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), &tol).unwrap_err();
        assert_eq!(e1, Error::ConditionViolated("|a| = 1"));
        let e3 = validate_conjugation(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), &tol).unwrap_err();
        assert_eq!(e3, Error::ConditionViolated("|c|^2 e^{|b|^2} = 1"));
    }

    #[test]
    fn make_conjugation_examples() {
        let t = make_conjugation(0.0, 0.0).unwrap();
        assert_eq!(t, ConjugationTriple::standard());

        let t = make_conjugation(0.0f64, 1.0).unwrap();
        assert!((t.shift() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((t.scale() - c((-0.5f64).exp(), 0.0)).norm() < 1e-15);

        let t = make_conjugation(std::f64::consts::PI, 0.0).unwrap();
        assert!((t.rotation() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(t.shift().norm() < 1e-15);
    }

    #[test]
    fn make_conjugation_rejects_negative_radius() {
        assert!(make_conjugation(0.0f64, -1.0).is_err());
    }

    #[test]
    fn make_conjugation_grid_always_validates() {
        for i in 0..100 {
            for j in 0..100 {
                let theta = i as f64 * std::f64::consts::TAU / 100.0;
                let r = j as f64 * 0.05;
                let t = make_conjugation(theta, r).unwrap();
                validate_conjugation(*t.rotation(), *t.shift(), *t.scale(), &CONJUGATION_TOL)
                    .unwrap_or_else(|e| panic!("theta={theta} r={r}: {e}"));
            }
        }
    }

    #[test]
    fn exact_triple_validation() {
        let zero = Rational::zero();
        let t = validate_conjugation(
            rational_complex(3, 4, 5),
            rational_complex(0, 0, 1),
            rational_complex(1, 0, 1),
            &zero,
        );
        assert!(t.is_ok());
        // |a| = 1 fails exactly for a = (3 + 4i)/5 + 1/10^9
        let bad = validate_conjugation(
            rational_complex(600_000_001, 800_000_000, 1_000_000_000),
            rational_complex(0, 0, 1),
            rational_complex(1, 0, 1),
            &zero,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn gaussian_membership_examples() {
        assert!(gaussian_in_fock(&GaussianSymbol::real(0.25, 0.0, 0.0)));
        assert!(!gaussian_in_fock(&GaussianSymbol::real(4.0, 2.0, 0.0)));
        assert!(gaussian_in_fock(&GaussianSymbol::real(0.0, 5.0, 0.0)));
        assert!(!gaussian_in_fock(&GaussianSymbol::real(0.5, 0.0, 0.0)));
        assert!(!gaussian_in_fock(&GaussianSymbol::new(c(0.0, 0.5), c(0.0, 0.0), c(0.0, 0.0))));
    }

    #[test]
    fn compose_gaussian_example() {
        let s = WcoSymbols::from_parts((4.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)).unwrap();
        let g = GaussianSymbol::real(0.25, 0.0, 0.0);
        let h = compose_gaussian(&s, &g);
        assert_eq!(h, GaussianSymbol::real(4.0, 2.0, 0.0));
        assert!(!gaussian_in_fock(&h));

        let id = WcoSymbols::<f64>::identity();
        let g2 = GaussianSymbol::new(c(0.1, 0.2), c(-1.0, 3.0), c(0.5, 0.0));
        assert_eq!(compose_gaussian(&id, &g2), g2);

        let half = WcoSymbols::from_parts((0.5, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)).unwrap();
        let h = compose_gaussian(&half, &g);
        assert!((h.quad - c(1.0 / 16.0, 0.0)).norm() < 1e-16);
        assert!(gaussian_in_fock(&h));
    }

    #[test]
    fn compose_gaussian_matches_pointwise() {
        let s = WcoSymbols::from_parts((0.3, 0.2), (1.0, -0.5), (2.0, 1.0), (-0.4, 0.7)).unwrap();
        let g = GaussianSymbol::new(c(0.1, -0.05), c(0.3, 0.3), c(0.2, 0.0));
        let h = compose_gaussian(&s, &g);
        for z in [c(0.0, 0.0), c(1.0, -0.5), c(-0.7, 0.9)] {
            let direct = s.psi(z) * g.eval(s.phi(z));
            assert!((h.eval(z) - direct).norm() < 1e-13 * direct.norm());
        }
    }

    #[test]
    fn partial_norms_track_membership() {
        // bounded partial sums iff |alpha| < 1/2 (boundary excluded)
        for (alpha, inside) in [(0.0, true), (0.25, true), (0.49, true), (0.51, false), (1.0, false)] {
            let g = GaussianSymbol::<f64>::real(alpha, 0.3, 0.0);
            let sums = gaussian_partial_norms(&g, 4000);
            let late = sums[3999];
            let mid = sums[1999];
            let converged = (late - mid).abs() <= 1e-6 * late.max(1.0);
            assert_eq!(converged, inside, "alpha = {alpha}");
            assert_eq!(gaussian_in_fock(&g), inside);
        }
    }

    #[test]
    fn partial_norm_of_exponential_is_kernel_norm() {
        let g = GaussianSymbol::new(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0));
        let sums = gaussian_partial_norms(&g, 60);
        assert!((sums[59] - 4f64.exp()).abs() < 1e-12 * 4f64.exp());
    }

    #[test]
    fn hat_is_involutive() {
        let s = WcoSymbols::from_parts((2.0, 0.5), (0.0, 1.0), (1.0, -1.0), (0.3, 0.0)).unwrap();
        assert_eq!(s.hat().hat(), s);
    }

    #[test]
    fn symbols_json_keys() {
        let s = WcoSymbols::from_parts((1.0, 0.0), (0.0, 1.0), (2.0, 0.0), (-1.0, 0.0)).unwrap();
        let txt = serde_json::to_string(&s.to_json()).unwrap();
        assert_eq!(txt, r#"{"A":[1.0,0.0],"B":[0.0,1.0],"C":[2.0,0.0],"D":[-1.0,0.0]}"#);
        let back: SymbolsJson<f64> = serde_json::from_str(&txt).unwrap();
        assert_eq!(WcoSymbols::from_json(back).unwrap(), s);
    }
}
