//! Symbol-level classification: boundedness, C-selfadjointness, Hermitian,
//! normal and cohyponormal operators, and fixed-point data.
//!
//! Predicates are generic over [`Field`]. With a float tolerance they compare
//! in the mixed sense `|x - y|^2 <= tol^2 max(1, |x|^2, |y|^2)`; with rationals
//! and a zero tolerance they decide exactly.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{kernel_vector, KernelSpec};
use crate::operator::kernel_action_adjoint;
use crate::scalar::{Field, Real};
use crate::symbols::{validate_conjugation, ConjugationJson, ConjugationTriple, WcoSymbols, CONJUGATION_TOL};

/// Tolerance for symbol equalities in floating point.
pub const CLASSIFY_TOL: f64 = 1e-10;

fn max3<T: Field>(a: T, b: T, c: T) -> T {
    let m = if a > b { a } else { b };
    if m > c {
        m
    } else {
        c
    }
}

fn near<T: Field>(x: &Complex<T>, y: &Complex<T>, tol: &T) -> bool {
    let d = (x.clone() - y.clone()).norm_sqr();
    d <= tol.clone() * tol.clone() * max3(T::one(), x.norm_sqr(), y.norm_sqr())
}

fn near_real<T: Field>(x: &T, y: &T, tol: &T) -> bool {
    let d = x.clone() - y.clone();
    let d = if d < T::zero() { -d } else { d };
    let ax = if *x < T::zero() { -x.clone() } else { x.clone() };
    let ay = if *y < T::zero() { -y.clone() } else { y.clone() };
    d <= tol.clone() * max3(T::one(), ax, ay)
}

fn one<T: Field>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

fn is_one<T: Field>(a: &Complex<T>, tol: &T) -> bool {
    near(a, &one(), tol)
}

/// `|A| < 1`, or `|A| = 1` and `D + A conj(B) = 0`.
pub fn is_bounded<T: Field>(s: &WcoSymbols<T>, tol: &T) -> bool {
    let a2 = s.slope().norm_sqr();
    if near_real(&a2, &T::one(), tol) {
        let v = s.weight_rate().clone() + s.slope().clone() * s.offset().conj();
        return near(&v, &Complex::new(T::zero(), T::zero()), tol);
    }
    a2 < T::one()
}

/// `D = aB - bA + b` (the weight coefficient is non-zero by construction).
pub fn is_c_selfadjoint<T: Field>(s: &WcoSymbols<T>, t: &ConjugationTriple<T>, tol: &T) -> bool {
    let (a, b) = (t.rotation().clone(), t.shift().clone());
    let rhs = a * s.offset().clone() - b.clone() * s.slope().clone() + b;
    near(s.weight_rate(), &rhs, tol)
}

/// `A` and `C` real, `C != 0`, and `D = conj(B)`.
pub fn is_hermitian<T: Field>(s: &WcoSymbols<T>, tol: &T) -> bool {
    let real = |z: &Complex<T>| near_real(&z.im, &T::zero(), tol);
    real(s.slope()) && real(s.weight_coeff()) && near(s.weight_rate(), &s.offset().conj(), tol)
}

/// `D (1 - conj A) = conj(B) (1 - A)`, the `A != 1` branch written without division.
fn normal_branch<T: Field>(s: &WcoSymbols<T>, tol: &T) -> bool {
    let lhs = s.weight_rate().clone() * (one::<T>() - s.slope().conj());
    let rhs = s.offset().conj() * (one::<T>() - s.slope().clone());
    near(&lhs, &rhs, tol)
}

/// `A != 1` with `D = conj(B)(1 - A)/(1 - conj A)`, or `A = 1` with `|B| = |D|`.
pub fn is_normal<T: Field>(s: &WcoSymbols<T>, tol: &T) -> bool {
    if is_one(s.slope(), tol) {
        near_real(&s.offset().norm_sqr(), &s.weight_rate().norm_sqr(), tol)
    } else {
        normal_branch(s, tol)
    }
}

/// The normal branch for `A != 1`, or `A = 1` with `|B| >= |D|`.
pub fn is_cohyponormal<T: Field>(s: &WcoSymbols<T>, tol: &T) -> bool {
    if is_one(s.slope(), tol) {
        let (b2, d2) = (s.offset().norm_sqr(), s.weight_rate().norm_sqr());
        b2 >= d2 || near_real(&b2, &d2, tol)
    } else {
        normal_branch(s, tol)
    }
}

/// The conjugation `(a, 0, 1)` under which a normal operator is C-selfadjoint:
/// `a = conj(B)(1 - A)/(B(1 - conj A))` for `A != 1`, `a = D/B` for `A = 1`,
/// and `a = 1` when `B = 0`.
pub fn conjugation_for_normal<T: Field>(s: &WcoSymbols<T>, tol: &T) -> Result<ConjugationTriple<T>> {
    if !is_normal(s, tol) {
        return Err(Error::Precondition("symbols are not normal".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let (a_sym, b_sym) = (s.slope().clone(), s.offset().clone());
    let a = if near(&b_sym, &zero, tol) {
        one()
    } else if is_one(&a_sym, tol) {
        s.weight_rate().clone() / b_sym
    } else {
        (b_sym.conj() * (one::<T>() - a_sym.clone())) / (b_sym * (one::<T>() - a_sym.conj()))
    };
    let t = validate_conjugation(a, zero, one(), tol)?;
    if !is_c_selfadjoint(s, &t, tol) {
        return Err(Error::InvariantViolated("synthesized conjugation does not satisfy D = aB - bA + b"));
    }
    Ok(t)
}

/// Some conjugation `C_{a,b,c}` with `D = aB - bA + b`, if one exists.
///
/// Writing `a = u^2`, `b = i r u` with `|u| = 1`, `r` real, the condition reads
/// `conj(u) D - u B = i r (1 - A)`. For `A != 1` a solution always exists:
/// pick `u` so that `(P - conj Q) conj(u)` is imaginary, `P = D/(1-A)`,
/// `Q = B/(1-A)`. For `A = 1` it exists iff `|B| = |D|`.
pub fn find_c_selfadjoint_witness<T: Real>(s: &WcoSymbols<T>, tol: T) -> Option<ConjugationTriple<T>> {
    if is_normal(s, &tol) {
        return conjugation_for_normal(s, &tol).ok();
    }
    if is_one(s.slope(), &tol) {
        return None;
    }
    let (a, b, d) = (*s.slope(), *s.offset(), *s.weight_rate());
    let i = Complex::new(T::zero(), T::one());
    let p = d / (one::<T>() - a);
    let q = b / (one::<T>() - a);
    let diff = p - q.conj();
    let u = if diff.norm() == T::zero() {
        one()
    } else {
        // conj(u) = i conj(diff) / |diff|
        (i * diff.conj() / diff.norm()).conj()
    };
    let r = ((u.conj() * d - u * b) / (i * (one::<T>() - a))).re;
    let two = T::one() + T::one();
    let triple_tol = T::lit(CONJUGATION_TOL).max(T::epsilon() * T::lit(64.0) * (T::one() + r * r));
    let t = validate_conjugation(u * u, i * u * r, Complex::new((-(r * r) / two).exp(), T::zero()), &triple_tol).ok()?;
    is_c_selfadjoint(s, &t, &tol).then_some(t)
}

/// `d = B / (1 - A)` and `psi(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T> {
    pub point: Complex<T>,
    pub eigenvalue: Complex<T>,
}

/// Fixed point of `phi` and the eigenvalue `psi(d)` of `W*` at `K_d`; `None` for `A = 1`.
pub fn fixed_point_data<T: Real>(s: &WcoSymbols<T>, tol: T) -> Option<FixedPoint<T>> {
    if is_one(s.slope(), &tol) {
        return None;
    }
    let point = *s.offset() / (one::<T>() - *s.slope());
    Some(FixedPoint { point, eigenvalue: s.psi(point) })
}

/// `||W* K_d - conj(psi(d)) K_d||` relative to `||K_d||` at truncation `n`.
pub fn fixed_point_residual<T: Real>(s: &WcoSymbols<T>, fp: &FixedPoint<T>, n: usize) -> Result<T> {
    let lhs = kernel_action_adjoint(s, KernelSpec::plain(fp.point), n)?;
    let k = kernel_vector(KernelSpec::plain(fp.point), n)?;
    let rhs = k.scale(fp.eigenvalue.conj());
    Ok(lhs.sub(&rhs).norm() / k.norm())
}

/// Predicate outcomes for one symbol tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub bounded: bool,
    pub hermitian: bool,
    pub normal: bool,
    pub cohyponormal: bool,
    pub c_selfadjoint_witness: Option<ConjugationJson<f64>>,
    /// Whether the operator is C-selfadjoint for a caller-supplied triple.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_selfadjoint_given: Option<bool>,
    pub fixed_point: Option<Complex<f64>>,
    pub eigenvalue: Option<Complex<f64>>,
    /// Only maximal operators are ever constructed.
    pub maximal: bool,
}

/// Full report, with the structural implications checked on the way out.
pub fn classify(s: &WcoSymbols<f64>, given: Option<&ConjugationTriple<f64>>, tol: f64) -> Result<ClassificationReport> {
    let bounded = is_bounded(s, &tol);
    let hermitian = is_hermitian(s, &tol);
    let normal = is_normal(s, &tol);
    let cohyponormal = is_cohyponormal(s, &tol);
    let witness = find_c_selfadjoint_witness(s, tol);
    if normal && !cohyponormal {
        return Err(Error::InvariantViolated("normal symbols must be cohyponormal"));
    }
    if hermitian && !normal {
        return Err(Error::InvariantViolated("Hermitian symbols must be normal"));
    }
    if normal && witness.is_none() {
        return Err(Error::InvariantViolated("normal symbols must admit a conjugation witness"));
    }
    if let Some(t) = &witness {
        if !is_c_selfadjoint(s, t, &tol) {
            return Err(Error::InvariantViolated("witness fails D = aB - bA + b"));
        }
    }
    let fp = fixed_point_data(s, tol);
    Ok(ClassificationReport {
        bounded,
        hermitian,
        normal,
        cohyponormal,
        c_selfadjoint_witness: witness.map(|t| t.to_json()),
        c_selfadjoint_given: given.map(|t| is_c_selfadjoint(s, t, &tol)),
        fixed_point: fp.map(|f| f.point),
        eigenvalue: fp.map(|f| f.eigenvalue),
        maximal: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational_complex, Rational};
    use crate::symbols::make_conjugation;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sym(a: Complex<f64>, b: Complex<f64>, cc: Complex<f64>, d: Complex<f64>) -> WcoSymbols<f64> {
        WcoSymbols::new(a, b, cc, d).unwrap()
    }

    fn real(a: f64, b: f64, cc: f64, d: f64) -> WcoSymbols<f64> {
        sym(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0))
    }

    const TOL: f64 = CLASSIFY_TOL;

    #[test]
    fn boundedness_examples() {
        assert!(is_bounded(&real(0.5, 7.0, 3.0, 100.0), &TOL));
        assert!(is_bounded(&real(1.0, 1.0, 1.0, -1.0), &TOL));
        assert!(!is_bounded(&real(1.0, 1.0, 1.0, 1.0), &TOL));
        assert!(!is_bounded(&real(2.0, 0.0, 1.0, 0.0), &TOL));
        assert!(is_bounded(&sym(c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)), &TOL));
    }

    #[test]
    fn c_selfadjoint_examples() {
        let t = make_conjugation(0.0, 1.0).unwrap();
        assert!(is_c_selfadjoint(&sym(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)), &t, &TOL));
        assert!(!is_c_selfadjoint(&sym(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.1, -1.0)), &t, &TOL));
        let j = ConjugationTriple::standard();
        for a in [c(0.3, 0.1), c(5.0, -2.0), c(1.0, 0.0)] {
            let b = c(1.5, -0.5);
            assert!(is_c_selfadjoint(&sym(a, b, c(2.0, 1.0), b), &j, &TOL));
        }
    }

    #[test]
    fn hermitian_examples() {
        assert!(is_hermitian(&sym(c(0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)), &TOL));
        assert!(is_hermitian(&real(1.0, 0.0, 1.0, 0.0), &TOL));
        assert!(!is_hermitian(&sym(c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)), &TOL));
    }

    #[test]
    fn normal_examples() {
        let s = real(2.0, 1.0, 1.0, 1.0);
        assert!(is_normal(&s, &TOL) && is_cohyponormal(&s, &TOL));
        let s = real(1.0, 2.0, 1.0, 1.0);
        assert!(!is_normal(&s, &TOL) && is_cohyponormal(&s, &TOL));
        let s = sym(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        assert!(is_normal(&s, &TOL) && !is_bounded(&s, &TOL));
        // A = 1, B = 0: normal iff D = 0
        assert!(is_normal(&real(1.0, 0.0, 1.0, 0.0), &TOL));
        assert!(!is_cohyponormal(&real(1.0, 0.0, 1.0, 0.5), &TOL));
    }

    #[test]
    fn normal_conjugation_examples() {
        let t = conjugation_for_normal(&real(2.0, 1.0, 1.0, 1.0), &TOL).unwrap();
        assert_eq!((*t.rotation(), *t.shift(), *t.scale()), (c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        let t = conjugation_for_normal(&sym(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)), &TOL).unwrap();
        assert_eq!(*t.rotation(), c(0.0, 1.0));
        let t = conjugation_for_normal(&real(0.5, 0.0, 1.0, 0.0), &TOL).unwrap();
        assert_eq!(*t.rotation(), c(1.0, 0.0));
        assert!(matches!(conjugation_for_normal(&real(1.0, 2.0, 1.0, 1.0), &TOL), Err(Error::Precondition(_))));
    }

    #[test]
    fn fixed_point_examples() {
        let fp = fixed_point_data(&real(0.5, 1.0, 1.0, 1.0), TOL).unwrap();
        assert!((fp.point - c(2.0, 0.0)).norm() < 1e-15);
        assert!((fp.eigenvalue - c(2f64.exp(), 0.0)).norm() < 1e-14);
        assert!(fixed_point_residual(&real(0.5, 1.0, 1.0, 1.0), &fp, 64).unwrap() < 1e-9);
        let fp = fixed_point_data(&real(2.0, 0.0, 5.0, 0.0), TOL).unwrap();
        assert_eq!((fp.point, fp.eigenvalue), (c(0.0, 0.0), c(5.0, 0.0)));
        assert!(fixed_point_data(&real(1.0, 1.0, 1.0, 1.0), TOL).is_none());
    }

    #[test]
    fn exact_rational_boundaries() {
        let r = |re, im| rational_complex(re, im, 1);
        let zero = Rational::from_integer(0.into());
        // A = 1, |B| = |D| = 5 with B = 3 + 4i, D = 5
        let s = WcoSymbols::new(r(1, 0), r(3, 4), r(1, 0), r(5, 0)).unwrap();
        assert!(is_normal(&s, &zero));
        let t = conjugation_for_normal(&s, &zero).unwrap();
        assert!(is_c_selfadjoint(&s, &t, &zero));
        // one part in 10^30 off the boundary
        let tiny = rational_complex(1, 0, 1).scale(Rational::new(1.into(), num_bigint::BigInt::from(10).pow(30)));
        let s2 = s.with_weight_rate(r(5, 0) + tiny);
        assert!(!is_normal(&s2, &zero) && !is_cohyponormal(&s2, &zero));
        let s3 = s.with_weight_rate(r(5, 0) - rational_complex(1, 0, 1).scale(Rational::new(1.into(), num_bigint::BigInt::from(10).pow(30))));
        assert!(!is_normal(&s3, &zero) && is_cohyponormal(&s3, &zero));
        // |A| = 1 exactly with A = (3 + 4i)/5
        let a = rational_complex(3, 4, 5);
        let b = r(1, 2);
        let d = -(a.clone() * b.conj());
        assert!(is_bounded(&WcoSymbols::new(a, b, r(1, 0), d).unwrap(), &zero));
    }

    #[test]
    fn general_witness_exists_off_the_identity_slope() {
        let s = sym(c(2.0, 1.0), c(-0.3, 0.8), c(1.0, 0.0), c(1.5, -0.4));
        assert!(!is_normal(&s, &TOL));
        let t = find_c_selfadjoint_witness(&s, TOL).unwrap();
        assert!(is_c_selfadjoint(&s, &t, &TOL));
        assert!(find_c_selfadjoint_witness(&real(1.0, 2.0, 1.0, 1.0), TOL).is_none());
    }

    #[test]
    fn report_json_shape() {
        let rep = classify(&real(2.0, 1.0, 1.0, 1.0), None, TOL).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["bounded", "c_selfadjoint_witness", "cohyponormal", "eigenvalue", "fixed_point", "hermitian", "maximal", "normal"]);
        assert_eq!(v["maximal"], true);
        assert_eq!(v["c_selfadjoint_witness"]["a"], serde_json::json!([1.0, 0.0]));
    }
}
