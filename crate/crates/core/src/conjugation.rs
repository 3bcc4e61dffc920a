//! The anti-linear conjugation `f -> c e^{bz} conj(f(conj(az + b)))`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dword::DComplex;
use crate::error::{Error, Result};
use crate::fock::{evaluate, FockVector};
use crate::linalg::CMatrix;
use crate::operator::{apply_pointwise, matrix_block, matrix_block_dword};
use crate::scalar::Real;
use crate::symbols::{ConjugationTriple, WcoSymbols};

/// `C_{a,b,c}` on `span{e_0, ..., e_{N-1}}`, stored as coefficient
/// conjugation followed by the linear part `L`.
#[derive(Debug, Clone)]
pub struct ConjugationOperator<T> {
    triple: ConjugationTriple<T>,
    trunc: usize,
    linear_part: CMatrix<T>,
}

impl<T: Real> ConjugationOperator<T> {
    pub fn new(triple: ConjugationTriple<T>, trunc: usize) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::InvalidTruncation("N must be at least 1".into()));
        }
        let linear_part = matrix_block(&triple.linear_symbols(), trunc, trunc);
        Ok(Self { triple, trunc, linear_part })
    }

    pub fn triple(&self) -> &ConjugationTriple<T> {
        &self.triple
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// `L[m][n] = <c e^{bz} (az + b)^n / sqrt(n!), e_m>`.
    pub fn linear_part(&self) -> &CMatrix<T> {
        &self.linear_part
    }
}

/// Truncated action `L conj(f)`.
pub fn apply_conjugation<T: Real>(op: &ConjugationOperator<T>, f: &FockVector<T>) -> Result<FockVector<T>> {
    if f.trunc() > op.trunc {
        return Err(Error::TruncationMismatch { input: f.trunc(), trunc: op.trunc });
    }
    let g = f.resized(op.trunc).conj();
    Ok(FockVector::new(op.linear_part.mul_vec(g.coeffs())))
}

/// `c e^{bz} conj(f(conj(az + b)))` at a single point.
pub fn conjugate_pointwise<T: Real>(t: &ConjugationTriple<T>, f: &FockVector<T>, z: Complex<T>) -> Complex<T> {
    let (a, b, c) = (*t.rotation(), *t.shift(), *t.scale());
    c * (b * z).exp() * evaluate(f, (a * z + b).conj()).conj()
}

/// Working length for displacing a vector of length `len` by `|beta|`.
fn working_length(len: usize, beta: f64) -> usize {
    let r = (len as f64).sqrt() + beta + 8.0;
    (r * r).ceil() as usize + 16
}

/// `exp(beta a - conj(beta) a^dagger) v`: the unitary `h -> e^{-|beta|^2/2 - conj(beta) z} h(z + beta)`.
///
/// The generator is skew-Hermitian and tridiagonal; it is applied by Taylor
/// series over substeps of norm at most 1/2.
pub fn displace<T: Real>(v: &[Complex<T>], beta: Complex<T>) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let bmag = beta.norm().to_f64().unwrap_or(0.0);
    let nw = working_length(v.len(), bmag).max(v.len());
    let mut cur = v.to_vec();
    cur.resize(nw, zero);
    if bmag == 0.0 {
        return cur;
    }
    let sqrt: Vec<T> = (0..=nw).map(|k| T::from_usize(k).unwrap().sqrt()).collect();
    let gen_norm = 2.0 * bmag * (nw as f64).sqrt();
    let steps = (gen_norm / 0.5).ceil().max(1.0) as usize;
    let h = T::one() / T::from_usize(steps).unwrap();
    let (w, wc) = (beta * h, beta.conj() * h);
    let apply_gen = |x: &[Complex<T>]| -> Vec<Complex<T>> {
        (0..nw)
            .map(|m| {
                let up = if m + 1 < nw { w * x[m + 1] * sqrt[m + 1] } else { zero };
                let down = if m > 0 { wc * x[m - 1] * sqrt[m] } else { zero };
                up - down
            })
            .collect()
    };
    let tiny = T::epsilon() * T::epsilon();
    for _ in 0..steps {
        let scale: T = cur.iter().map(|z| z.norm_sqr()).sum();
        let mut term = cur.clone();
        let mut acc = cur.clone();
        for k in 1..60 {
            term = apply_gen(&term);
            let kf = T::from_usize(k).unwrap();
            for z in term.iter_mut() {
                *z = *z / kf;
            }
            let mut mag = T::zero();
            for (a, t) in acc.iter_mut().zip(&term) {
                *a = *a + *t;
                mag = mag + t.norm_sqr();
            }
            if mag <= tiny * scale {
                break;
            }
        }
        cur = acc;
    }
    cur
}

/// `C f` without truncation, via `C = c e^{|b|^2/2} U_{b/a} R_a K`: coefficient
/// conjugation `K`, rotation `R_a e_n = a^n e_n`, then the displacement `U`.
pub fn apply_exact<T: Real>(t: &ConjugationTriple<T>, f: &FockVector<T>) -> FockVector<T> {
    let (a, b, c) = (*t.rotation(), *t.shift(), *t.scale());
    let half = T::lit(0.5);
    let mut rotated = Vec::with_capacity(f.trunc());
    let mut ap = Complex::new(T::one(), T::zero());
    for z in f.coeffs() {
        rotated.push(z.conj() * ap);
        ap = ap * a;
    }
    let phase = c * (half * b.norm_sqr()).exp();
    let out = displace(&rotated, b / a);
    FockVector::new(out.into_iter().map(|z| z * phase).collect())
}

/// Outcome of an involution/isometry run.
#[derive(Debug, Clone, PartialEq)]
pub struct InvolutionReport {
    pub trials: usize,
    pub max_involution: f64,
    pub max_isometry: f64,
    pub passed: bool,
    /// Trial index (RNG stream) of the worst violation, if any trial failed.
    pub worst_trial: Option<usize>,
}

/// Tolerance for [`check_involution_isometry`].
pub const INVOLUTION_TOL: f64 = 1e-8;

/// Guard band left below the truncation when drawing test vectors.
pub const GUARD: usize = 16;

/// Random unit vectors of degree below `N - 16`: checks `||C C f - f||` and `| ||C f|| - ||f|| |`.
pub fn check_involution_isometry<T: Real>(op: &ConjugationOperator<T>, trials: usize, seed: u64) -> InvolutionReport {
    let len = op.trunc.saturating_sub(GUARD).max(1);
    let results: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let f = random_unit_vector::<T>(len, seed, k as u64);
            let cf = apply_exact(&op.triple, &f);
            let ccf = apply_exact(&op.triple, &cf);
            let inv = ccf.sub(&f).norm().to_f64().unwrap_or(f64::INFINITY);
            let iso = (cf.norm() - f.norm()).abs().to_f64().unwrap_or(f64::INFINITY);
            (inv, iso)
        })
        .collect();
    let mut report = InvolutionReport { trials, max_involution: 0.0, max_isometry: 0.0, passed: true, worst_trial: None };
    let mut worst = 0.0;
    for (k, (inv, iso)) in results.into_iter().enumerate() {
        report.max_involution = report.max_involution.max(inv);
        report.max_isometry = report.max_isometry.max(iso);
        let dev = inv.max(iso);
        if dev.is_nan() || dev >= INVOLUTION_TOL {
            report.passed = false;
            if dev >= worst {
                worst = dev;
                report.worst_trial = Some(k);
            }
        }
    }
    report
}

/// Unit vector with i.i.d. complex Gaussian coefficients on stream `stream`.
pub fn random_unit_vector<T: Real>(len: usize, seed: u64, stream: u64) -> FockVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let v = FockVector::new(
        (0..len)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect(),
    );
    let n = v.norm();
    v.scale(Complex::new(T::one() / n, T::zero()))
}

/// Whether `D = aB - bA + b` within the mixed tolerance `tol`.
pub fn cwc_hypothesis<T: Real>(t: &ConjugationTriple<T>, s: &WcoSymbols<T>, tol: T) -> bool {
    let (a, b) = (*t.rotation(), *t.shift());
    let rhs = a * *s.offset() - b * *s.slope() + b;
    let d = *s.weight_rate();
    (d - rhs).norm() <= tol * T::one().max(d.norm()).max(rhs.norm())
}

/// Symbols of `C W C`, which equal the adjoint symbols under `D = aB - bA + b`.
pub fn cwc_transform<T: Real>(t: &ConjugationTriple<T>, s: &WcoSymbols<T>, tol: T) -> Result<WcoSymbols<T>> {
    if !cwc_hypothesis(t, s, tol) {
        return Err(Error::HypothesisViolated(format!(
            "D = aB - bA + b fails: D = {}, aB - bA + b = {}",
            s.weight_rate(),
            *t.rotation() * *s.offset() - *t.shift() * *s.slope() + *t.shift()
        )));
    }
    Ok(s.hat())
}

/// `(C W C f)(z)` computed from point values of `f` only.
pub fn cwc_pointwise<T: Real>(t: &ConjugationTriple<T>, s: &WcoSymbols<T>, f: &FockVector<T>, z: Complex<T>) -> Complex<T> {
    let (a, b, c) = (*t.rotation(), *t.shift(), *t.scale());
    let cf = |u: Complex<T>| c * (b * u).exp() * evaluate(f, (a * u + b).conj()).conj();
    let wcf = |w: Complex<T>| s.psi(w) * cf(s.phi(w));
    c * (b * z).exp() * wcf((a * z + b).conj()).conj()
}

/// Largest mixed deviation between `C W C f` and `W_hat f` at the given points.
pub fn cwc_pointwise_deviation<T: Real>(
    t: &ConjugationTriple<T>,
    s: &WcoSymbols<T>,
    f: &FockVector<T>,
    points: &[Complex<T>],
) -> T {
    let hat = s.hat();
    points
        .iter()
        .map(|z| {
            let lhs = cwc_pointwise(t, s, f, *z);
            let rhs = apply_pointwise(&hat, f, *z);
            (lhs - rhs).norm() / T::one().max(lhs.norm()).max(rhs.norm())
        })
        .fold(T::zero(), T::max)
}

/// Result of comparing `L conj(W_hat) conj(L)` with `W` on the guarded block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport<T> {
    pub block: usize,
    pub working: usize,
    pub deviation: T,
}

/// Componentwise deviation of the sandwich identity `L conj(W_hat) conj(L) = W`
/// on the leading `(N - guard)` block.
///
/// Inner sums run to a working truncation above `N`, so the block itself
/// carries no truncation error. Each entry is measured against
/// `max(1, (|L| |conj(W_hat) conj(L)|)_ik)`, the scale of the rounding in
/// the product.
pub fn sandwich_deviation<T: Real>(
    t: &ConjugationTriple<T>,
    s: &WcoSymbols<T>,
    n: usize,
    guard: usize,
) -> Result<SandwichReport<T>> {
    if guard >= n {
        return Err(Error::InvalidTruncation(format!("guard {guard} must be below N = {n}")));
    }
    let k = n - guard;
    let bmag = t.shift().norm().to_f64().unwrap_or(0.0);
    let working = n + 32 + (4.0 * bmag * bmag + 8.0 * bmag).ceil() as usize;
    // Entries of L and W_hat grow with |a|, |b| and |A| while W stays moderate,
    // so the products cancel heavily; they are formed in double-word arithmetic.
    let lin = t.linear_symbols();
    let l_rows = matrix_block_dword(&lin, k, working);
    let l_cols = matrix_block_dword(&lin, working, k);
    let hat = matrix_block_dword(&s.hat(), working, working);
    let inner: Vec<DComplex<T>> = (0..working * k)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            (0..working).fold(DComplex::zero(), |acc, l| acc.add(hat[i * working + l].mul(l_cols[l * k + j]).conj()))
        })
        .collect();
    let w = matrix_block(s, k, k);
    let dev = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            let mut x = DComplex::zero();
            let mut scale = T::zero();
            for l in 0..working {
                let (a, b) = (l_rows[i * working + l], inner[l * k + j]);
                x = x.add(a.mul(b));
                scale = scale + a.to_complex().norm() * b.to_complex().norm();
            }
            let d = x.sub(DComplex::from_complex(w[(i, j)])).to_complex().norm();
            d / T::one().max(scale)
        })
        .reduce(T::zero, |a, b| if b.is_nan() || a.is_nan() { T::nan() } else { a.max(b) });
    Ok(SandwichReport { block: k, working, deviation: dev })
}
