//! The weighted composition operator `W f = psi * (f o phi)`: pointwise
//! action, truncated matrices, adjoint symbols, kernel actions and norms.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dword::{DComplex, DWord, Scaled};
use crate::error::{Error, Result};
use crate::fock::{evaluate, kernel_vector, FockVector, KernelSpec};
use crate::linalg::CMatrix;
use crate::scalar::Real;
use crate::symbols::{compose_gaussian, gaussian_in_fock, GaussianSymbol, WcoSymbols};

/// Symbols of the adjoint: `(conj A, conj D, conj C, conj B)`.
pub type AdjointSymbols<T> = WcoSymbols<T>;

/// `N x N` matrix with `entries[(m, n)] = <W e_n, e_m>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    trunc: usize,
    entries: CMatrix<T>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn from_entries(entries: CMatrix<T>) -> Result<Self> {
        if entries.rows() != entries.cols() || entries.rows() == 0 {
            return Err(Error::InvalidTruncation(format!(
                "operator matrix must be square and non-empty, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        Ok(Self { trunc: entries.rows(), entries })
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex<T> {
        self.entries[(m, n)]
    }

    /// Truncated action `P_N W P_N f`.
    pub fn apply(&self, f: &FockVector<T>) -> Result<FockVector<T>> {
        if f.trunc() > self.trunc {
            return Err(Error::TruncationMismatch { input: f.trunc(), trunc: self.trunc });
        }
        let padded = f.resized(self.trunc);
        Ok(FockVector::new(self.entries.mul_vec(padded.coeffs())))
    }
}

/// `C e^{D z} f(A z + B)`.
pub fn apply_pointwise<T: Real>(s: &WcoSymbols<T>, f: &FockVector<T>, z: Complex<T>) -> Complex<T> {
    s.psi(z) * evaluate(f, s.phi(z))
}

/// `(conj A, conj D, conj C, conj B)`.
pub fn adjoint_symbols<T: Real>(s: &WcoSymbols<T>) -> AdjointSymbols<T> {
    s.hat()
}

/// Precomputed factorial and power tables for entries with indices below `size`.
struct EntryTables<T> {
    weight: Scaled<T>,
    sqrt_fact: Vec<Scaled<T>>,
    inv_fact: Vec<Scaled<T>>,
    pow_a: Vec<Scaled<T>>,
    pow_b: Vec<Scaled<T>>,
    pow_d: Vec<Scaled<T>>,
    zero_a: bool,
    zero_b: bool,
    zero_d: bool,
    // ln|A| - ln|B| - ln|D|, and A / (B D) with its inverse
    ln_rho: f64,
    rho: Option<(DComplex<T>, DComplex<T>)>,
    cutoff: T,
}

fn powers<T: Real>(z: Complex<T>, size: usize) -> Vec<Scaled<T>> {
    let base = Scaled::from_complex(z);
    let mut out = Vec::with_capacity(size);
    let mut cur = Scaled::one();
    for _ in 0..size {
        out.push(cur);
        cur = cur.mul(base);
    }
    out
}

fn ln_norm<T: Real>(z: Complex<T>) -> f64 {
    z.norm().to_f64().unwrap_or(0.0).ln()
}

impl<T: Real> EntryTables<T> {
    fn new(s: &WcoSymbols<T>, size: usize) -> Self {
        let (a, b, d) = (*s.slope(), *s.offset(), *s.weight_rate());
        let mut sqrt_fact = Vec::with_capacity(size);
        let mut inv_fact = Vec::with_capacity(size);
        let mut sf = Scaled::one();
        let mut inf = Scaled::one();
        for k in 0..size {
            if k > 0 {
                let kf = T::from_usize(k).unwrap();
                sf = sf.mul(Scaled::from_dword(DWord::sqrt_of(kf)));
                inf = inf.mul(Scaled::from_dword(DWord::one().div_t(kf)));
            }
            sqrt_fact.push(sf);
            inv_fact.push(inf);
        }
        let is_zero = |z: Complex<T>| z.re == T::zero() && z.im == T::zero();
        let (zero_a, zero_b, zero_d) = (is_zero(a), is_zero(b), is_zero(d));
        let ln_rho = if zero_a || zero_b || zero_d { 0.0 } else { ln_norm(a) - ln_norm(b) - ln_norm(d) };
        let rho = if zero_a || zero_b || zero_d {
            None
        } else {
            let (da, db, dd) = (DComplex::from_complex(a), DComplex::from_complex(b), DComplex::from_complex(d));
            let r = da.div(db.mul(dd));
            let rinv = db.mul(dd).div(da);
            let finite = |x: DComplex<T>| {
                let m = x.max_abs_hi();
                m.is_finite() && m > T::min_positive_value()
            };
            (finite(r) && finite(rinv)).then_some((r, rinv))
        };
        let eps = T::epsilon();
        Self {
            weight: Scaled::from_complex(*s.weight_coeff()),
            sqrt_fact,
            inv_fact,
            pow_a: powers(a, size),
            pow_b: powers(b, size),
            pow_d: powers(d, size),
            zero_a,
            zero_b,
            zero_d,
            ln_rho,
            rho,
            cutoff: eps * eps / T::lit(64.0),
        }
    }

    /// The `j`-th term of the closed-form sum for entry `(m, n)`, fully scaled.
    fn term(&self, m: usize, n: usize, j: usize) -> Scaled<T> {
        self.weight
            .mul(self.sqrt_fact[m])
            .mul(self.sqrt_fact[n])
            .mul(self.inv_fact[j])
            .mul(self.inv_fact[n - j])
            .mul(self.inv_fact[m - j])
            .mul(self.pow_a[j])
            .mul(self.pow_b[n - j])
            .mul(self.pow_d[m - j])
    }

    fn entry(&self, m: usize, n: usize) -> Complex<T> {
        self.entry_scaled(m, n).to_complex()
    }

    fn entry_scaled(&self, m: usize, n: usize) -> Scaled<T> {
        let top = m.min(n);
        if self.zero_a || self.zero_b || self.zero_d {
            // 0^0 = 1: at most one exponent pattern survives
            let lo = if self.zero_b { n } else { 0 };
            let lo = if self.zero_d { lo.max(m) } else { lo };
            let hi = if self.zero_a { 0 } else { top };
            if lo > hi || (self.zero_b && n > top) || (self.zero_d && m > top) {
                return Scaled::zero();
            }
            let mut acc = Scaled::zero();
            for j in lo..=hi {
                acc = add_scaled(acc, self.term(m, n, j));
            }
            return acc;
        }
        let Some((rho, rho_inv)) = self.rho else {
            let mut acc = Scaled::zero();
            for j in 0..=top {
                acc = add_scaled(acc, self.term(m, n, j));
            }
            return acc;
        };
        // |t_{j+1} / t_j| = (n-j)(m-j)/(j+1) |rho| decreases in j: the terms are unimodal
        let mut peak = 0;
        while peak < top {
            let ratio = (((n - peak) * (m - peak)) as f64 / (peak + 1) as f64).ln() + self.ln_rho;
            if ratio < 0.0 {
                break;
            }
            peak += 1;
        }
        let lead = self.term(m, n, peak);
        let mut sum = DComplex::one();
        let mut rel = DComplex::one();
        for j in peak..top {
            let f = DWord::new(T::from_usize((n - j) * (m - j)).unwrap()).div_t(T::from_usize(j + 1).unwrap());
            rel = rel.mul(rho).scale(f);
            sum = sum.add(rel);
            if rel.max_abs_hi() < self.cutoff {
                break;
            }
        }
        rel = DComplex::one();
        for j in (1..=peak).rev() {
            let f = DWord::new(T::from_usize(j).unwrap()).div_t(T::from_usize((n - j + 1) * (m - j + 1)).unwrap());
            rel = rel.mul(rho_inv).scale(f);
            sum = sum.add(rel);
            if rel.max_abs_hi() < self.cutoff {
                break;
            }
        }
        lead.mul_dcomplex(sum)
    }
}

fn add_scaled<T: Real>(x: Scaled<T>, y: Scaled<T>) -> Scaled<T> {
    if x.is_zero() {
        return y;
    }
    if y.is_zero() {
        return x;
    }
    let (big, small) = if x.exp >= y.exp { (x, y) } else { (y, x) };
    let shift = small.exp - big.exp;
    if shift < -200 {
        return big;
    }
    let f = DWord::new(crate::dword::ldexp(T::one(), shift));
    Scaled::from_dcomplex(big.value.add(small.value.scale(f))).mul(Scaled { value: DComplex::one(), exp: big.exp })
}

/// Single closed-form entry `<W e_n, e_m>`.
pub fn entry_closed_form<T: Real>(s: &WcoSymbols<T>, m: usize, n: usize) -> Complex<T> {
    EntryTables::new(s, m.max(n) + 1).entry(m, n)
}

/// Rectangular block `<W e_n, e_m>` for `m < rows`, `n < cols`.
pub fn matrix_block<T: Real>(s: &WcoSymbols<T>, rows: usize, cols: usize) -> CMatrix<T> {
    let tables = EntryTables::new(s, rows.max(cols));
    CMatrix::from_fn(rows, cols, |m, n| tables.entry(m, n))
}

/// [`matrix_block`] without the final rounding, row-major.
pub fn matrix_block_dword<T: Real>(s: &WcoSymbols<T>, rows: usize, cols: usize) -> Vec<DComplex<T>> {
    use rayon::prelude::*;
    let tables = EntryTables::new(s, rows.max(cols));
    (0..rows * cols).into_par_iter().map(|k| tables.entry_scaled(k / cols, k % cols).to_dcomplex()).collect()
}

/// Truncated matrix of `W` on `span{e_0, ..., e_{N-1}}`.
///
/// Entries follow `C sqrt(m!/n!) sum_j binom(n, j) A^j B^{n-j} D^{m-j} / (m-j)!`,
/// summed in double-word arithmetic outward from the dominant term so each
/// entry carries relative (not merely absolute) accuracy.
pub fn build_matrix<T: Real>(s: &WcoSymbols<T>, n: usize) -> Result<OperatorMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidTruncation("N must be at least 1".into()));
    }
    Ok(OperatorMatrix { trunc: n, entries: matrix_block(s, n, n) })
}

/// `W* K_z^{[m]} = sum_j binom(m, j) conj(psi^{(m-j)}(z) A^j) K_{phi(z)}^{[j]}`.
pub fn kernel_action_adjoint<T: Real>(s: &WcoSymbols<T>, spec: KernelSpec<T>, n: usize) -> Result<FockVector<T>> {
    if n <= spec.m {
        return Err(Error::InvalidTruncation(format!("N = {n} must exceed the derivative order {}", spec.m)));
    }
    let w = s.phi(spec.z);
    let mut out = FockVector::zeros(n);
    let mut binom = T::one();
    let mut a_pow = Complex::new(T::one(), T::zero());
    for j in 0..=spec.m {
        if j > 0 {
            binom = binom * T::from_usize(spec.m - j + 1).unwrap() / T::from_usize(j).unwrap();
            a_pow = a_pow * s.slope();
        }
        let coeff = (s.psi_derivative(spec.z, spec.m - j) * a_pow).conj() * binom;
        let k = kernel_vector(KernelSpec::derivative(w, j), n)?;
        out = out.add(&k.scale(coeff));
    }
    Ok(out)
}

/// `W K_z = C e^{B conj(z)} K_{conj(A) z + conj(D)}`.
pub fn kernel_action_forward<T: Real>(s: &WcoSymbols<T>, z: Complex<T>, n: usize) -> Result<FockVector<T>> {
    let point = s.slope().conj() * z + s.weight_rate().conj();
    let factor = *s.weight_coeff() * (*s.offset() * z.conj()).exp();
    Ok(kernel_vector(KernelSpec::plain(point), n)?.scale(factor))
}

/// `||W K_z|| = |C| e^{Re(B conj z)} e^{|conj(A) z + conj(D)|^2 / 2}`.
pub fn forward_kernel_norm<T: Real>(s: &WcoSymbols<T>, z: Complex<T>) -> T {
    let point = s.slope().conj() * z + s.weight_rate().conj();
    let half = T::lit(0.5);
    s.weight_coeff().norm() * ((*s.offset() * z.conj()).re + half * point.norm_sqr()).exp()
}

/// `||W* K_z|| = |psi(z)| e^{|phi(z)|^2 / 2}`.
pub fn adjoint_kernel_norm<T: Real>(s: &WcoSymbols<T>, z: Complex<T>) -> T {
    let half = T::lit(0.5);
    s.weight_coeff().norm() * ((*s.weight_rate() * z).re + half * s.phi(z).norm_sqr()).exp()
}

/// Whether `(A, B, D)` satisfies `D = (A conj(B) - conj(B) + D) / conj(A)` within `tol`.
pub fn dom_dom_hypothesis<T: Real>(s: &WcoSymbols<T>, tol: T) -> bool {
    let (a, b, d) = (*s.slope(), *s.offset(), *s.weight_rate());
    let rhs = (a * b.conj() - b.conj() + d) / a.conj();
    (d - rhs).norm() <= tol * T::one().max(d.norm()).max(rhs.norm())
}

/// The general expression `e^{-|(B - conj D)/A|^2 + 2 Re((|B|^2 - conj(B) conj(D)) / conj(A))}`.
pub fn dom_dom_expression<T: Real>(s: &WcoSymbols<T>) -> T {
    let (a, b, d) = (*s.slope(), *s.offset(), *s.weight_rate());
    let two = T::one() + T::one();
    let first = ((b - d.conj()) / a).norm_sqr();
    let second = ((Complex::new(b.norm_sqr(), T::zero()) - b.conj() * d.conj()) / a.conj()).re;
    (two * second - first).exp()
}

/// The constant `M` with `||W_hat f||^2 = M ||W f||^2` on the common domain.
///
/// `M = e^{|B|^2 - |D|^2}` when `A = 1`; `M = 1` for any other admissible `A`.
pub fn dom_dom_factor<T: Real>(s: &WcoSymbols<T>, tol: T) -> Result<T> {
    let a = *s.slope();
    if a.norm() <= tol {
        return Err(Error::Inapplicable("dom-dom factor needs A != 0"));
    }
    if !dom_dom_hypothesis(s, tol) {
        return Err(Error::HypothesisViolated(format!(
            "D = (A conj(B) - conj(B) + D) / conj(A) fails for A = {}, B = {}, D = {}",
            a,
            s.offset(),
            s.weight_rate()
        )));
    }
    if (a - Complex::new(T::one(), T::zero())).norm() <= tol {
        Ok((s.offset().norm_sqr() - s.weight_rate().norm_sqr()).exp())
    } else {
        Ok(T::one())
    }
}

/// `W f` for a polynomial `f`, as a full coefficient series.
///
/// `f o phi` is expanded exactly, then multiplied by the series of `e^{Dz}`;
/// the output runs until the ratio-test tail bound on the remaining squared
/// norm drops below `1e-28` of the accumulated squared norm.
pub fn apply_polynomial<T: Real>(s: &WcoSymbols<T>, f: &FockVector<T>) -> FockVector<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let Some(deg) = f.degree() else {
        return FockVector::zeros(1);
    };
    let (a, b, d) = (*s.slope(), *s.offset(), *s.weight_rate());
    // q_j = sqrt(j!) [z^j] f(Az + B) = sum_k f_k sqrt(j!/k!) binom(k, j) A^j B^{k-j}
    let mut q = vec![zero; deg + 1];
    for (k, fk) in f.coeffs().iter().enumerate().take(deg + 1) {
        if *fk == zero {
            continue;
        }
        // c_j = sqrt(j!/k!) binom(k, j) B^{k-j}, stepping j from k down to 0
        let mut c = Complex::new(T::one(), T::zero());
        let mut a_pow = vec![Complex::new(T::one(), T::zero()); k + 1];
        for j in 1..=k {
            a_pow[j] = a_pow[j - 1] * a;
        }
        for j in (0..=k).rev() {
            q[j] = q[j] + *fk * c * a_pow[j];
            if j > 0 {
                // c_{j-1} = c_j * B * j / ((k - j + 1) sqrt(j))
                let jf = T::from_usize(j).unwrap();
                c = c * b * jf.sqrt() / T::from_usize(k - j + 1).unwrap();
            }
        }
    }
    if d == zero {
        return FockVector::new(q).scale(*s.weight_coeff());
    }
    // out_n = sum_j q_j D^{n-j} sqrt(n!/j!) / (n-j)!
    let mut coef = q.iter().map(|_| Complex::new(T::one(), T::zero())).collect::<Vec<_>>();
    let mut out = Vec::new();
    let mut total = T::zero();
    let tiny = T::lit(1e-28);
    let dn = d.norm();
    for n in 0.. {
        let mut v = zero;
        for j in 0..=deg.min(n) {
            if n > j {
                // coef_j(n) = coef_j(n-1) * D sqrt(n) / (n - j)
                let nf = T::from_usize(n).unwrap();
                coef[j] = coef[j] * d * nf.sqrt() / T::from_usize(n - j).unwrap();
            }
            v = v + q[j] * coef[j];
        }
        let mag = v.norm_sqr();
        total = total + mag;
        out.push(v);
        if n > deg {
            let nf = T::from_usize(n + 1).unwrap();
            let r = dn * nf.sqrt() / (nf - T::from_usize(deg).unwrap());
            if r < T::one() {
                let r2 = r * r;
                let tail = mag * r2 / (T::one() - r2);
                if tail <= tiny * total {
                    break;
                }
            }
        }
    }
    FockVector::new(out).scale(*s.weight_coeff())
}

/// Closed-form inputs whose domain membership is decidable.
#[derive(Debug, Clone)]
pub enum ClosedForm<T> {
    Polynomial(FockVector<T>),
    Kernel(Complex<T>),
    Gaussian(GaussianSymbol<T>),
}

/// Whether `f` lies in `F^2` and `psi * (f o phi)` lies in `F^2`.
pub fn in_domain<T: Real>(s: &WcoSymbols<T>, f: &ClosedForm<T>) -> bool {
    match f {
        // polynomial * exponential and scaled kernels are always in F^2
        ClosedForm::Polynomial(_) | ClosedForm::Kernel(_) => true,
        ClosedForm::Gaussian(g) => gaussian_in_fock(g) && gaussian_in_fock(&compose_gaussian(s, g)),
    }
}

/// Smallest `||W f|| / ||f||` over random nonzero polynomials of the given degree.
pub fn injectivity_probe<T: Real>(s: &WcoSymbols<T>, trials: usize, degree: usize, seed: u64) -> Result<T> {
    if s.slope().norm() == T::zero() {
        return Err(Error::Inapplicable("injectivity needs a non-constant phi"));
    }
    let mut worst = T::infinity();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let coeffs: Vec<Complex<T>> = (0..=degree)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        let f = FockVector::new(coeffs);
        let wf = apply_polynomial(s, &f);
        worst = worst.min(wf.norm() / f.norm());
    }
    Ok(worst)
}
