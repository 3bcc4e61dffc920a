//! Dense complex matrices, spectral-norm estimation and eigenvalues.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Complex<T> + Sync,
    {
        let data: Vec<Complex<T>> = (0..rows)
            .into_par_iter()
            .flat_map_iter(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Format("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        self.transpose().conj()
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| f(*z)).collect() }
    }

    /// Leading `r x c` block.
    pub fn block(&self, r: usize, c: usize) -> Self {
        let mut b = Self::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                b[(i, j)] = self[(i, j)];
            }
        }
        b
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let n = other.cols;
        let data: Vec<Complex<T>> = (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = vec![Complex::new(T::zero(), T::zero()); n];
                for (k, a) in self.row(i).iter().enumerate() {
                    if a.re == T::zero() && a.im == T::zero() {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(other.row(k)) {
                        *o = *o + a * b;
                    }
                }
                out
            })
            .collect();
        Self { rows: self.rows, cols: n, data }
    }

    /// Entrywise `|.|` product `|A| |B|`, the scale against which rounding in
    /// `A B` is measured.
    pub fn abs_matmul(&self, other: &Self) -> Vec<T> {
        assert_eq!(self.cols, other.rows);
        let n = other.cols;
        (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = vec![T::zero(); n];
                for (k, a) in self.row(i).iter().enumerate() {
                    let aa = a.norm();
                    if aa == T::zero() {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(other.row(k)) {
                        *o = *o + aa * b.norm();
                    }
                }
                out
            })
            .collect()
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `A^H v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a.conj() * vi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Mixed absolute/relative entrywise deviation `max |x - y| / max(1, |x|, |y|)`.
pub fn max_mixed_deviation<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> T {
    assert_eq!((x.rows, x.cols), (y.rows, y.cols));
    x.data
        .iter()
        .zip(&y.data)
        .map(|(a, b)| (a - b).norm() / T::one().max(a.norm()).max(b.norm()))
        .fold(T::zero(), T::max)
}

/// Outcome of a power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration<T> {
    pub norm: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Spectral norm by power iteration on `A^H A` from a random complex start.
///
/// Converged when successive Rayleigh quotients agree to `rel_tol`. The
/// matrix is rescaled by its largest entry first so huge norms stay finite.
pub fn spectral_norm<T: Real, R: Rng>(
    a: &CMatrix<T>,
    rel_tol: T,
    max_iter: usize,
    rng: &mut R,
) -> PowerIteration<T> {
    let scale = a.max_abs();
    if scale == T::zero() || !scale.is_finite() {
        return PowerIteration { norm: scale, iterations: 0, converged: scale == T::zero() };
    }
    let m = a.map(|z| z / scale);
    let mut x: Vec<Complex<T>> = (0..m.cols())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    normalize(&mut x);
    let mut last = T::zero();
    for it in 1..=max_iter {
        let y = m.mul_vec(&x);
        let rq: T = y.iter().map(|z| z.norm_sqr()).sum();
        let mut z = m.adjoint_mul_vec(&y);
        if normalize(&mut z) == T::zero() {
            return PowerIteration { norm: T::zero(), iterations: it, converged: true };
        }
        x = z;
        if it > 1 && (rq - last).abs() <= rel_tol * rq {
            return PowerIteration { norm: rq.sqrt() * scale, iterations: it, converged: true };
        }
        last = rq;
    }
    PowerIteration { norm: last.sqrt() * scale, iterations: max_iter, converged: false }
}

fn normalize<T: Real>(v: &mut [Complex<T>]) -> T {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if n > T::zero() {
        for z in v.iter_mut() {
            *z = *z / n;
        }
    }
    n
}

/// Eigenvalues of a square complex matrix via Householder reduction to
/// Hessenberg form and the single-shift complex QR algorithm (Wilkinson
/// shifts, Givens rotations, exceptional shifts on stagnation).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if a.rows != a.cols {
        return Err(Error::Precondition("eigenvalues need a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NumericFailure("non-finite matrix entry".into()));
    }
    let n = a.rows;
    let mut h = a.clone();
    hessenberg(&mut h);
    let eps = T::epsilon();
    let mut evs = vec![Complex::new(T::zero(), T::zero()); n];
    let mut hi = n;
    let mut iter_since_deflation = 0usize;
    let max_total = 100 * n.max(1);
    let mut total = 0usize;
    while hi > 0 {
        if hi == 1 {
            evs[0] = h[(0, 0)];
            break;
        }
        // find the active unreduced block [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let thresh = if diag > T::zero() { eps * diag } else { eps * frobenius(&h) };
            if sub <= thresh {
                h[(lo, lo - 1)] = Complex::new(T::zero(), T::zero());
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            evs[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total += 1;
        iter_since_deflation += 1;
        if total > max_total {
            return Err(Error::NumericFailure("QR iteration did not converge".into()));
        }
        let shift = if iter_since_deflation % 11 == 10 {
            // exceptional shift
            let s = h[(hi - 1, hi - 2)].norm();
            h[(hi - 1, hi - 1)] + Complex::new(s * T::lit(0.75), s * T::lit(0.5))
        } else {
            wilkinson_shift(h[(hi - 2, hi - 2)], h[(hi - 2, hi - 1)], h[(hi - 1, hi - 2)], h[(hi - 1, hi - 1)])
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(evs)
}

fn frobenius<T: Real>(h: &CMatrix<T>) -> T {
    h.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let two = T::one() + T::one();
    let half_tr = (a + d) / two;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One implicit single-shift QR step on the block `[lo, hi)` using Givens rotations.
fn qr_sweep<T: Real>(h: &mut CMatrix<T>, lo: usize, hi: usize, shift: Complex<T>) {
    let n = h.rows;
    let mut x = h[(lo, lo)] - shift;
    let mut y = h[(lo + 1, lo)];
    for k in lo..hi - 1 {
        let (c, s) = givens(x, y);
        // rows k, k+1 from the left: G^H
        let col_start = if k > lo { k - 1 } else { lo };
        for j in col_start..n {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = a * c + b * s.conj();
            h[(k + 1, j)] = -a * s + b * c;
        }
        // columns k, k+1 from the right: G
        let row_end = (k + 3).min(hi);
        for i in 0..row_end {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s;
            h[(i, k + 1)] = -a * s.conj() + b * c;
        }
        if k + 2 < hi {
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
        }
    }
}

/// Real cosine `c` and complex sine `s` with `[c, conj(s); -s, c] [x; y] = [r; 0]`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (Complex<T>, Complex<T>) {
    let nx = x.norm();
    let ny = y.norm();
    if ny == T::zero() {
        return (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    }
    if nx == T::zero() {
        return (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
    }
    let r = nx.hypot(ny);
    let c = nx / r;
    // s = (x/|x|) conj(y) / r
    let s = (x / nx) * y.conj() / r;
    (Complex::new(c, T::zero()), s.conj())
}

fn hessenberg<T: Real>(h: &mut CMatrix<T>) {
    let n = h.rows;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::new(T::one(), T::zero()) };
        // v = x + phase * |x| e_1
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] = v[0] + phase * alpha_norm;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::one() + T::one();
        // H = I - 2 v v^H / (v^H v); apply H A H
        for j in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (t, vi)| acc + vi.conj() * h[(k + 1 + t, j)]);
            let f = dot * two / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] = h[(k + 1 + t, j)] - vi * f;
            }
        }
        for i in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (t, vi)| acc + h[(i, k + 1 + t)] * vi);
            let f = dot * two / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] = h[(i, k + 1 + t)] - f * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex::new(T::zero(), T::zero());
        }
    }
}
