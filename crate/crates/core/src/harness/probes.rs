use num_complex::Complex;
use serde::Serialize;

use super::random::trial_rng;
use crate::classify::{fixed_point_data, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, spectral_norm};
use crate::operator::build_matrix;
use crate::symbols::WcoSymbols;

/// Final ratio below which norms are taken to have settled.
pub const PLATEAU_RATIO: f64 = 1.05;
/// Final ratio above which norms are taken to grow without bound.
pub const GROWTH_RATIO: f64 = 1.2;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Plateau,
    Growth,
    Indeterminate,
}

/// Truncated spectral norms and their consecutive ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub truncations: Vec<usize>,
    pub norms: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
}

/// Power-iteration norms of `build_matrix(s, N)` for increasing `N`.
pub fn probe_boundedness(s: &WcoSymbols<f64>, ns: &[usize], seed: u64) -> Result<GrowthReport> {
    if ns.len() < 2 || ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::Precondition("truncations must be increasing, positive, and at least two".into()));
    }
    let mut norms = Vec::with_capacity(ns.len());
    let mut converged = true;
    for (k, &n) in ns.iter().enumerate() {
        let m = build_matrix(s, n)?;
        let mut rng = trial_rng(seed, k as u64);
        let p = spectral_norm(m.entries(), POWER_TOL, POWER_MAX_ITER, &mut rng);
        converged &= p.converged && p.norm.is_finite();
        norms.push(p.norm);
    }
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let last = *ratios.last().unwrap();
    let verdict = if !converged || !last.is_finite() {
        Verdict::Indeterminate
    } else if last < PLATEAU_RATIO {
        Verdict::Plateau
    } else if last > GROWTH_RATIO {
        Verdict::Growth
    } else {
        Verdict::Indeterminate
    };
    Ok(GrowthReport { truncations: ns.to_vec(), norms, ratios, verdict })
}

/// For each prediction `psi(d) A^m`, `m < k`, the eigenvalue of the `N x N`
/// truncation closest to it.
pub fn probe_eigenvalues(s: &WcoSymbols<f64>, n: usize, k: usize) -> Result<Vec<(Complex<f64>, Complex<f64>)>> {
    if s.slope().norm() >= 1.0 {
        return Err(Error::Precondition("eigenvalue probe needs |A| < 1".into()));
    }
    let fp = fixed_point_data(s, CLASSIFY_TOL).ok_or_else(|| Error::Precondition("A = 1 has no fixed point".into()))?;
    let m = build_matrix(s, n)?;
    let evs = eigenvalues(m.entries())?;
    let mut pow = Complex::new(1.0, 0.0);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let pred = fp.eigenvalue * pow;
        let best = evs
            .iter()
            .copied()
            .min_by(|x, y| (x - pred).norm().total_cmp(&(y - pred).norm()))
            .ok_or_else(|| Error::NumericFailure("empty spectrum".into()))?;
        out.push((pred, best));
        pow *= s.slope();
    }
    Ok(out)
}
