use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::probes::{probe_boundedness, probe_eigenvalues, Verdict};
use super::random::{gaussian, random_symbols, slope_in, trial_rng, Stratum};
use super::{RecordKind, SuiteConfig, SuiteResult, TrialRecord};
use crate::classify::{is_bounded, is_cohyponormal, is_hermitian, is_normal, CLASSIFY_TOL};
use crate::conjugation::{check_involution_isometry, sandwich_deviation, ConjugationOperator};
use crate::error::Result;
use crate::fock::FockVector;
use crate::linalg::max_mixed_deviation;
use crate::operator::{
    adjoint_kernel_norm, adjoint_symbols, apply_polynomial, build_matrix, dom_dom_factor, forward_kernel_norm,
};
use crate::quadrature::{quadrature_inner, QuadratureGrid, DEFAULT_ORDER};
use crate::symbols::{compose_gaussian, gaussian_in_fock, make_conjugation, ConjugationTriple, GaussianSymbol, WcoSymbols};

type C64 = Complex<f64>;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn sym(a: C64, b: C64, cc: C64, d: C64) -> WcoSymbols<f64> {
    WcoSymbols::new(a, b, cc, d).expect("fixture has C != 0")
}

fn real(a: f64, b: f64, cc: f64, d: f64) -> WcoSymbols<f64> {
    sym(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0))
}

fn sym_json(s: &WcoSymbols<f64>) -> Value {
    serde_json::to_value(s.to_json()).unwrap()
}

fn triple_json(t: &ConjugationTriple<f64>) -> Value {
    serde_json::to_value(t.to_json()).unwrap()
}

fn record(suite: &str, trial: usize, input: Value, deviation: f64, passed: bool, detail: Value) -> TrialRecord {
    TrialRecord { suite: suite.to_string(), trial, kind: RecordKind::Identity, input, deviation, passed, detail }
}

fn of_kind(mut r: TrialRecord, kind: RecordKind) -> TrialRecord {
    r.kind = kind;
    r
}

/// `build_matrix(adjoint(s))` against the conjugate transpose of `build_matrix(s)`.
pub fn suite_adjoint(cfg: &SuiteConfig) -> SuiteResult {
    let fixtures = [
        WcoSymbols::identity(),
        sym(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)),
        real(1.0, 1.0, 1.0, 1.0),
    ];
    let check = |s: &WcoSymbols<f64>| {
        let w = build_matrix(s, cfg.trunc).expect("trunc validated");
        let h = build_matrix(&adjoint_symbols(s), cfg.trunc).expect("trunc validated");
        max_mixed_deviation(&h.into_entries(), &w.entries().conj_transpose())
    };
    let mut records: Vec<TrialRecord> = fixtures
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let dev = check(s);
            record("adjoint", k, json!({"symbols": sym_json(s), "fixture": true}), dev, dev < cfg.tol.identity, Value::Null)
        })
        .collect();
    let off = records.len();
    records.extend((0..cfg.trials).into_par_iter().map(|k| {
        let stratum = Stratum::of_trial(k);
        let s = random_symbols(&mut trial_rng(cfg.seed, k as u64), stratum);
        let dev = check(&s);
        record(
            "adjoint",
            off + k,
            json!({"symbols": sym_json(&s), "stratum": stratum.name()}),
            dev,
            dev < cfg.tol.identity,
            Value::Null,
        )
    }).collect::<Vec<_>>());
    SuiteResult::from_records("adjoint", records)
}

/// Symbols for the quadrature comparison: the integrand `W e_n conj(e_m) e^{-|z|^2}`
/// must be resolved by the grid, so `A`, `B`, `D` are kept moderate.
fn oracle_symbols(seed: u64, k: usize) -> WcoSymbols<f64> {
    let mut rng = trial_rng(seed, k as u64);
    let a = slope_in(&mut rng, Stratum::of_trial(k)) * 0.75;
    let b = gaussian(&mut rng, 0.5);
    let cc = gaussian(&mut rng, 1.0);
    let d = gaussian(&mut rng, 0.5);
    let cc = if cc.norm() < 1e-3 { c(1.0, 0.0) } else { cc };
    sym(a, b, cc, d)
}

/// Closed-form entries against Gauss–Hermite quadrature for `n, m <= 12`.
pub fn suite_oracle(cfg: &SuiteConfig) -> Result<SuiteResult> {
    const MAX_INDEX: usize = 12;
    let grid = QuadratureGrid::<f64>::new(DEFAULT_ORDER)?;
    let size = (MAX_INDEX + 1).min(cfg.trunc);
    let mut inv_sqrt_fact = vec![1.0f64; size];
    for k in 1..size {
        inv_sqrt_fact[k] = inv_sqrt_fact[k - 1] / (k as f64).sqrt();
    }
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let s = oracle_symbols(cfg.seed, k);
            let w = build_matrix(&s, size).expect("size >= 1");
            let mut dev = 0.0f64;
            let mut worst = (0, 0);
            for n in 0..size {
                let p = |z: C64| s.psi(z) * s.phi(z).powu(n as u32) * inv_sqrt_fact[n];
                for (m, &wm) in inv_sqrt_fact.iter().enumerate() {
                    let q = |z: C64| z.powu(m as u32) * wm;
                    let quad = match quadrature_inner(p, q, &grid) {
                        Ok(v) => v,
                        Err(_) => c(f64::NAN, f64::NAN),
                    };
                    let closed = w.entry(m, n);
                    let d = (quad - closed).norm() / closed.norm().max(1.0);
                    if d.is_nan() || d > dev {
                        dev = d;
                        worst = (m, n);
                    }
                }
            }
            record(
                "oracle",
                k,
                json!({"symbols": sym_json(&s)}),
                dev,
                dev < cfg.tol.oracle,
                json!({"worst_entry": [worst.0, worst.1]}),
            )
        })
        .collect();
    Ok(SuiteResult::from_records("oracle", records))
}

/// The `(theta, r)` grid: 10 angles in `[0, 2 pi)` times 10 radii in `[0, 2]`.
fn conjugation_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            out.push((std::f64::consts::TAU * i as f64 / 10.0, 2.0 * j as f64 / 9.0));
        }
    }
    out
}

/// Involution and isometry of `C_{a,b,c}` on random vectors over the `(theta, r)` grid.
pub fn suite_conjugation(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let per_triple = cfg.trials.min(10);
    let grid = conjugation_grid();
    let records: Result<Vec<TrialRecord>> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(theta, r))| {
            let t = make_conjugation(theta, r)?;
            let op = ConjugationOperator::new(t.clone(), cfg.trunc)?;
            let rep = check_involution_isometry(&op, per_triple, cfg.seed.wrapping_add(k as u64));
            let dev = rep.max_involution.max(rep.max_isometry);
            Ok(record(
                "conjugation",
                k,
                json!({"theta": theta, "r": r, "triple": triple_json(&t)}),
                dev,
                dev < cfg.tol.conjugation,
                json!({"involution": rep.max_involution, "isometry": rep.max_isometry, "vectors": per_triple}),
            ))
        })
        .collect();
    Ok(SuiteResult::from_records("conjugation", records?))
}

/// Sandwich identity for `D = aB - bA + b`, each paired with a control whose
/// `D` is shifted by `0.1`. A pair passes only if both directions hold.
pub fn suite_c_selfadjoint(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let mut cases: Vec<(ConjugationTriple<f64>, WcoSymbols<f64>)> = vec![
        (ConjugationTriple::standard(), sym(c(3.0, 0.0), c(1.0, 1.0), c(2.0, 0.0), c(1.0, 1.0))),
        (make_conjugation(0.0, 1.0)?, sym(c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0))),
    ];
    let random = cfg.trials.min(24);
    for k in 0..random {
        let mut rng = trial_rng(cfg.seed, k as u64);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let r = rng.random_range(0.0..2.0);
        let t = make_conjugation(theta, r)?;
        let a = slope_in(&mut rng, Stratum::of_trial(k));
        let b = gaussian(&mut rng, 1.0);
        let cc = gaussian(&mut rng, 1.0);
        let cc = if cc.norm() < 1e-3 { c(1.0, 0.0) } else { cc };
        let d = *t.rotation() * b - *t.shift() * a + *t.shift();
        cases.push((t, sym(a, b, cc, d)));
    }
    let records: Result<Vec<TrialRecord>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, (t, s))| {
            let ok = sandwich_deviation(t, s, cfg.trunc, cfg.guard)?;
            let shifted = s.with_weight_rate(*s.weight_rate() + c(0.1, 0.0));
            let ctl = sandwich_deviation(t, &shifted, cfg.trunc, cfg.guard)?;
            let passed = ok.deviation < cfg.tol.conjugation && ctl.deviation > cfg.tol.control;
            Ok(record(
                "cselfadjoint",
                k,
                json!({"triple": triple_json(t), "symbols": sym_json(s)}),
                ok.deviation,
                passed,
                json!({"control_deviation": ctl.deviation, "block": ok.block, "working": ok.working}),
            ))
        })
        .collect();
    Ok(SuiteResult::from_records("cselfadjoint", records?))
}

/// Twelve tuples, six Hermitian and six not.
pub fn hermitian_fixtures() -> Vec<WcoSymbols<f64>> {
    vec![
        sym(c(0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)),
        WcoSymbols::identity(),
        sym(c(-0.7, 0.0), c(1.0, 2.0), c(-3.0, 0.0), c(1.0, -2.0)),
        sym(c(2.0, 0.0), c(0.0, -0.5), c(0.5, 0.0), c(0.0, 0.5)),
        real(1.0, 1.0, 1.0, 1.0),
        real(0.0, 1.5, 1.0, 1.5),
        sym(c(0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 1.0)),
        sym(c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        sym(c(0.5, 0.0), c(1.0, 0.0), c(0.0, 2.0), c(1.0, 0.0)),
        real(1.0, 1.0, 1.0, -1.0),
        sym(c(0.3, 0.1), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        real(2.0, 1.0, 1.0, 0.5),
    ]
}

/// Conjugate symmetry of the matrix against the Hermitian predicate.
pub fn suite_hermitian(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let records: Result<Vec<TrialRecord>> = hermitian_fixtures()
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let m = build_matrix(s, cfg.trunc)?;
            let dev = max_mixed_deviation(m.entries(), &m.entries().conj_transpose());
            let predicate = is_hermitian(s, &CLASSIFY_TOL);
            let passed = if predicate { dev < cfg.tol.identity } else { dev > cfg.tol.control };
            let kind = if predicate { RecordKind::Identity } else { RecordKind::Control };
            Ok(of_kind(record("hermitian", k, json!({"symbols": sym_json(s), "hermitian": predicate}), dev, passed, Value::Null), kind))
        })
        .collect();
    Ok(SuiteResult::from_records("hermitian", records?))
}

fn normal_with(a: C64, b: C64, cc: C64) -> WcoSymbols<f64> {
    sym(a, b, cc, b.conj() * (c(1.0, 0.0) - a) / (c(1.0, 0.0) - a.conj()))
}

/// Closed-form kernel norms: equality for normal symbols, domination with the
/// exact gap at `z = 0` for cohyponormal ones.
pub fn suite_normality(cfg: &SuiteConfig) -> SuiteResult {
    let mut normal = vec![
        sym(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)),
        real(2.0, 1.0, 1.0, 1.0),
        sym(c(0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)),
        WcoSymbols::identity(),
    ];
    let mut cohypo = vec![real(1.0, 2.0, 1.0, 1.0)];
    for k in 0..4 {
        let mut rng = trial_rng(cfg.seed, k as u64);
        let a = slope_in(&mut rng, [Stratum::Inside, Stratum::Outside][k % 2]);
        normal.push(normal_with(a, gaussian(&mut rng, 1.0), gaussian(&mut rng, 1.0)));
        let b = gaussian(&mut rng, 1.0);
        let d = b * rng.random_range(0.0..0.9) * Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        cohypo.push(sym(c(1.0, 0.0), b, gaussian(&mut rng, 1.0), d));
    }
    let points: Vec<C64> = {
        let mut rng = trial_rng(cfg.seed, u64::MAX);
        (0..cfg.trials.max(1))
            .map(|_| Complex::from_polar(3.0 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect()
    };
    let mut records = Vec::new();
    for s in &normal {
        let classified = is_normal(s, &CLASSIFY_TOL);
        let mut dev = 0.0f64;
        let mut worst = c(0.0, 0.0);
        for &z in points.iter().chain(std::iter::once(&c(0.0, 0.0))) {
            let (f, b) = (forward_kernel_norm(s, z), adjoint_kernel_norm(s, z));
            let d = (f - b).abs() / f.max(1.0);
            if d.is_nan() || d > dev {
                dev = d;
                worst = z;
            }
        }
        let k = records.len();
        records.push(record(
            "normality",
            k,
            json!({"symbols": sym_json(s), "kind": "normal"}),
            dev,
            classified && dev < cfg.tol.normality,
            json!({"worst_z": worst}),
        ));
    }
    for s in &cohypo {
        let classified = is_cohyponormal(s, &CLASSIFY_TOL) && !is_normal(s, &CLASSIFY_TOL);
        let mut dominated = true;
        let mut violation = Value::Null;
        for &z in &points {
            let (f, b) = (forward_kernel_norm(s, z), adjoint_kernel_norm(s, z));
            if b < f * (1.0 - 1e-12) {
                dominated = false;
                violation = json!(z);
            }
        }
        let gap = adjoint_kernel_norm(s, c(0.0, 0.0)) - forward_kernel_norm(s, c(0.0, 0.0));
        let cn = s.weight_coeff().norm();
        let want = cn * ((0.5 * s.offset().norm_sqr()).exp() - (0.5 * s.weight_rate().norm_sqr()).exp());
        let dev = (gap - want).abs() / want.abs().max(1.0);
        let k = records.len();
        records.push(record(
            "normality",
            k,
            json!({"symbols": sym_json(s), "kind": "cohyponormal"}),
            dev,
            classified && dominated && gap > 0.0 && dev < cfg.tol.gap,
            json!({"gap": gap, "expected_gap": want, "violating_z": violation}),
        ));
    }
    SuiteResult::from_records("normality", records)
}

/// Norm-ratio identity `||W_hat f||^2 = M ||W f||^2` on random polynomials of degree <= 10.
pub fn suite_domdom(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let fixtures = [
        real(1.0, 2.0, 1.0, 1.0),
        real(2.0, 1.0, 1.0, 1.0),
        normal_with(c(0.5, 0.5), c(1.0, -1.0), c(1.0, 0.0)),
        sym(c(1.0, 0.0), c(0.5, 1.0), c(0.5, 0.5), c(-1.0, 0.25)),
    ];
    let per_fixture = cfg.trials.min(20);
    let mut jobs = Vec::new();
    for (fi, s) in fixtures.iter().enumerate() {
        for k in 0..per_fixture {
            jobs.push((fi, s.clone(), k));
        }
    }
    let records: Result<Vec<TrialRecord>> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, (fi, s, k))| {
            let m = dom_dom_factor(s, CLASSIFY_TOL)?;
            let mut rng = trial_rng(cfg.seed, (*fi * 1000 + *k) as u64);
            let degree = rng.random_range(0..=10usize);
            let f = FockVector::new((0..=degree).map(|_| gaussian(&mut rng, 1.0)).collect());
            let lhs = apply_polynomial(&adjoint_symbols(s), &f).norm_sqr();
            let rhs = m * apply_polynomial(s, &f).norm_sqr();
            let dev = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
            Ok(record(
                "domdom",
                idx,
                json!({"symbols": sym_json(s), "degree": degree, "trial": k}),
                dev,
                dev < cfg.tol.domdom,
                json!({"M": m}),
            ))
        })
        .collect();
    Ok(SuiteResult::from_records("domdom", records?))
}

/// Four tuples per stratum of `|A|`.
pub fn boundedness_fixtures() -> Vec<WcoSymbols<f64>> {
    vec![
        real(0.5, 0.0, 1.0, 0.0),
        real(0.5, 1.0, 1.0, 1.0),
        sym(c(0.0, 0.3), c(0.5, 0.0), c(2.0, 0.0), c(-0.5, 0.0)),
        real(0.9, 0.2, 1.0, 0.3),
        real(1.0, 1.0, 1.0, -1.0),
        sym(c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        real(1.0, 0.0, 1.0, 0.1),
        real(1.0, 1.0, 1.0, 1.0),
        real(2.0, 0.0, 1.0, 0.0),
        real(1.1, 0.0, 1.0, 0.0),
        sym(c(0.0, 1.5), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        real(2.0, 1.0, 1.0, 1.0),
    ]
}

/// Truncations used by the boundedness probe.
pub const PROBE_TRUNCATIONS: [usize; 4] = [32, 64, 128, 256];

/// Growth probe against the boundedness predicate on the fixture set.
pub fn suite_boundedness(cfg: &SuiteConfig) -> SuiteResult {
    let records: Vec<TrialRecord> = boundedness_fixtures()
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let bounded = is_bounded(s, &CLASSIFY_TOL);
            let (passed, detail, ratio) = match probe_boundedness(s, &PROBE_TRUNCATIONS, cfg.seed) {
                Ok(rep) => {
                    let expected = if bounded { Verdict::Plateau } else { Verdict::Growth };
                    let ratio = *rep.ratios.last().unwrap();
                    (rep.verdict == expected, serde_json::to_value(&rep).unwrap(), ratio)
                }
                Err(e) => (false, json!({"error": e.to_string()}), f64::NAN),
            };
            of_kind(record("boundedness", k, json!({"symbols": sym_json(s), "bounded": bounded}), ratio, passed, detail), RecordKind::Probe)
        })
        .collect();
    SuiteResult::from_records("boundedness", records)
}

/// Leading eigenvalues of truncations against `psi(d) A^m`.
pub fn suite_eigen(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let fixtures = [real(0.5, 1.0, 1.0, 1.0), real(0.5, 0.0, 1.0, 0.0), real(0.0, 1.0, 1.0, 0.0)];
    let mut records = Vec::new();
    for (k, s) in fixtures.iter().enumerate() {
        let pairs = probe_eigenvalues(s, cfg.trunc, 5)?;
        let dev = pairs
            .iter()
            .map(|(p, e)| (p - e).norm() / p.norm().max(f64::MIN_POSITIVE).max(if p.norm() == 0.0 { 1.0 } else { 0.0 }))
            .fold(0.0, f64::max);
        records.push(record(
            "eigen",
            k,
            json!({"symbols": sym_json(s), "k": 5, "N": cfg.trunc}),
            dev,
            dev < cfg.tol.eigen,
            json!({"pairs": pairs.iter().map(|(p, e)| json!({"predicted": p, "computed": e})).collect::<Vec<_>>()}),
        ));
    }
    Ok(SuiteResult::from_records("eigen", records))
}

/// `f = e^{z^2/4}` lies in F^2 while `psi (f o phi) = e^{4z^2 + 2z}` does not,
/// for `phi(z) = 4z`, `psi(z) = e^{2z}`.
pub fn suite_example(_cfg: &SuiteConfig) -> SuiteResult {
    let s = real(4.0, 0.0, 1.0, 2.0);
    let f = GaussianSymbol::real(0.25, 0.0, 0.0);
    let g = compose_gaussian(&s, &f);
    let exponent_dev = (g.quad - c(4.0, 0.0)).norm().max((g.linear - c(2.0, 0.0)).norm()).max(g.constant.norm());
    let passed = gaussian_in_fock(&f) && !gaussian_in_fock(&g) && exponent_dev == 0.0;
    SuiteResult::from_records(
        "example",
        vec![record(
            "example",
            0,
            json!({"symbols": sym_json(&s), "f": {"alpha": f.quad, "beta": f.linear, "gamma": f.constant}}),
            exponent_dev,
            passed,
            json!({
                "f_in_fock": gaussian_in_fock(&f),
                "image": {"alpha": g.quad, "beta": g.linear, "gamma": g.constant},
                "image_in_fock": gaussian_in_fock(&g),
            }),
        )],
    )
}
