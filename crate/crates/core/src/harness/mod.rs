//! Verification suites and numerical probes.
//!
//! Every trial draws from its own ChaCha8 stream (`set_stream(trial)`), so
//! trials are order independent, run in parallel, and reproduce bit for bit.

mod probes;
mod random;
mod suites;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub use probes::{probe_boundedness, probe_eigenvalues, GrowthReport, Verdict, PLATEAU_RATIO, GROWTH_RATIO};
pub use random::{random_symbols, trial_rng, Stratum};
pub use suites::{
    boundedness_fixtures, hermitian_fixtures, suite_adjoint, suite_boundedness, suite_c_selfadjoint,
    suite_conjugation, suite_domdom, suite_eigen, suite_example, suite_hermitian, suite_normality, suite_oracle,
};

/// Pass thresholds, one per kind of identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Closed-form matrix identities.
    pub identity: f64,
    /// Closed form against quadrature.
    pub oracle: f64,
    /// Conjugation axioms and sandwich identities.
    pub conjugation: f64,
    /// Minimum deviation a perturbed control must show.
    pub control: f64,
    /// Kernel-norm equalities.
    pub normality: f64,
    /// Closed-form gap at `z = 0`.
    pub gap: f64,
    /// Norm-ratio identity.
    pub domdom: f64,
    /// Eigenvalue predictions (relative).
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            oracle: 1e-9,
            conjugation: 1e-8,
            control: 1e-3,
            normality: 1e-9,
            gap: 1e-12,
            domdom: 1e-8,
            eigen: 1e-6,
        }
    }
}

impl Tolerances {
    /// Replaces every pass threshold (not the control floor) by `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self {
            identity: tol,
            oracle: tol,
            conjugation: tol,
            normality: tol,
            gap: tol,
            domdom: tol,
            eigen: tol,
            ..Self::default()
        }
    }
}

/// Shared configuration for all suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub trunc: usize,
    pub guard: usize,
    pub tol: Tolerances,
    pub seed: u64,
    pub trials: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { trunc: crate::fock::DEFAULT_TRUNC, guard: 16, tol: Tolerances::default(), seed: 0, trials: 100 }
    }
}

impl SuiteConfig {
    pub fn new(trunc: usize, guard: usize, tol: Tolerances, seed: u64, trials: usize) -> Result<Self> {
        let cfg = Self { trunc, guard, tol, seed, trials };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.guard >= self.trunc {
            return Err(Error::InvalidTruncation(format!("guard {} must be below N = {}", self.guard, self.trunc)));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// What a trial's `deviation` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    /// Residual of an identity; must be small.
    Identity,
    /// Deviation of a case built to break the identity; must be large.
    Control,
    /// A heuristic probe statistic (e.g. a norm ratio).
    Probe,
}

/// One trial: its input, deviation and verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub suite: String,
    pub trial: usize,
    pub kind: RecordKind,
    pub input: Value,
    pub deviation: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

/// Outcome of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    /// Largest identity residual (control and probe records excluded).
    pub max_deviation: f64,
    pub trials: usize,
    /// Inputs of the failing trials.
    pub failures: Vec<Value>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl SuiteResult {
    pub(crate) fn from_records(suite: &str, records: Vec<TrialRecord>) -> Self {
        let max_deviation = records.iter().filter(|r| r.kind == RecordKind::Identity).map(|r| r.deviation).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let failures: Vec<Value> = records.iter().filter(|r| !r.passed).map(|r| r.input.clone()).collect();
        Self {
            suite: suite.to_string(),
            passed: failures.is_empty() && !records.is_empty(),
            max_deviation,
            trials: records.len(),
            failures,
            records,
        }
    }

    /// JSON lines: one per trial, then the summary (tagged `"summary": true`).
    pub fn json_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.records.iter().map(|r| sorted_json(&serde_json::to_value(r).unwrap())).collect();
        let mut summary = serde_json::to_value(self).unwrap();
        summary["summary"] = Value::Bool(true);
        out.push(sorted_json(&summary));
        out
    }
}

/// Serializes with object keys in sorted order.
pub fn sorted_json(v: &Value) -> String {
    // serde_json's default map is a BTreeMap, so a round trip through Value sorts keys
    serde_json::to_string(&sorted(v)).unwrap()
}

fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<_> = m.keys().collect();
            keys.sort();
            Value::Object(keys.into_iter().map(|k| (k.clone(), sorted(&m[k]))).collect())
        }
        Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "adjoint",
    "oracle",
    "conjugation",
    "cselfadjoint",
    "hermitian",
    "normality",
    "domdom",
    "boundedness",
    "eigen",
    "example",
];

/// Runs a suite by name.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    match name {
        "adjoint" => Ok(suite_adjoint(cfg)),
        "oracle" => suite_oracle(cfg),
        "conjugation" => suite_conjugation(cfg),
        "cselfadjoint" => suite_c_selfadjoint(cfg),
        "hermitian" => suite_hermitian(cfg),
        "normality" => Ok(suite_normality(cfg)),
        "domdom" => suite_domdom(cfg),
        "boundedness" => Ok(suite_boundedness(cfg)),
        "eigen" => suite_eigen(cfg),
        "example" => Ok(suite_example(cfg)),
        other => Err(Error::Parse(format!("unknown suite '{other}' (expected one of {}, all)", SUITES.join(", ")))),
    }
}
