//! `focklab`: classify symbols, export matrices, run verification suites and
//! emit plot-ready probe data.
//!
//! Exit codes: 0 success, 1 suite failure, 2 parse or usage error,
//! 3 invariant or hypothesis violation, 4 I/O failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use focklab::classify::{classify, CLASSIFY_TOL};
use focklab::export::{write_eigen_csv, write_growth_csv, write_kernel_csv, write_matrix_csv, write_matrix_json, KernelSample};
use focklab::harness::{probe_boundedness, probe_eigenvalues, run_suite, sorted_json, SuiteConfig, Tolerances, SUITES};
use focklab::operator::{adjoint_kernel_norm, build_matrix, forward_kernel_norm};
use focklab::symbols::validate_conjugation;
use focklab::{Error, Symbols, C64};
use serde_json::{json, Value};

mod complex;

use complex::parse_complex;

#[derive(Parser)]
#[command(name = "focklab", version, about = "Weighted composition operators on the Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the operator with symbols (A, B, C, D).
    Classify(ClassifyArgs),
    /// Write the N x N truncated matrix.
    Matrix(MatrixArgs),
    /// Run verification suites, one JSON line per trial plus a summary.
    Verify(VerifyArgs),
    /// Truncated-norm growth or eigenvalue probes.
    Probe(ProbeArgs),
    /// Kernel norms ||W K_z|| and ||W* K_z|| on a square grid.
    Kernels(KernelArgs),
}

#[derive(Args)]
struct SymbolArgs {
    /// Slope of phi(z) = A z + B.
    #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
    a: C64,
    /// Offset of phi.
    #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
    b: C64,
    /// Coefficient of psi(z) = C e^{D z}; must be non-zero.
    #[arg(long = "C", value_parser = parse_complex, allow_hyphen_values = true)]
    c: C64,
    /// Rate of psi.
    #[arg(long = "D", value_parser = parse_complex, allow_hyphen_values = true)]
    d: C64,
}

impl SymbolArgs {
    fn symbols(&self) -> Result<Symbols, Error> {
        Symbols::new(self.a, self.b, self.c, self.d)
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    symbols: SymbolArgs,
    /// Rotation of a conjugation C_{a,b,c} to test against.
    #[arg(long = "a", value_parser = parse_complex, allow_hyphen_values = true, requires_all = ["cb", "cc"])]
    ca: Option<C64>,
    #[arg(long = "b", id = "cb", value_parser = parse_complex, allow_hyphen_values = true, requires_all = ["ca", "cc"])]
    cb: Option<C64>,
    #[arg(long = "c", id = "cc", value_parser = parse_complex, allow_hyphen_values = true, requires_all = ["ca", "cb"])]
    cc: Option<C64>,
    /// Tolerance for symbol equalities.
    #[arg(long, default_value_t = CLASSIFY_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    symbols: SymbolArgs,
    /// Truncation order.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 64)]
    trunc: usize,
    /// Guard band excluded from truncated identities.
    #[arg(long, default_value_t = 16)]
    guard: usize,
    /// Single pass threshold replacing the per-identity defaults.
    #[arg(long)]
    tol: Option<f64>,
    /// Overridden by FOCKLAB_SEED when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Boundedness,
    Eigen,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    symbols: SymbolArgs,
    #[arg(long, value_enum, default_value_t = ProbeKind::Boundedness)]
    kind: ProbeKind,
    /// Increasing truncations for the growth probe.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128, 256])]
    ns: Vec<usize>,
    /// Truncation for the eigenvalue probe.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Number of predicted eigenvalues.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Overridden by FOCKLAB_SEED when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    symbols: SymbolArgs,
    /// Half-width of the grid.
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// Points per side.
    #[arg(long, default_value_t = 21)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidTruncation(_) | Error::Precondition(_) => 2,
            Error::Format(_) => 4,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 4, message: e.to_string() }
    }
}

fn seed_override(flag: u64) -> Result<u64, Failure> {
    match std::env::var("FOCKLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure { code: 2, message: format!("FOCKLAB_SEED '{v}' is not an unsigned integer") }),
        Err(_) => Ok(flag),
    }
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", sorted_json(v))?;
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<u8, Failure> {
    let s = args.symbols.symbols()?;
    let given = match (args.ca, args.cb, args.cc) {
        (Some(a), Some(b), Some(c)) => Some(validate_conjugation(a, b, c, &args.tol)?),
        _ => None,
    };
    let report = classify(&s, given.as_ref(), args.tol)?;
    print_json(&serde_json::to_value(report).expect("report serializes"))?;
    Ok(0)
}

fn cmd_matrix(args: &MatrixArgs) -> Result<u8, Failure> {
    let m = build_matrix(&args.symbols.symbols()?, args.n)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure { code: 4, message: format!("{}: {e}", p.display()) })?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match args.format {
        Format::Json => {
            write_matrix_json(&m, &mut sink).map_err(io_failure)?;
            writeln!(sink)?;
        }
        Format::Csv => write_matrix_csv(&m, &mut sink).map_err(io_failure)?,
    }
    sink.flush()?;
    Ok(0)
}

/// Writer errors surface as `Error::Format`; on this path they are I/O failures.
fn io_failure(e: Error) -> Failure {
    Failure { code: 4, message: e.to_string() }
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let tol = args.tol.map(Tolerances::uniform).unwrap_or_default();
    let cfg = SuiteConfig::new(args.trunc, args.guard, tol, seed_override(args.seed)?, args.trials)?;
    let names: Vec<&str> = if args.suite == "all" { SUITES.to_vec() } else { vec![args.suite.as_str()] };
    let mut all_passed = true;
    let mut out = io::stdout().lock();
    for name in names {
        let r = run_suite(name, &cfg)?;
        for line in r.json_lines() {
            writeln!(out, "{line}")?;
        }
        if !r.passed {
            eprintln!("suite {name} failed: max deviation {:e}, {} failing trials", r.max_deviation, r.failures.len());
        }
        all_passed &= r.passed;
    }
    Ok(if all_passed { 0 } else { 1 })
}

fn cmd_probe(args: &ProbeArgs) -> Result<u8, Failure> {
    let s = args.symbols.symbols()?;
    match args.kind {
        ProbeKind::Boundedness => {
            let rep = probe_boundedness(&s, &args.ns, seed_override(args.seed)?)?;
            match args.format {
                Format::Json => print_json(&serde_json::to_value(&rep).expect("report serializes"))?,
                Format::Csv => write_growth_csv(&rep, io::stdout().lock()).map_err(io_failure)?,
            }
        }
        ProbeKind::Eigen => {
            let pairs = probe_eigenvalues(&s, args.n, args.k)?;
            match args.format {
                Format::Json => {
                    let rows: Vec<Value> = pairs.iter().map(|(p, e)| json!({"predicted": p, "computed": e})).collect();
                    print_json(&json!({"N": args.n, "eigenvalues": rows}))?
                }
                Format::Csv => write_eigen_csv(&pairs, io::stdout().lock()).map_err(io_failure)?,
            }
        }
    }
    Ok(0)
}

fn cmd_kernels(args: &KernelArgs) -> Result<u8, Failure> {
    if args.steps < 2 || args.radius.is_nan() || args.radius <= 0.0 {
        return Err(Failure { code: 2, message: "need --steps >= 2 and --radius > 0".into() });
    }
    let s = args.symbols.symbols()?;
    let h = 2.0 * args.radius / (args.steps - 1) as f64;
    let mut samples = Vec::with_capacity(args.steps * args.steps);
    for i in 0..args.steps {
        for j in 0..args.steps {
            let z = C64::new(-args.radius + h * j as f64, -args.radius + h * i as f64);
            samples.push(KernelSample { re: z.re, im: z.im, forward: forward_kernel_norm(&s, z), adjoint: adjoint_kernel_norm(&s, z) });
        }
    }
    match args.format {
        Format::Csv => write_kernel_csv(&samples, io::stdout().lock()).map_err(io_failure)?,
        Format::Json => print_json(&json!({"samples": samples}))?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Kernels(a) => cmd_kernels(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("focklab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
