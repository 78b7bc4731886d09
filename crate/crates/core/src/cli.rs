//! The `bp` command-line front end.
//!
//! Exit codes: 0 success, 1 a `verify` check failed, 2 bad input, 3
//! numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::{self, IndexVector};
use crate::lifetimes::{EvalOptions, JointLifetimeModel, Method};
use crate::oracle;
use crate::report::{analyze, write_table, Analysis};
use crate::scalar::Scalar;
use crate::spec::SystemSpec;
use crate::structure::StructureFunction;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bp", version, about = "Importance and signature indices for semicoherent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute I_BP, b, p, s, the tail signature and symmetry indices.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here (`-` for stdout instead of the table).
        #[arg(long)]
        json: Option<String>,
    },
    /// Cross-check the analytic values against independent routes.
    Verify {
        spec: PathBuf,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: Option<String>,
    },
    /// Print H(I_BP) and H(p).
    Symmetry { spec: PathBuf },
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeFlags {
    pub method: Option<Method>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyFlags {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

fn load(spec: &SystemSpec) -> Result<(StructureFunction, JointLifetimeModel)> {
    Ok((spec.build_structure()?, spec.build_model()?))
}

pub fn cmd_analyze(spec: &SystemSpec, flags: &AnalyzeFlags) -> Result<Analysis> {
    let (phi, model) = load(spec)?;
    let mut opts = spec.eval_options();
    if let Some(m) = flags.method {
        opts.method = m;
    }
    if let Some(t) = flags.tol {
        opts.tol = t;
    }
    analyze(&phi, &model, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    pub route: String,
    pub analytic: f64,
    pub oracle: f64,
    pub diff: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub method: String,
    pub samples: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Verification {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verification serializes") + "\n"
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 7]> = self
            .checks
            .iter()
            .map(|c| {
                [
                    c.quantity.clone(),
                    c.route.clone(),
                    format!("{:.10}", c.analytic),
                    format!("{:.10}", c.oracle),
                    format!("{:.3e}", c.diff),
                    format!("{:.3e}", c.tol),
                    if c.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "method: {}  samples: {}  seed: {}",
            self.method, self.samples, self.seed
        );
        write_table(&mut out, ["quantity", "route", "analytic", "oracle", "|diff|", "tol", "result"], &rows);
        let _ = writeln!(out, "{}", if self.all_pass { "all checks PASS" } else { "some checks FAIL" });
        out
    }
}

fn label(name: &str, i: usize) -> String {
    format!("{name}[{}]", i + 1)
}

fn compare_exact(checks: &mut Vec<Check>, name: &str, route: &str, analytic: &[BigRational], oracle: &[BigRational]) {
    for (i, (a, o)) in analytic.iter().zip(oracle).enumerate() {
        checks.push(Check {
            quantity: label(name, i),
            route: route.to_string(),
            analytic: a.to_f64(),
            oracle: o.to_f64(),
            diff: (a.clone() - o.clone()).to_f64().abs(),
            tol: 0.0,
            pass: a == o,
        });
    }
}

fn compare_float(checks: &mut Vec<Check>, name: &str, route: &str, analytic: &[f64], oracle: &[f64], tol: &dyn Fn(usize) -> f64) {
    for (i, (&a, &o)) in analytic.iter().zip(oracle).enumerate() {
        let diff = (a - o).abs();
        let t = tol(i);
        checks.push(Check {
            quantity: label(name, i),
            route: route.to_string(),
            analytic: a,
            oracle: o,
            diff,
            tol: t,
            pass: diff <= t,
        });
    }
}

fn compare_vectors(checks: &mut Vec<Check>, name: &str, route: &str, a: &IndexVector, b: &IndexVector) {
    match (a.as_exact(), b.as_exact()) {
        (Some(x), Some(y)) => compare_exact(checks, name, route, x, y),
        _ => {
            let tol = (10.0 * (a.tolerance() + b.tolerance())).max(1e-12);
            compare_float(checks, name, route, &a.to_f64(), &b.to_f64(), &|_| tol);
        }
    }
}

/// Four binomial standard deviations at the analytic value, floored at
/// `1/N` so that zero-probability entries tolerate no hits beyond rounding.
fn mc_tolerance(p: f64, samples: u64) -> f64 {
    let n = samples as f64;
    let p = p.clamp(0.0, 1.0);
    4.0 * (p * (1.0 - p) / n).sqrt().max(1.0 / n)
}

/// Runs every applicable cross-check for the spec:
///
/// - Möbius forms of `I_BP` and `p` against the derivative forms,
/// - the permutation oracle when the ordering law is enumerable,
/// - quadrature against the Weibull closed form,
/// - Monte Carlo against the analytic values at 4σ.
pub fn cmd_verify(spec: &SystemSpec, flags: &VerifyFlags) -> Result<Verification> {
    let (phi, model) = load(spec)?;
    let mut opts = spec.eval_options();
    if let Some(s) = flags.samples {
        opts.samples = s;
    }
    if let Some(s) = flags.seed {
        opts.seed = s;
    }
    let probs = crate::lifetimes::ordering_probabilities(&model, &opts)?;
    let bp = indices::bp_from_ordering(&phi, &probs)?;
    let p = indices::signature_from_ordering(&phi, &probs)?;
    bp.validate()?;
    p.validate()?;
    let mut checks = Vec::new();

    compare_vectors(&mut checks, "bp", "mobius", &bp, &indices::bp_mobius_from_ordering(&phi, &probs)?);
    compare_vectors(&mut checks, "p", "mobius", &p, &indices::signature_mobius_from_ordering(&phi, &probs)?);

    let enumerable = match &model {
        JointLifetimeModel::Exchangeable { n } => *n <= crate::lifetimes::MAX_ENUMERATED_COMPONENTS,
        JointLifetimeModel::OrderDistribution(_) => true,
        _ => false,
    };
    if enumerable {
        let o = oracle::permutation_oracle_for(&phi, &model)?;
        match (bp.as_exact(), p.as_exact()) {
            (Some(x), Some(y)) => {
                compare_exact(&mut checks, "bp", "permutations", x, &o.bp);
                compare_exact(&mut checks, "p", "permutations", y, &o.p);
            }
            _ => {
                let f = |v: &[BigRational]| v.iter().map(Scalar::to_f64).collect::<Vec<_>>();
                let tol = (10.0 * bp.tolerance()).max(1e-12);
                compare_float(&mut checks, "bp", "permutations", &bp.to_f64(), &f(&o.bp), &|_| tol);
                compare_float(&mut checks, "p", "permutations", &p.to_f64(), &f(&o.p), &|_| tol);
            }
        }
    }

    let weibull_family = match &model {
        JointLifetimeModel::IndependentWeibull(_) => true,
        JointLifetimeModel::IndependentMarginals(m) => m.as_weibull().is_some(),
        _ => false,
    };
    if weibull_family {
        let other = if probs.method == Method::Quadrature {
            Method::ClosedForm
        } else {
            Method::Quadrature
        };
        let alt = crate::lifetimes::ordering_probabilities(&model, &EvalOptions { method: other, ..opts })?;
        let route = other.as_str();
        let tol = |_| 1e-8;
        compare_float(&mut checks, "bp", route, &bp.to_f64(), &indices::bp_from_ordering(&phi, &alt)?.to_f64(), &tol);
        compare_float(&mut checks, "p", route, &p.to_f64(), &indices::signature_from_ordering(&phi, &alt)?.to_f64(), &tol);
    }

    if probs.method != Method::MonteCarlo {
        let mc = oracle::monte_carlo(&phi, &model, opts.samples, opts.seed)?;
        let (bp_f, p_f) = (bp.to_f64(), p.to_f64());
        let n = opts.samples;
        compare_float(&mut checks, "bp", "simulation", &bp_f, &mc.bp.mean, &|i| mc_tolerance(bp_f[i], n));
        compare_float(&mut checks, "p", "simulation", &p_f, &mc.p.mean, &|i| mc_tolerance(p_f[i], n));
    } else {
        // tables and replay come from the same draws; compare as frequencies
        let mc = oracle::monte_carlo(&phi, &model, opts.samples, opts.seed)?;
        let tol = |_| 1e-12;
        compare_float(&mut checks, "bp", "replay", &bp.to_f64(), &mc.bp.mean, &tol);
        compare_float(&mut checks, "p", "replay", &p.to_f64(), &mc.p.mean, &tol);
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(Verification {
        method: probs.method.as_str().to_string(),
        samples: opts.samples,
        seed: opts.seed,
        checks,
        all_pass,
    })
}

pub fn cmd_symmetry(spec: &SystemSpec) -> Result<(f64, f64)> {
    let a = cmd_analyze(spec, &AnalyzeFlags::default())?;
    Ok((a.symmetry_bp, a.symmetry_p))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn emit_json(target: &str, text: &str, out: &mut dyn std::io::Write) -> std::io::Result<()> {
    if target == "-" {
        out.write_all(text.as_bytes())
    } else {
        std::fs::write(Path::new(target), text)
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("BP_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a second call in one process only fails because a pool exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Analyze { spec, method, tol, json } => SystemSpec::from_path(&spec)
            .and_then(|s| cmd_analyze(&s, &AnalyzeFlags { method, tol }))
            .map(|a| {
                match json.as_deref() {
                    Some("-") => {
                        let _ = emit_json("-", &a.to_json(), out);
                    }
                    Some(path) => {
                        let _ = out.write_all(a.to_table().as_bytes());
                        if let Err(e) = emit_json(path, &a.to_json(), out) {
                            let _ = writeln!(err, "error: cannot write {path}: {e}");
                            return EXIT_INPUT;
                        }
                    }
                    None => {
                        let _ = out.write_all(a.to_table().as_bytes());
                    }
                }
                EXIT_OK
            }),
        Command::Verify { spec, samples, seed, json } => SystemSpec::from_path(&spec)
            .and_then(|s| cmd_verify(&s, &VerifyFlags { samples, seed }))
            .map(|v| {
                match json.as_deref() {
                    Some("-") => {
                        let _ = emit_json("-", &v.to_json(), out);
                    }
                    Some(path) => {
                        let _ = out.write_all(v.to_table().as_bytes());
                        if let Err(e) = emit_json(path, &v.to_json(), out) {
                            let _ = writeln!(err, "error: cannot write {path}: {e}");
                            return EXIT_INPUT;
                        }
                    }
                    None => {
                        let _ = out.write_all(v.to_table().as_bytes());
                    }
                }
                if v.all_pass {
                    EXIT_OK
                } else {
                    EXIT_CHECK_FAILED
                }
            }),
        Command::Symmetry { spec } => SystemSpec::from_path(&spec).and_then(|s| cmd_symmetry(&s)).map(|(h_bp, h_p)| {
            let _ = writeln!(out, "H(I_BP) = {h_bp:.6}");
            let _ = writeln!(out, "H(p)    = {h_p:.6}");
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
