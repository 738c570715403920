//! The `cbs` command line. Each command reads a problem file and prints a
//! JSON report on standard output. Diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 domain error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cone::{gamma_cones, kappa_cones, oracle_gamma, ConeOptions};
use crate::error::{Error, Result};
use crate::gamma::{GammaReport, INTERSECTION_TOL};
use crate::holder::{gamma_holder_bound, holder_defect_with, oracle_gamma_holder, HolderOptions, MVariant};
use crate::identities::{
    cs_equality_case, imag_cs_identity, modulus_cs_identity, optimal_alpha, real_cs_identity, require_nonzero,
    variational_bound, EQUALITY_TOL,
};
use crate::oracle::{brute_force_gamma_subspaces, grid_gamma_2d, Rng};
use crate::problem::Problem;
use crate::space::{Field, Vector};
use crate::subspace::{gamma_subspaces, kappa_subspaces};
use crate::verify::{run_verify, ALPHA_STEPS};

const DEFAULT_ORACLE_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "cbs", version, about = "Strengthened Cauchy-Schwarz and Hölder constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Cauchy-Schwarz identities and the variational bound for a vector pair.
    Identities(IdentitiesArgs),
    /// Strengthened Cauchy-Schwarz constant γ for two subspaces or cones.
    Gamma(GammaArgs),
    /// Angular distance κ for two subspaces or cones.
    Kappa(GammaArgs),
    /// Sharpened Hölder inequality (vector pair) or Mazur-route γ bound (cone pair).
    Holder(HolderArgs),
    /// Run the randomized invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Subspace,
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MVariantArg {
    Max,
    Sum,
}

impl From<MVariantArg> for MVariant {
    fn from(v: MVariantArg) -> Self {
        match v {
            MVariantArg::Max => MVariant::Max,
            MVariantArg::Sum => MVariant::Sum,
        }
    }
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn parse_finite(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("`{s}` is not finite")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Threshold of the equality-case test.
    #[arg(long, value_parser = parse_finite)]
    pub tol: Option<f64>,
    pub x: String,
    pub y: String,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_ORACLE_SAMPLES)]
    pub oracle_samples: usize,
    #[arg(long, value_parser = parse_seed, default_value = "0xC5C5")]
    pub seed: u64,
    /// Convergence tolerance of the alternating maximization.
    #[arg(long, value_parser = parse_finite)]
    pub tol: Option<f64>,
    /// Also run the planar grid oracle at this resolution (2-D cones only).
    #[arg(long)]
    pub grid: Option<usize>,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Args)]
pub struct HolderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "max")]
    pub m_variant: MVariantArg,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_ORACLE_SAMPLES)]
    pub oracle_samples: usize,
    #[arg(long, value_parser = parse_seed, default_value = "0xC5C5")]
    pub seed: u64,
    #[arg(long, value_parser = parse_finite)]
    pub tol: Option<f64>,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_seed, default_value = "0xC5C5")]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

fn load(path: &PathBuf) -> Result<Problem> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))?;
    Problem::parse(&text)
}

fn vector_json(v: &Vector) -> Value {
    match v.space().field() {
        Field::Real => json!(v.coords().iter().map(|z| z.re).collect::<Vec<_>>()),
        Field::Complex => json!(v.coords().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
    }
}

fn gamma_json(r: &GammaReport) -> Value {
    json!({
        "gamma": r.gamma,
        "kappa": r.kappa,
        "gamma_re": r.gamma_re,
        "certificate_v": r.certificate_v.as_ref().map(vector_json),
        "certificate_w": r.certificate_w.as_ref().map(vector_json),
        "method": r.method,
        "restarts_used": r.restarts_used,
        "converged": r.converged,
    })
}

fn seed_json(seed: u64) -> Value {
    json!(format!("{seed:#x}"))
}

fn envelope(command: &str, args: Value, problem: &Problem, seed: Option<u64>, results: Value, flags: Value) -> Value {
    json!({
        "command": command,
        "args": args,
        "input_digest": problem.digest(),
        "seed": seed.map(seed_json),
        "results": results,
        "flags": flags,
    })
}

pub fn cmd_identities(a: &IdentitiesArgs) -> Result<Value> {
    let problem = load(&a.input)?;
    let x = problem.vector(&a.x)?;
    let y = problem.vector(&a.y)?;
    require_nonzero(x)?;
    require_nonzero(y)?;
    let tol = a.tol.unwrap_or(EQUALITY_TOL);

    let re = real_cs_identity(x, y)?;
    let im = imag_cs_identity(x, y)?;
    let md = modulus_cs_identity(x, y)?;
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_lhs = f64::NEG_INFINITY;
    for k in 0..ALPHA_STEPS {
        let alpha = std::f64::consts::TAU * k as f64 / ALPHA_STEPS as f64;
        let r = variational_bound(x, y, alpha)?;
        max_violation = max_violation.max(r.lhs - r.rhs);
        max_lhs = max_lhs.max(r.lhs);
    }
    let alpha = optimal_alpha(x, y)?;
    let at_opt = variational_bound(x, y, alpha)?;
    let equality = cs_equality_case(x, y, tol)?;
    let max_residual = re.residual.max(im.residual).max(md.residual);

    let results = json!({
        "real": re,
        "imag": im,
        "modulus": md,
        "max_residual": max_residual,
        "variational": {
            "alphas": ALPHA_STEPS,
            "max_lhs": max_lhs,
            "abs_inner": at_opt.rhs,
            "max_violation": max_violation,
            "optimal_alpha": alpha,
            "optimal_residual": at_opt.residual,
        },
        "equality_case": equality,
    });
    let flags = json!({
        "equality_case": equality,
        "residuals_below_1e-10": max_residual < 1e-10,
        "variational_bound_holds": max_violation <= 1e-12,
    });
    let args = json!({ "input": a.input.display().to_string(), "x": a.x, "y": a.y, "tol": tol });
    Ok(envelope("identities", args, &problem, None, results, flags))
}

fn gamma_or_kappa(a: &GammaArgs, command: &str) -> Result<Value> {
    let problem = load(&a.input)?;
    let tol = a.tol.unwrap_or(1e-10);
    if a.oracle_samples == 0 {
        return Err(Error::usage("--oracle-samples must be at least 1"));
    }
    let args = json!({
        "input": a.input.display().to_string(),
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "first": a.first,
        "second": a.second,
        "restarts": a.restarts,
        "oracle_samples": a.oracle_samples,
        "tol": tol,
        "grid": a.grid,
    });
    let (report, oracle, grid) = match a.kind {
        Kind::Subspace => {
            let v = problem.subspace(&a.first)?;
            let f = problem.subspace(&a.second)?;
            if command == "kappa" {
                kappa_subspaces(v, f)?;
            }
            let r = gamma_subspaces(v, f)?;
            let o = brute_force_gamma_subspaces(v, f, a.oracle_samples, &mut Rng::new(a.seed))?;
            (r, o, None)
        }
        Kind::Cone => {
            let c1 = problem.cone(&a.first)?;
            let c2 = problem.cone(&a.second)?;
            let opts = ConeOptions { restarts: a.restarts, tol, seed: a.seed, ..ConeOptions::default() };
            let r = if command == "kappa" { kappa_cones(&c1, &c2, &opts)? } else { gamma_cones(&c1, &c2, &opts)? };
            let o = oracle_gamma(&c1, &c2, a.oracle_samples, a.seed)?;
            let grid = match a.grid {
                Some(res) => Some(grid_gamma_2d(&c1, &c2, res)?),
                None => None,
            };
            (r, o, grid)
        }
    };
    let mut results = gamma_json(&report);
    // The oracle bounds sup |(v, w)|, which `kappa --kind cone` does not report.
    let reference = if command == "kappa" && a.kind == Kind::Cone { None } else { Some(report.gamma) };
    results["oracle"] = json!({
        "samples": a.oracle_samples,
        "gamma": oracle,
        "gap": reference.map(|g| g - oracle),
        "lower_bound_ok": reference.map(|g| oracle <= g + 1e-9),
        "grid_gamma": grid,
    });
    if a.kind == Kind::Cone && command == "gamma" {
        results["gamma_abs"] = json!(report.gamma);
    }
    let flags = json!({
        "heuristic": report.heuristic,
        "intersection_nontrivial": report.intersects,
        "no_strengthening": report.gamma >= 1.0 - INTERSECTION_TOL,
    });
    Ok(envelope(command, args, &problem, Some(a.seed), results, flags))
}

pub fn cmd_gamma(a: &GammaArgs) -> Result<Value> {
    gamma_or_kappa(a, "gamma")
}

pub fn cmd_kappa(a: &GammaArgs) -> Result<Value> {
    gamma_or_kappa(a, "kappa")
}

pub fn cmd_holder(a: &HolderArgs) -> Result<Value> {
    let problem = load(&a.input)?;
    let measure = problem.measure().ok_or_else(|| Error::usage("holder needs a measure in the problem file"))?;
    let variant: MVariant = a.m_variant.into();
    let args = json!({
        "input": a.input.display().to_string(),
        "first": a.first,
        "second": a.second,
        "p": a.p,
        "m_variant": variant,
        "restarts": a.restarts,
        "oracle_samples": a.oracle_samples,
    });
    if problem.has_vector(&a.first) && problem.has_vector(&a.second) {
        let f = problem.lp_vector(&a.first)?;
        let g = problem.lp_vector(&a.second)?;
        let r = holder_defect_with(&f, &g, a.p, variant)?;
        let flags = json!({ "inequality_holds": r.slack >= -1e-10 });
        return Ok(envelope("holder", args, &problem, None, json!(r), flags));
    }
    if !(problem.has_cone(&a.first) && problem.has_cone(&a.second)) {
        return Err(Error::usage(format!(
            "`{}` and `{}` must both name vectors or both name cones",
            a.first, a.second
        )));
    }
    if a.oracle_samples == 0 {
        return Err(Error::usage("--oracle-samples must be at least 1"));
    }
    let c1 = problem.cone(&a.first)?;
    let c2 = problem.cone(&a.second)?;
    let mut opts = HolderOptions { restarts: a.restarts, seed: a.seed, m_variant: variant, ..HolderOptions::default() };
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    let r = gamma_holder_bound(measure, &c1, &c2, a.p, &opts)?;
    let o = oracle_gamma_holder(measure, &c1, &c2, a.p, a.oracle_samples, a.seed)?;
    let mut results = gamma_json(&r);
    results["gamma_bound"] = json!(r.gamma);
    results["oracle"] = json!({ "samples": a.oracle_samples, "gamma": o });
    let flags = json!({
        "heuristic": r.heuristic,
        "intersection_nontrivial": r.intersects,
    });
    Ok(envelope("holder", args, &problem, Some(a.seed), results, flags))
}

/// Parses `args` (including the program name), runs the command, and writes
/// the report. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let start = Instant::now();
    let (result, verify_failed) = match &cli.command {
        Command::Identities(a) => (cmd_identities(a), false),
        Command::Gamma(a) => (cmd_gamma(a), false),
        Command::Kappa(a) => (cmd_kappa(a), false),
        Command::Holder(a) => (cmd_holder(a), false),
        Command::Verify(a) => match run_verify(a.seed, a.trials) {
            Ok(r) => {
                let failed = !r.passed;
                if failed {
                    for f in &r.failures {
                        let _ = writeln!(err, "FAIL {} trial {} value {:e}: {}", f.check, f.trial, f.value, f.inputs);
                    }
                }
                (serde_json::to_value(&r).map_err(|e| Error::Internal(e.to_string())), failed)
            }
            Err(e) => (Err(e), false),
        },
    };
    let _ = writeln!(err, "wall time: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("reports contain only finite numbers");
            let _ = writeln!(out, "{text}");
            if verify_failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
