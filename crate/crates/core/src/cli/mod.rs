//! Command-line entry point: JSON configs in, CSV tables or JSON reports out.
//!
//! Exit codes: 0 success, 2 a hard invariant failed, 3 an infeasible result
//! where feasibility was required, 4 a config or parse error, 5 a resource
//! cap was hit. Errors are also written to stderr as one JSON object.

mod inputs;
mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::empirical::{enumerate_couplings, enumerate_empirical, log_multinomial_prob, multinomial_prob_exact, Caps, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::exact::{rational_ln, ExactJoint};
use crate::finite_measures::{conditional_theta, Alphabet};
use crate::gallery::{self, GaussianPairFamily, MixtureFamily};
use crate::harness::{default_ball_grid, sanov_convergence, scan_condition_a2, scan_condition_b2, ScenarioConfig};
use crate::kernels::{conditional_r_law, eta_law, eta_point_mass_exact, multinomial_law};
use crate::rate::{i_projection, inf_rate_over_set, rate_i, IpfOptions};
use crate::report::{cell, fmt_ext, Table};
use crate::rounding::{check_match, match_s_margin};
use crate::sampling::DEFAULT_SEED;

pub use inputs::{EnumerateInputs, KernelInputs, RateInputs, RoundInputs, ScanFile};
pub use verify::{run_verify, SuiteResult, VerifySummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Double,
    Exact,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Double => "double",
            Mode::Exact => "exact",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "condldp", version, about = "Conditional large deviations of empirical measures on finite alphabets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config for the subcommand; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Double)]
    pub mode: Mode,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Maximum number of grid elements per enumeration.
    #[arg(long = "cap-enum", global = true)]
    pub cap_enum: Option<u128>,
    /// Maximum number of contingency-table search nodes.
    #[arg(long = "cap-tables", global = true)]
    pub cap_tables: Option<u128>,
    /// Leave the `wall_ms` column of `sanov` empty so output is reproducible.
    #[arg(long = "no-timings", global = true)]
    pub no_timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump `P_emp^n` as CSV, with multinomial probabilities when a law is given.
    Enumerate {
        #[arg(long)]
        n: Option<u32>,
        /// Alphabet size (labels `a1..ak`).
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated labels.
        #[arg(long)]
        alphabet: Option<String>,
        /// Distribution file or comma-separated weights.
        #[arg(long)]
        rho: Option<String>,
        /// Joint distribution file; enumerates couplings on `R × S`.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Dump `η_n(ζ, {φ})` for every `φ` as CSV.
    Kernel {
        #[arg(long)]
        n: Option<u32>,
        /// Comma-separated counts of `ζ` on the column alphabet.
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Rate values: `J(ρ,σ)`, `I(φ)`, or `inf I` over a set, as JSON.
    Rate {
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
        /// Set descriptor file (JSON).
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        resolution: Option<f64>,
        /// Exit 3 when the value is `+∞`.
        #[arg(long)]
        require_feasible: bool,
    },
    /// Round a coupling onto the grid with an exact `S`-marginal, as JSON.
    Round {
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Convergence of `(1/n) log η_n(ψ_n, A)` inside its envelope, as CSV.
    Sanov,
    /// Finite-n scans of the uniform lower and upper conditions, as JSON.
    Scan,
    /// Closed-form continuous examples.
    Gallery {
        #[command(subcommand)]
        which: GalleryCommand,
    },
    /// Run every invariant suite on seeded instances.
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum GalleryCommand {
    /// Cumulant of the Gaussian kernel against its limit.
    Gaussian {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        y: f64,
        #[arg(long = "n-list", default_value = "1,10,100,1000,10000")]
        n_list: String,
    },
    /// Mixture-kernel demonstrations.
    Mixture {
        #[arg(long, default_value = "gaussian-exponential")]
        family: String,
        #[arg(long, value_enum)]
        demo: Demo,
        #[arg(long = "n-list")]
        n_list: Option<String>,
        #[arg(long = "m-list")]
        m_list: Option<String>,
    },
    /// Numerical check of the mixture theorem's hypotheses, as JSON.
    Hypotheses {
        #[arg(long, default_value = "gaussian-exponential")]
        family: String,
        #[arg(long = "n-list", default_value = "10,100,1000")]
        n_list: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Counterexample,
    Quench,
    Epsilon,
}

/// Everything a subcommand needs besides its own inputs.
pub struct Context {
    pub mode: Mode,
    pub seed: u64,
    pub caps: Caps,
    pub out: Option<PathBuf>,
    pub no_timings: bool,
}

/// What a finished subcommand wants the process to report.
enum Status {
    Ok,
    Violation(String),
    Infeasible(String),
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Precondition(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) => 4,
        Error::Resource { .. } => 5,
        Error::NonConvergence { .. } | Error::Internal(_) => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Argument(_) => "argument",
        Error::Precondition(_) => "precondition",
        Error::Resource { .. } => "resource",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Internal(_) => "internal",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn report_error(kind: &str, message: &str, code: i32) {
    let v = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{v}");
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report_error("usage", &e.to_string(), 4);
            return 4;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let mut caps = Caps::default();
    if let Some(c) = cli.cap_enum {
        caps.elements = c;
    }
    if let Some(c) = cli.cap_tables {
        caps.table_nodes = c;
    }
    let ctx = Context { mode: cli.mode, seed: cli.seed, caps, out: cli.out.clone(), no_timings: cli.no_timings };
    match dispatch(&cli.command, cli.config.as_ref(), &ctx) {
        Ok(Status::Ok) => 0,
        Ok(Status::Violation(msg)) => {
            report_error("invariant_violation", &msg, 2);
            2
        }
        Ok(Status::Infeasible(msg)) => {
            report_error("infeasible", &msg, 3);
            3
        }
        Err(e) => {
            let code = exit_code(&e);
            report_error(error_kind(&e), &e.to_string(), code);
            code
        }
    }
}

fn dispatch(cmd: &Command, config: Option<&PathBuf>, ctx: &Context) -> Result<Status> {
    let config_text = config.map(std::fs::read_to_string).transpose()?;
    let cfg = config_text.as_deref();
    match cmd {
        Command::Enumerate { n, k, alphabet, rho, lambda } => {
            let flags = EnumerateInputs::from_flags(*n, *k, alphabet.as_deref(), rho.as_deref(), lambda.as_deref())?;
            cmd_enumerate(inputs::merge(cfg, flags)?.resolve()?, ctx)
        }
        Command::Kernel { n, zeta, lambda } => {
            let flags = KernelInputs::from_flags(*n, zeta.as_deref(), lambda.as_deref())?;
            cmd_kernel(inputs::merge(cfg, flags)?.resolve()?, ctx)
        }
        Command::Rate { lambda, psi, phi, rho, sigma, set, resolution, require_feasible } => {
            let flags = RateInputs::from_flags(
                lambda.as_deref(),
                psi.as_deref(),
                phi.as_deref(),
                rho.as_deref(),
                sigma.as_deref(),
                set.as_deref(),
                *resolution,
                *require_feasible,
            )?;
            cmd_rate(inputs::merge(cfg, flags)?.resolve()?, ctx)
        }
        Command::Round { xi, zeta, lambda } => {
            let flags = RoundInputs::from_flags(xi.as_deref(), zeta.as_deref(), lambda.as_deref())?;
            cmd_round(inputs::merge(cfg, flags)?.resolve()?, ctx)
        }
        Command::Sanov => cmd_sanov(cfg.ok_or_else(|| Error::arg("sanov needs --config"))?, ctx),
        Command::Scan => cmd_scan(cfg.ok_or_else(|| Error::arg("scan needs --config"))?, ctx),
        Command::Gallery { which } => cmd_gallery(which, ctx),
        Command::Verify => {
            let summary = run_verify(ctx.mode, ctx.seed, &ctx.caps)?;
            let inputs = json!({ "suites": "default", "caps": caps_json(&ctx.caps) });
            write_json(ctx, "verify", &inputs, &summary)?;
            Ok(if summary.passed { Status::Ok } else { Status::Violation(format!("{} suite(s) failed", summary.failed_suites)) })
        }
    }
}

fn caps_json(c: &Caps) -> serde_json::Value {
    json!({ "elements": c.elements.to_string(), "table_nodes": c.table_nodes.to_string() })
}

fn hash_inputs<T: Serialize>(inputs: &T) -> Result<String> {
    let bytes = serde_json::to_vec(inputs)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn emit(ctx: &Context, text: &str) -> Result<()> {
    match &ctx.out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn write_json<I: Serialize, R: Serialize>(ctx: &Context, command: &str, inputs: &I, result: &R) -> Result<()> {
    let doc = json!({
        "command": command,
        "config_sha256": hash_inputs(inputs)?,
        "mode": ctx.mode.name(),
        "seed": ctx.seed,
        "result": result,
    });
    emit(ctx, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn write_csv<I: Serialize>(ctx: &Context, command: &str, inputs: &I, table: &Table, notes: &[String]) -> Result<()> {
    let mut header = vec![
        format!("condldp {command}"),
        format!("config_sha256={}", hash_inputs(inputs)?),
        format!("mode={}", ctx.mode.name()),
        format!("seed={}", ctx.seed),
    ];
    header.extend(notes.iter().cloned());
    emit(ctx, &table.to_csv(&header)?)
}

fn require_double(ctx: &Context, command: &str) -> Result<()> {
    if ctx.mode == Mode::Exact {
        return Err(Error::arg(format!("`{command}` has no exact mode")));
    }
    Ok(())
}

fn count_columns(prefix: &str, labels: &[String]) -> Vec<String> {
    labels.iter().map(|l| format!("{prefix}{l}")).collect()
}

fn cmd_enumerate(inp: inputs::ResolvedEnumerate, ctx: &Context) -> Result<Status> {
    let n = inp.n;
    let exact = ctx.mode == Mode::Exact;
    let mut cols: Vec<String>;
    let mut table;
    if let Some(lj) = &inp.lambda {
        let lambda = lj.to_joint()?;
        let cells: Vec<String> = lambda
            .rows()
            .labels()
            .iter()
            .flat_map(|r| lambda.cols().labels().iter().map(move |s| format!("{r}|{s}")))
            .collect();
        cols = count_columns("count_", &cells);
        cols.extend(["probability".into(), "log_probability".into()]);
        table = Table { columns: cols, rows: Vec::new() };
        let exact_lambda = if exact { Some(ExactJoint::from_json(lj)?) } else { None };
        for nu in enumerate_couplings(n, lambda.rows(), lambda.cols(), &ctx.caps)? {
            let mut row: Vec<String> = nu.counts().iter().map(|c| c.to_string()).collect();
            match &exact_lambda {
                Some(el) => {
                    let p = multinomial_prob_exact(&nu, el)?;
                    row.push(p.to_string());
                    row.push(cell(if p.is_zero() { f64::NEG_INFINITY } else { rational_ln(&p) }));
                }
                None => {
                    let lp = log_multinomial_prob(&nu, &lambda)?;
                    row.push(cell(lp.exp()));
                    row.push(cell(lp));
                }
            }
            table.push(row);
        }
    } else if let Some(dj) = &inp.rho {
        let rho = dj.to_dist()?;
        cols = count_columns("count_", rho.alphabet().labels());
        cols.extend(["probability".into(), "log_probability".into()]);
        table = Table { columns: cols, rows: Vec::new() };
        if exact {
            // one-column joint: the multinomial law of the counts
            let one = Alphabet::new(["all"])?;
            let weights = dj.weights.iter().map(|w| w.to_rational()).collect::<Result<Vec<_>>>()?;
            let el = ExactJoint::new(rho.alphabet().clone(), one.clone(), weights)?;
            for phi in enumerate_empirical(n, rho.alphabet(), &ctx.caps)? {
                let nu = crate::empirical::EmpiricalCoupling::new(rho.alphabet().clone(), one.clone(), phi.counts().to_vec())?;
                let p = multinomial_prob_exact(&nu, &el)?;
                let mut row: Vec<String> = phi.counts().iter().map(|c| c.to_string()).collect();
                row.push(p.to_string());
                row.push(cell(if p.is_zero() { f64::NEG_INFINITY } else { rational_ln(&p) }));
                table.push(row);
            }
        } else {
            for (phi, lp) in multinomial_law(n, &rho, &ctx.caps)? {
                let mut row: Vec<String> = phi.counts().iter().map(|c| c.to_string()).collect();
                row.push(cell(lp.exp()));
                row.push(cell(lp));
                table.push(row);
            }
        }
    } else {
        let alphabet = inp.alphabet()?;
        table = Table { columns: count_columns("count_", alphabet.labels()), rows: Vec::new() };
        for phi in enumerate_empirical(n, &alphabet, &ctx.caps)? {
            table.push(phi.counts().iter().map(|c| c.to_string()).collect());
        }
    }
    write_csv(ctx, "enumerate", &inp, &table, &[])?;
    Ok(Status::Ok)
}

fn cmd_kernel(inp: inputs::ResolvedKernel, ctx: &Context) -> Result<Status> {
    let lambda = inp.lambda.to_joint()?;
    let zeta = EmpiricalMeasure::new(lambda.cols().clone(), inp.zeta.clone())?;
    let n = inp.n;
    if zeta.n() != n {
        return Err(Error::arg(format!("ζ counts sum to {}, not n = {n}", zeta.n())));
    }
    let theta = conditional_theta(&lambda)?;
    let mut cols = count_columns("count_", lambda.rows().labels());
    cols.extend(["probability".into(), "log_probability".into()]);
    let mut table = Table { columns: cols, rows: Vec::new() };
    // second route: condition the coupling law on its S-marginal
    let conditioned = conditional_r_law(n, &zeta, &lambda, &ctx.caps)?;
    let mut worst = 0.0f64;
    let table_route = eta_law(n, &zeta, &theta, &ctx.caps)?;
    let by_phi: std::collections::HashMap<Vec<u32>, f64> =
        conditioned.iter().map(|(phi, lp)| (phi.counts().to_vec(), lp.exp())).collect();
    match ctx.mode {
        Mode::Double => {
            for (phi, lp) in &table_route {
                let p = lp.exp();
                worst = worst.max((p - by_phi.get(phi.counts()).copied().unwrap_or(0.0)).abs());
                let mut row: Vec<String> = phi.counts().iter().map(|c| c.to_string()).collect();
                row.push(cell(p));
                row.push(cell(*lp));
                table.push(row);
            }
        }
        Mode::Exact => {
            let el = ExactJoint::from_json(&inp.lambda)?;
            let et = el.theta()?;
            for (phi, _) in &table_route {
                let p = eta_point_mass_exact(n, &zeta, phi, &et, &ctx.caps)?;
                let pf = crate::exact::rational_to_f64(&p);
                worst = worst.max((pf - by_phi.get(phi.counts()).copied().unwrap_or(0.0)).abs());
                let mut row: Vec<String> = phi.counts().iter().map(|c| c.to_string()).collect();
                row.push(p.to_string());
                row.push(cell(if p.is_zero() { f64::NEG_INFINITY } else { rational_ln(&p) }));
                table.push(row);
            }
        }
    }
    let tol = 1e-10;
    write_csv(ctx, "kernel", &inp, &table, &[format!("route_agreement_max_abs={}", fmt_ext(worst))])?;
    Ok(if worst <= tol {
        Status::Ok
    } else {
        Status::Violation(format!("table and conditioning routes differ by {worst:e} > {tol:e}"))
    })
}

#[derive(Serialize)]
struct RateReport {
    quantity: &'static str,
    #[serde(serialize_with = "crate::report::ext_f64")]
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimizer: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    feasible: bool,
}

fn cmd_rate(inp: inputs::ResolvedRate, ctx: &Context) -> Result<Status> {
    require_double(ctx, "rate")?;
    let lambda = inp.lambda.to_joint()?;
    let opts = IpfOptions::default();
    let report = if let Some(set) = &inp.set {
        let psi = inp.psi.as_ref().ok_or_else(|| Error::arg("a set infimum needs psi"))?.to_dist()?;
        let res = inp.resolution.unwrap_or(0.01);
        let inf = inf_rate_over_set(&lambda, &psi, set, res)?;
        RateReport {
            quantity: "inf_rate_over_set",
            value: inf.value,
            minimizer: inf.argmin.map(|d| serde_json::to_value(d)).transpose()?,
            margin_residual: None,
            iterations: None,
            feasible: inf.value.is_finite(),
        }
    } else if let (Some(psi), Some(phi)) = (&inp.psi, &inp.phi) {
        let (psi, phi) = (psi.to_dist()?, phi.to_dist()?);
        let j = i_projection(&lambda, &phi, &psi, &opts)?;
        let value = rate_i(&lambda, &psi, &phi, &opts)?;
        RateReport {
            quantity: "conditional_rate",
            value,
            minimizer: j.minimizer.map(|m| serde_json::to_value(m)).transpose()?,
            margin_residual: Some(j.margin_residual),
            iterations: Some(j.iterations),
            feasible: value.is_finite(),
        }
    } else if let (Some(rho), Some(sigma)) = (&inp.rho, &inp.sigma) {
        let j = i_projection(&lambda, &rho.to_dist()?, &sigma.to_dist()?, &opts)?;
        projection_report(j)
    } else {
        return Err(Error::arg("rate needs psi and phi, rho and sigma, or psi and set"));
    };
    let feasible = report.feasible;
    write_json(ctx, "rate", &inp, &report)?;
    Ok(if inp.require_feasible && !feasible {
        Status::Infeasible("no coupling absolutely continuous w.r.t. λ has the requested margins".into())
    } else {
        Status::Ok
    })
}

fn projection_report(j: crate::rate::RateResult) -> RateReport {
    RateReport {
        quantity: "i_projection",
        value: j.value,
        feasible: j.value.is_finite(),
        minimizer: j.minimizer.map(|m| serde_json::to_value(m).expect("joint serializes")),
        margin_residual: Some(j.margin_residual),
        iterations: Some(j.iterations),
    }
}

fn cmd_round(inp: inputs::ResolvedRound, ctx: &Context) -> Result<Status> {
    require_double(ctx, "round")?;
    let lambda = inp.lambda.to_joint()?;
    let xi = inp.xi.to_joint()?;
    let zeta = EmpiricalMeasure::new(lambda.cols().clone(), inp.zeta.clone())?;
    let nu = match_s_margin(&xi, &zeta, &lambda)?;
    let check = check_match(&xi, &zeta, &lambda, &nu);
    let passed = check.passed();
    let result = json!({
        "n": nu.n(),
        "nu_counts": nu.counts(),
        "nu": nu.to_joint(),
        "check": check,
        "passed": passed,
    });
    write_json(ctx, "round", &inp, &result)?;
    Ok(if passed { Status::Ok } else { Status::Violation("rounding postconditions failed".into()) })
}

fn cmd_sanov(config: &str, ctx: &Context) -> Result<Status> {
    require_double(ctx, "sanov")?;
    let file: crate::harness::ScenarioFile =
        serde_json::from_str(config).map_err(|e| Error::Parse(format!("scenario config: {e}")))?;
    let cfg: ScenarioConfig = file.clone().into_config(ctx.caps)?;
    let run = sanov_convergence(&cfg)?;
    let mut cols = vec!["n".to_string()];
    cols.extend(count_columns("psi_n_", cfg.lambda.cols().labels()));
    for c in ["a_n", "envelope_lo", "envelope_hi", "target_lo", "target_hi", "wall_ms"] {
        cols.push(c.into());
    }
    let mut table = Table { columns: cols, rows: Vec::new() };
    for r in &run.reports {
        let mut row = vec![r.n.to_string()];
        row.extend(r.psi_n.iter().map(|c| c.to_string()));
        for v in [r.a_n, r.envelope_lo, r.envelope_hi, r.target_lo, r.target_hi] {
            row.push(cell(v));
        }
        row.push(if ctx.no_timings { String::new() } else { format!("{:.3}", r.wall_ms) });
        table.push(row);
    }
    let mut notes = Vec::new();
    if let Some((n, e)) = &run.failure {
        notes.push(format!("stopped at n={n}: {e}"));
    }
    write_csv(ctx, "sanov", &file, &table, &notes)?;
    if let Some((_, e)) = run.failure {
        return Err(e);
    }
    let bad: Vec<u32> = run.reports.iter().filter(|r| !r.contained()).map(|r| r.n).collect();
    Ok(if bad.is_empty() { Status::Ok } else { Status::Violation(format!("envelope containment fails at n = {bad:?}")) })
}

fn cmd_scan(config: &str, ctx: &Context) -> Result<Status> {
    require_double(ctx, "scan")?;
    let file: ScanFile = serde_json::from_str(config).map_err(|e| Error::Parse(format!("scan config: {e}")))?;
    let upper_event = file.upper_event.clone();
    let mut cfg = file.scenario.clone().into_config(ctx.caps)?;
    let epsilons = if cfg.epsilons.is_empty() { vec![0.2, 0.1, 0.05] } else { cfg.epsilons.clone() };
    let grid = if cfg.ball_grid.is_empty() {
        default_ball_grid(&cfg.psi, &[0.005, 0.01, 0.02, 0.04], &[-0.04, -0.02, 0.0, 0.02, 0.04])
    } else {
        cfg.ball_grid.clone()
    };
    let a2 = scan_condition_a2(&cfg, &epsilons, &grid)?;
    if let Some(w) = upper_event {
        w.validate(cfg.lambda.nrows())?;
        cfg.event = w;
    }
    let b2 = scan_condition_b2(&cfg, &epsilons, &grid)?;
    write_json(ctx, "scan", &file, &json!({ "a2": a2, "b2": b2 }))?;
    Ok(Status::Ok)
}

fn parse_list(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("bad integer {t:?} in list: {e}"))))
        .collect()
}

fn cmd_gallery(which: &GalleryCommand, ctx: &Context) -> Result<Status> {
    require_double(ctx, "gallery")?;
    match which {
        GalleryCommand::Gaussian { r, lambda, y, n_list } => {
            let fam = GaussianPairFamily::new(*r)?;
            let ns = parse_list(n_list)?;
            let t = gallery::gaussian_table(&fam, *lambda, *y, &ns)?;
            let inputs = json!({ "gallery": "gaussian", "r": r, "lambda": lambda, "y": y, "n_list": ns });
            write_csv(ctx, "gallery gaussian", &inputs, &t, &[])?;
        }
        GalleryCommand::Mixture { family, demo, n_list, m_list } => {
            let fam = MixtureFamily::by_name(family)?;
            fam.validate()?;
            let (t, ns, ms) = match demo {
                Demo::Counterexample => {
                    if fam != MixtureFamily::gaussian_exponential() {
                        return Err(Error::arg("the counterexample demo uses the gaussian-exponential family"));
                    }
                    let ns = parse_list(n_list.as_deref().unwrap_or("10,50"))?;
                    let ms = parse_list(m_list.as_deref().unwrap_or("50,500,5000,50000"))?;
                    (gallery::counterexample_table(&ns, &ms)?, ns, ms)
                }
                Demo::Quench => {
                    if fam.mu1 != gallery::FirstComponent::GeometricOnNaturals {
                        return Err(Error::arg("the quench demo uses the geometric-exponential family"));
                    }
                    let ns = parse_list(n_list.as_deref().unwrap_or("1,2,5,10,20,50,100"))?;
                    (gallery::quench_table(&ns)?, ns, Vec::new())
                }
                Demo::Epsilon => {
                    let ns = parse_list(n_list.as_deref().unwrap_or("1,4,16,64,256"))?;
                    (gallery::epsilon_table(&ns)?, ns, Vec::new())
                }
            };
            let inputs = json!({ "gallery": "mixture", "family": fam, "demo": format!("{demo:?}"), "n_list": ns, "m_list": ms });
            write_csv(ctx, "gallery mixture", &inputs, &t, &[])?;
        }
        GalleryCommand::Hypotheses { family, n_list } => {
            let fam = MixtureFamily::by_name(family)?;
            let ns = parse_list(n_list)?;
            let rep = gallery::check_hypotheses(&fam, &ns, 1e-2)?;
            let inputs = json!({ "gallery": "hypotheses", "family": fam, "n_list": ns });
            write_json(ctx, "gallery hypotheses", &inputs, &rep)?;
            if !rep.holds() {
                return Ok(Status::Violation("mixture hypotheses fail on the grid".into()));
            }
        }
    }
    Ok(Status::Ok)
}
