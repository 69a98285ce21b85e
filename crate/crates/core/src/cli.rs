//! Command-line front end: argument parsing, data ingestion and reports.
//!
//! Every report embeds the resolved command under `config`; feeding a report
//! to `rerun` repeats the analysis and reproduces the report byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::mixture::{
    marginal_d, marginal_d_se, run_chain, ChainOutput, Hyper, MixtureSpec, PARAMETERS,
};
use crate::numerics::DEFAULT_HERMITE_NODES;
use crate::optimizer::{
    extremize, local_sweep, worst_direction_with, Constraint, DirectionStatus, Normalization,
    Objective, OptimizerConfig, SweepEntry, DEFAULT_SWEEP,
};
use crate::perturbation::{
    boundary_point, boundary_quartic, ChartValidity, FeasibleRegion, PerturbationVector,
};
use crate::posterior::PosteriorContext;
use crate::prior::{NefPrior, PriorFamily};
use crate::sensitivity::SensitivityReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot parse {text:?} as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{0}")]
    Numerical(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lmrobust",
    version,
    about = "Prior-perturbation sensitivity for conjugate normal models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Steepest local direction of the posterior mean and a sweep along it.
    WorstDirection(WorstDirectionArgs),
    /// Global extremum of the mean shift or the predictive divergence.
    Optimize(OptimizeArgs),
    /// Base and perturbed two-component mixture posteriors by MCMC.
    Mixture(MixtureArgs),
    /// Classify a perturbation and optionally export the boundary surface.
    Feasibility(FeasibilityArgs),
    /// Re-run the configuration embedded in a JSON report.
    Rerun(RerunArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Observations, one per line; `#` starts a comment line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub prior_mean: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub prior_var: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lik_var: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_HERMITE_NODES)]
    pub quad_nodes: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Constraint::None)]
    pub constraint: Constraint,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Report destination; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct WorstDirectionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Sweep multipliers of the unit direction.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP.to_vec())]
    pub alphas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Normalization::Euclidean)]
    pub normalization: Normalization,
    /// Write base and perturbed posterior densities on a grid of `mu`.
    #[arg(long)]
    #[serde(skip)]
    pub density_csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Objective::PsiMin)]
    pub objective: Objective,
    #[arg(long, default_value_t = 32)]
    pub n_starts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct MixtureArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub theta2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mean_var1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mean_var2: f64,
    /// Gamma shape of both precisions.
    #[arg(long, default_value_t = 2.0)]
    pub shape: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 50_000)]
    pub chain_length: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_width: f64,
    /// Run the "perturbed" chain without perturbations.
    #[arg(long)]
    pub no_perturb: bool,
    /// Write post-burn-in draws of both runs.
    #[arg(long)]
    #[serde(skip)]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    #[default]
    Normal,
    Gamma,
    Beta,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FeasibilityArgs {
    /// `l2 l3 l4`
    #[arg(num_args = 3, value_names = ["L2", "L3", "L4"], allow_negative_numbers = true, required = true)]
    pub lambda: Vec<f64>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Normal)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub prior_mean: f64,
    /// Variance for the normal family, shape for gamma, concentration for beta.
    #[arg(long, default_value_t = 1.0)]
    pub prior_var: f64,
    /// Write boundary chart points over a `(z, l4)` grid.
    #[arg(long)]
    #[serde(skip)]
    pub export_boundary: Option<PathBuf>,
    #[arg(long, default_value_t = 61)]
    #[serde(skip)]
    pub grid_z: usize,
    #[arg(long, default_value_t = 41)]
    #[serde(skip)]
    pub grid_l4: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// A JSON report written by any other subcommand.
    pub report: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Machine-readable report; keys are fixed across subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: Command,
    pub grad_phi: Option<[f64; 3]>,
    pub lambda_hat: Option<PerturbationVector>,
    pub psi: Option<f64>,
    pub kl: Option<f64>,
    pub d: Option<f64>,
    pub sweep: Option<Vec<SweepEntry>>,
    pub diagnostics: Value,
    pub details: Value,
}

impl Report {
    fn new(config: Command) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            grad_phi: None,
            lambda_hat: None,
            psi: None,
            kl: None,
            d: None,
            sweep: None,
            diagnostics: Value::Null,
            details: Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// What a command produced: the rendered report and the exit status.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    pub report: Option<Report>,
}

/// Observations from a data file: one number per line, blank lines and
/// lines starting with `#` ignored.
pub fn read_data(path: &Path) -> Result<Vec<f64>, CliError> {
    let raw = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_data(&raw, path)
}

pub fn parse_data(raw: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    text: t.to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn load(path: &Option<PathBuf>) -> Result<Vec<f64>, CliError> {
    match path {
        Some(p) => read_data(p),
        None => Ok(Vec::new()),
    }
}

fn context(model: &ModelArgs) -> Result<PosteriorContext, CliError> {
    let data = load(&model.data)?;
    let prior = NefPrior::normal(model.prior_mean, model.prior_var)?;
    Ok(PosteriorContext::base_posterior(
        &prior,
        model.lik_var,
        &data,
    )?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn posterior_json(ctx: &PosteriorContext) -> Value {
    json!({
        "n": ctx.n(),
        "sample_mean": if ctx.n() == 0 { Value::Null } else { json!(ctx.sample_mean()) },
        "post_mean": ctx.post_mean(),
        "post_var": ctx.post_var(),
    })
}

fn sweep_csv(sweep: &[SweepEntry]) -> String {
    let mut s = String::from("alpha,l2,l3,l4,psi,d,kl,point\n");
    for e in sweep {
        let point = serde_json::to_value(e.point).expect("enum serialises");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            e.alpha,
            e.lambda.l2,
            e.lambda.l3,
            e.lambda.l4,
            e.psi,
            e.d,
            e.kl,
            point.as_str().unwrap_or_default()
        );
    }
    s
}

/// `mu, base, perturbed at each sweep point` on 201 points spanning five
/// posterior standard deviations either side of the mean.
pub fn density_grid_csv(ctx: &PosteriorContext, sweep: &[SweepEntry]) -> Result<String, Error> {
    let mut s = String::from("mu,base");
    for e in sweep {
        let _ = write!(s, ",alpha_{}", e.alpha);
    }
    s.push('\n');
    let (m, sd) = (ctx.post_mean(), ctx.post_sd());
    for k in 0..=200 {
        let mu = m - 5.0 * sd + k as f64 * 10.0 * sd / 200.0;
        let _ = write!(s, "{mu},{}", ctx.base_density(mu));
        for e in sweep {
            let _ = write!(s, ",{}", ctx.perturbed_posterior_density(e.lambda, mu)?);
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_worst_direction(args: &WorstDirectionArgs) -> Result<Outcome, CliError> {
    let ctx = context(&args.model)?;
    let w = worst_direction_with(&ctx, args.solver.constraint, args.normalization)?;
    let infeasible = w.status == DirectionStatus::ProjectedInfeasible;
    // no feasible ray: report the direction and its status without a sweep
    let sweep = if infeasible {
        Vec::new()
    } else {
        local_sweep(&ctx, w.direction, &args.alphas, args.solver.quad_nodes)?
    };
    if let Some(path) = &args.density_csv {
        write_file(path, &density_grid_csv(&ctx, &sweep)?)?;
    }
    let last = sweep.last().copied();
    let mut r = Report::new(Command::WorstDirection(args.clone()));
    r.grad_phi = Some(w.grad_phi);
    r.lambda_hat = last.map(|e| e.lambda);
    r.psi = last.map(|e| e.psi);
    r.kl = last.map(|e| e.kl);
    r.d = last.map(|e| e.d);
    r.diagnostics = json!({
        "status": w.status,
        "alpha_max": w.alpha_max,
        "posterior": posterior_json(&ctx),
    });
    r.details = json!({ "direction": w.direction });
    let text = match args.output.format {
        Format::Json => {
            r.sweep = Some(sweep);
            r.to_json()
        }
        Format::Csv => sweep_csv(&sweep),
    };
    Ok(Outcome {
        text,
        exit_code: if infeasible { 2 } else { 0 },
        report: Some(r),
    })
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<Outcome, CliError> {
    let ctx = context(&args.model)?;
    let cfg = OptimizerConfig {
        tol: args.solver.tol,
        max_iter: args.max_iter,
        n_starts: args.n_starts,
        seed: args.solver.seed,
        objective: args.objective,
        constraint: args.solver.constraint,
        quad_nodes: args.solver.quad_nodes,
    };
    let res = extremize(&ctx, &cfg)?;
    let rep: &SensitivityReport = &res.report;
    let mut r = Report::new(Command::Optimize(args.clone()));
    r.grad_phi = Some(rep.grad_phi);
    r.lambda_hat = Some(res.lambda_hat);
    r.psi = Some(rep.psi);
    r.kl = Some(rep.kl);
    r.d = Some(rep.d);
    r.diagnostics = json!({
        "converged": res.converged,
        "starts_converged": res.starts_converged,
        "start_index": res.start_index,
        "iterations": res.trace.len(),
        "notes": rep.notes,
        "posterior": posterior_json(&ctx),
    });
    r.details = json!({
        "objective": res.objective,
        "objective_value": res.objective_value,
        "location": res.location,
        "piece": res.piece,
        "feasibility": rep.feasibility,
        "size": rep.size,
        "trace": res.trace,
    });
    let text = match args.output.format {
        Format::Json => r.to_json(),
        Format::Csv => {
            let mut s = String::from("step,phase,l2,l3,l4,value\n");
            for (k, t) in res.trace.iter().enumerate() {
                let phase = serde_json::to_value(t.phase).expect("enum serialises");
                let _ = writeln!(
                    s,
                    "{k},{},{},{},{},{}",
                    phase.as_str().unwrap_or_default(),
                    t.lambda.l2,
                    t.lambda.l3,
                    t.lambda.l4,
                    t.value
                );
            }
            s
        }
    };
    Ok(Outcome {
        text,
        exit_code: if res.converged { 0 } else { 2 },
        report: Some(r),
    })
}

fn samples_csv(base: &ChainOutput, pert: &ChainOutput) -> String {
    let mut s = String::from("run,iter");
    for p in PARAMETERS {
        let _ = write!(s, ",{p}");
    }
    s.push('\n');
    for (name, out) in [("base", base), ("perturbed", pert)] {
        for (i, row) in out.samples.iter().enumerate() {
            let _ = write!(s, "{name},{i}");
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
    }
    s
}

fn cmd_mixture(args: &MixtureArgs) -> Result<Outcome, CliError> {
    let data = load(&args.data)?;
    let hyper = Hyper {
        theta: [args.theta1, args.theta2],
        mean_var: [args.mean_var1, args.mean_var2],
        shape: [args.shape, args.shape],
        rate: [args.rate1, args.rate2],
        alpha: args.alpha,
        beta: args.beta,
    };
    let spec = MixtureSpec {
        lambda_width: args.lambda_width,
        chain_length: args.chain_length,
        burn_in: args.burn_in,
        seed: args.seed,
        perturb: [!args.no_perturb; 5],
        ..MixtureSpec::new(data, hyper)
    };
    spec.validate()?;
    let base = run_chain(&spec.base())?;
    let pert = run_chain(&spec)?;
    if let Some(path) = &args.samples {
        write_file(path, &samples_csv(&base, &pert))?;
    }
    let d = marginal_d(&base.summaries, &pert.summaries)?;
    let d_se = marginal_d_se(&base.summaries, &pert.summaries)?;
    let mut r = Report::new(Command::Mixture(args.clone()));
    r.diagnostics = json!({
        "parameters": PARAMETERS,
        "acceptance_params": pert.acceptance_params.rates().map(nan_to_null),
        "acceptance_lambda": pert.acceptance_lambda.rates().map(nan_to_null),
        "infeasible_lambda_draws": pert.infeasible_lambda_draws,
        "d_se": d_se,
    });
    r.details = json!({
        "d": d,
        "base": base.summaries,
        "perturbed": pert.summaries,
    });
    let text = match args.output.format {
        Format::Json => r.to_json(),
        Format::Csv => {
            let mut s =
                String::from("parameter,base_mean,base_sd,perturbed_mean,perturbed_sd,d,d_se\n");
            for i in 0..PARAMETERS.len() {
                let (b, p) = (&base.summaries[i], &pert.summaries[i]);
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    b.name, b.mean, b.sd, p.mean, p.sd, d[i], d_se[i]
                );
            }
            s
        }
    };
    Ok(Outcome {
        text,
        exit_code: 0,
        report: Some(r),
    })
}

fn nan_to_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Boundary chart points over `z in [-3, 3]` and `l4 in (0, 1]` (scaled by
/// the prior variance), keeping only images that lie on the boundary.
pub fn boundary_export_csv(prior: &NefPrior, nz: usize, nl4: usize) -> Result<String, Error> {
    let s = prior.dispersion();
    let mut out = String::from("z,lambda4,l2,l3,l4,p,dp\n");
    for i in 0..nz {
        let z = if nz == 1 {
            0.0
        } else {
            (-3.0 + 6.0 * i as f64 / (nz - 1) as f64) / s.sqrt()
        };
        for k in 1..=nl4 {
            let l4 = s * s * k as f64 / nl4 as f64;
            let b = match boundary_point(prior, z, l4) {
                Ok(b) => b,
                Err(Error::SingularChart { .. }) => continue,
                Err(e) => return Err(e),
            };
            if b.validity != ChartValidity::OnBoundary {
                continue;
            }
            let p = boundary_quartic(prior, b.lambda)?;
            let _ = writeln!(
                out,
                "{z},{l4},{},{},{},{},{}",
                b.lambda.l2,
                b.lambda.l3,
                b.lambda.l4,
                p.eval(z),
                p.derivative().eval(z)
            );
        }
    }
    Ok(out)
}

fn cmd_feasibility(args: &FeasibilityArgs) -> Result<Outcome, CliError> {
    let [l2, l3, l4] = <[f64; 3]>::try_from(args.lambda.as_slice())
        .map_err(|_| CliError::Usage("feasibility expects exactly three numbers".into()))?;
    let lambda = PerturbationVector::new(l2, l3, l4);
    let family = match args.family {
        FamilyArg::Normal => PriorFamily::Normal,
        FamilyArg::Gamma => PriorFamily::GammaByMean,
        FamilyArg::Beta => PriorFamily::BetaByMean,
    };
    let prior = NefPrior::new(family, args.prior_mean, args.prior_var)?;
    let region = FeasibleRegion::new(prior);
    let check = region.classify(lambda)?;
    let status = serde_json::to_value(check.status).expect("enum serialises");
    let status = status.as_str().unwrap_or_default().to_string();
    if let Some(path) = &args.export_boundary {
        write_file(
            path,
            &boundary_export_csv(&prior, args.grid_z, args.grid_l4)?,
        )?;
    }
    let mut r = Report::new(Command::Feasibility(args.clone()));
    r.lambda_hat = Some(lambda);
    r.diagnostics = json!({
        "status": check.status,
        "min_value": nan_to_null(check.min_value),
        "argmin": check.argmin,
        "margin": region.margin(),
    });
    r.details = json!({ "bracket": region.bracket(lambda).coeffs() });
    let text = match args.output.format {
        Format::Json => r.to_json(),
        Format::Csv => format!(
            "l2,l3,l4,status,min_value,argmin\n{l2},{l3},{l4},{status},{},{}\n",
            check.min_value,
            check.argmin.map(|a| a.to_string()).unwrap_or_default()
        ),
    };
    let arg = check.argmin.map(|a| format!(" at {a}")).unwrap_or_default();
    eprintln!("{status}: quartic minimum {}{arg}", check.min_value);
    Ok(Outcome {
        text,
        exit_code: 0,
        report: Some(r),
    })
}

fn output_of(command: &Command) -> Option<&OutputArgs> {
    match command {
        Command::WorstDirection(a) => Some(&a.output),
        Command::Optimize(a) => Some(&a.output),
        Command::Mixture(a) => Some(&a.output),
        Command::Feasibility(a) => Some(&a.output),
        Command::Rerun(_) => None,
    }
}

/// Run a parsed command and return its rendered output.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::WorstDirection(a) => cmd_worst_direction(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Mixture(a) => cmd_mixture(a),
        Command::Feasibility(a) => cmd_feasibility(a),
        Command::Rerun(a) => {
            let raw = fs::read_to_string(&a.report).map_err(|source| CliError::Io {
                path: a.report.clone(),
                source,
            })?;
            let report: Report = serde_json::from_str(&raw).map_err(|e| {
                CliError::Usage(format!("{}: not a report: {e}", a.report.display()))
            })?;
            let mut config = report.config;
            if matches!(config, Command::Rerun(_)) {
                return Err(CliError::Usage("a rerun report cannot be rerun".into()));
            }
            match &mut config {
                Command::WorstDirection(x) => x.output.out = a.out.clone(),
                Command::Optimize(x) => x.output.out = a.out.clone(),
                Command::Mixture(x) => x.output.out = a.out.clone(),
                Command::Feasibility(x) => x.output.out = a.out.clone(),
                Command::Rerun(_) => unreachable!(),
            }
            run_command(&config)
        }
    }
}

/// Execute and deliver the output to `--out` or standard output.
pub fn run_command(command: &Command) -> Result<Outcome, CliError> {
    let outcome = execute(command)?;
    if let Command::Rerun(_) = command {
        return Ok(outcome);
    }
    match output_of(command).and_then(|o| o.out.as_ref()) {
        Some(path) => write_file(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_parsing() {
        let p = Path::new("x.csv");
        assert_eq!(
            parse_data("# header\n1.5\n\n -2 \n3e-1\n", p).unwrap(),
            vec![1.5, -2.0, 0.3]
        );
        match parse_data("1\n2\nabc\n", p) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_data("1,5\n", p).is_err());
        assert!(parse_data("nan\n", p).is_err());
    }

    #[test]
    fn parses_negative_lambda() {
        let cli = Cli::try_parse_from(["lmrobust", "feasibility", "0", "0", "-0.01"]).unwrap();
        let Command::Feasibility(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.lambda, vec![0.0, 0.0, -0.01]);
    }

    #[test]
    fn boundary_export_rows_are_tangent() {
        let prior = NefPrior::normal(0.0, 1.0).unwrap();
        let csv = boundary_export_csv(&prior, 13, 9).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert!(!rows.is_empty());
        for row in rows {
            let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
            assert!(v[5].abs() < 1e-9 && v[6].abs() < 1e-9, "{row}");
        }
    }
}
