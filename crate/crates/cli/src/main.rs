//! `daevs`: generate synthetic data, run adaptation experiments, evaluate
//! labels, solve OT problems and report the error-bound terms.

mod commands;
mod config;
mod error;
mod files;

use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use daevs::costs::{CostParams, LabelLoss};
use daevs::data::{Geometry, SyntheticSpec};
use daevs::diagnostics::BoundInputs;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{parse_variants, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::files::read_json;

/// Caps the worker threads used for concurrent runs.
const THREADS_ENV: &str = "DAEVS_THREADS";

#[derive(Parser)]
#[command(name = "daevs", version, about = "Optimal-transport domain adaptation with extra target features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic source/target pair as CSV files.
    Generate(GenerateArgs),
    /// Run adaptation over seeds and variants and write a summary report.
    Adapt(AdaptArgs),
    /// Score predicted labels against the truth.
    Evaluate(EvaluateArgs),
    /// Solve an OT problem with uniform marginals for a CSV cost matrix.
    OtSolve(OtArgs),
    /// Report the terms of the target-error upper bound.
    Bound(BoundArgs),
    /// Export a decision-value grid and labelled points of a stored run.
    Plotdata(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Cosine,
    Spiral,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON synthetic specification; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, short)]
    output_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_source: Option<usize>,
    #[arg(long)]
    n_target: Option<usize>,
    /// Start from the preset of this geometry.
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    #[arg(long)]
    noise_scale: Option<f64>,
}

#[derive(Args)]
struct AdaptArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
    /// First seed; runs use `seed .. seed + repeat`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeat: Option<usize>,
    /// Comma-separated: proposed, jdot-no-extra, jdot-ideal, fillup:<gamma>.
    #[arg(long)]
    variants: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    c_reg: Option<f64>,
    #[arg(long)]
    early_stop: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Hinge,
    ZeroOne,
    Squared,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predicted (or transferred) labels, `label` column.
    #[arg(long)]
    predicted: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Target features (CSV) for the Wasserstein gap.
    #[arg(long, requires = "manifest")]
    target: Option<PathBuf>,
    #[arg(long, requires = "target")]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hinge")]
    label_loss: LossArg,
}

#[derive(Args)]
struct OtArgs {
    #[arg(long)]
    cost: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// JSON bound inputs; flags override its fields.
    #[arg(long)]
    inputs: Option<PathBuf>,
    #[arg(long)]
    empirical_error: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    lambda_k: Option<f64>,
    #[arg(long)]
    n_target: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    wasserstein: Option<f64>,
    #[arg(long)]
    l0: Option<f64>,
    #[arg(long)]
    err_f0: Option<f64>,
    #[arg(long)]
    m_bound: Option<f64>,
    #[arg(long)]
    phi_lambda: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Run directory written by `adapt`.
    #[arg(long)]
    run: PathBuf,
    /// Defaults to the run directory.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    resolution: usize,
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(daevs::Error::from)?;
    emit(&(text + "\n"))
}

fn generate(args: GenerateArgs) -> CliResult<()> {
    let mut spec = match (&args.spec, args.geometry) {
        (Some(path), _) => read_json(path)?,
        (None, Some(GeometryArg::Spiral)) => SyntheticSpec::spiral(),
        (None, _) => SyntheticSpec::default(),
    };
    if let Some(g) = args.geometry {
        spec.geometry = match g {
            GeometryArg::Cosine => Geometry::Cosine,
            GeometryArg::Spiral => Geometry::Spiral,
        };
    }
    spec.seed = args.seed.unwrap_or(spec.seed);
    spec.n_source = args.n_source.unwrap_or(spec.n_source);
    spec.n_target = args.n_target.unwrap_or(spec.n_target);
    spec.noise_scale = args.noise_scale.unwrap_or(spec.noise_scale);
    print_json(&commands::generate::generate(&spec, &args.output_dir)?)
}

fn adapt(args: AdaptArgs) -> CliResult<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut run = config.resolved_run();
    run.seed = args.seed.unwrap_or(run.seed);
    run.n_iterations = args.iterations.unwrap_or(run.n_iterations);
    run.cost_params.alpha = args.alpha.unwrap_or(run.cost_params.alpha);
    run.model_spec.c_reg = args.c_reg.unwrap_or(run.model_spec.c_reg);
    run.early_stop |= args.early_stop;
    config.run = Some(run);
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    if let Some(r) = args.repeat {
        config.repeat = r;
    }
    if let Some(v) = &args.variants {
        config.variants = parse_variants(v)?;
    }
    let report = commands::adapt::adapt(&config)?;
    emit(&format!(
        "{}report: {}\n",
        report.table,
        config.output_dir.join("report.json").display()
    ))
}

fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let label_loss = match args.label_loss {
        LossArg::Hinge => LabelLoss::HingeOnDecisionValue,
        LossArg::ZeroOne => LabelLoss::ZeroOne,
        LossArg::Squared => LabelLoss::Squared,
    };
    let config = commands::evaluate::EvaluateConfig {
        predicted: args.predicted,
        truth: args.truth,
        target: args.target,
        manifest: args.manifest,
        cost_params: CostParams {
            alpha: args.alpha,
            label_loss,
            ..CostParams::default()
        },
    };
    config.cost_params.validate()?;
    print_json(&commands::evaluate::evaluate(config)?)
}

fn bound(args: BoundArgs) -> CliResult<()> {
    let mut fields: Map<String, Value> = match &args.inputs {
        Some(path) => read_json(path)?,
        None => Map::new(),
    };
    let overrides = [
        ("empirical_error", args.empirical_error.map(Value::from)),
        ("k", args.k.map(Value::from)),
        ("a", args.a.map(Value::from)),
        ("lambda_k", args.lambda_k.map(Value::from)),
        ("n_target", args.n_target.map(Value::from)),
        ("delta", args.delta.map(Value::from)),
        ("wasserstein", args.wasserstein.map(Value::from)),
        ("l0", args.l0.map(Value::from)),
        ("err_f0", args.err_f0.map(Value::from)),
        ("m_bound", args.m_bound.map(Value::from)),
        ("phi_lambda", args.phi_lambda.map(Value::from)),
    ];
    for (name, value) in overrides {
        if let Some(v) = value {
            fields.insert(name.to_string(), v);
        }
    }
    let inputs: BoundInputs = serde_json::from_value(Value::Object(fields)).map_err(|e| CliError::Config {
        path: args.inputs.clone().unwrap_or_else(|| PathBuf::from("<flags>")),
        message: e.to_string(),
    })?;
    print_json(&commands::bound::bound(inputs)?)
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Adapt(args) => adapt(args),
        Command::Evaluate(args) => evaluate(args),
        Command::OtSolve(args) => print_json(&commands::ot_solve::ot_solve(&args.cost, &args.output)?),
        Command::Bound(args) => bound(args),
        Command::Plotdata(args) => print_json(&commands::plotdata::plotdata(
            &args.run,
            args.output_dir.as_deref(),
            args.resolution,
        )?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
