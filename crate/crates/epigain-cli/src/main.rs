//! `epigain` — curve evaluation, optimization, uncertainty sweeps, inquiry
//! simulation and expected-free-energy analysis from the command line.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 numerical or
//! convergence failure.

mod commands;
mod svg;

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use epigain::inquiry::StepMode;
use epigain::ModelParams;

use commands::{
    parse_range, EfeOptions, EvalOptions, HeatmapField, OptimizeOptions, SimulateOptions,
    SweepOptions,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed config, schema violations — exit 2.
    Usage(String),
    /// Numerical or convergence failures, I/O problems — exit 3.
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<epigain::Error> for CliError {
    fn from(err: epigain::Error) -> Self {
        if err.is_validation() {
            CliError::Usage(err.to_string())
        } else {
            CliError::Runtime(err.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Parser)]
#[command(
    name = "epigain",
    about = "Information-gain model of epistemic emotions: evidence, surprise, \
             KLD/BS gains, optimal prediction errors, uncertainty sweeps, \
             inquiry-cycle simulation and expected free energy",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate evidence, surprise, free energy and information gains over a δ grid
    Eval(EvalArgs),
    /// Find the optimal prediction errors and surprises for KLD, BS and IG
    Optimize(OptimizeArgs),
    /// Sweep the (s_l, s_p) uncertainty grid and export per-cell optima
    Sweep(SweepArgs),
    /// Simulate the alternating curiosity-driven inquiry cycle
    Simulate(SimulateArgs),
    /// Analyze expected free energy of a discrete policy model
    Efe(EfeArgs),
}

/// Generative-model flags shared by the scalar subcommands.
#[derive(Args)]
struct ParamArgs {
    /// Prior variance s_p (prediction uncertainty)
    #[arg(long)]
    sp: Option<f64>,
    /// Likelihood variance s_l (observation uncertainty)
    #[arg(long)]
    sl: Option<f64>,
    /// Uniform-likelihood probability ε
    #[arg(long)]
    eps: Option<f64>,
    /// Number of observations
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Upper end of the δ grid
    #[arg(long)]
    delta_max: Option<f64>,
    /// Number of grid intervals (rows = steps + 1)
    #[arg(long)]
    steps: Option<usize>,
    /// Output path, `-` for stdout
    #[arg(long)]
    out: Option<String>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file providing defaults for any flag
    #[arg(long)]
    config: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EvalFileConfig {
    sp: Option<f64>,
    sl: Option<f64>,
    eps: Option<f64>,
    n: Option<u32>,
    delta_max: Option<f64>,
    steps: Option<usize>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// δ search bound (default: 10·√(s_p+s_l), auto-widened)
    #[arg(long)]
    delta_max: Option<f64>,
    /// Optimizer tolerance in δ
    #[arg(long)]
    tol: Option<f64>,
    /// Exit with code 3 if any objective fails to converge
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptimizeFileConfig {
    sp: Option<f64>,
    sl: Option<f64>,
    eps: Option<f64>,
    n: Option<u32>,
    delta_max: Option<f64>,
    tol: Option<f64>,
    strict: Option<bool>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Likelihood-variance axis as min:max:step (inclusive)
    #[arg(long)]
    sl: Option<String>,
    /// Prior-variance axis as min:max:step (inclusive)
    #[arg(long)]
    sp: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Optimizer tolerance in δ
    #[arg(long)]
    tol: Option<f64>,
    /// Worker count (default: all cores; EPIGAIN_JOBS is the fallback)
    #[arg(long)]
    jobs: Option<usize>,
    /// Render an SVG heatmap of the named record field
    #[arg(long)]
    heatmap: Option<String>,
    /// Print per-cell progress to stderr
    #[arg(long)]
    progress: bool,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepFileConfig {
    sl: Option<String>,
    sp: Option<String>,
    eps: Option<f64>,
    n: Option<u32>,
    tol: Option<f64>,
    jobs: Option<usize>,
    heatmap: Option<String>,
    progress: Option<bool>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Starting prediction error
    #[arg(long)]
    delta0: Option<f64>,
    /// Number of diversive+specific cycles
    #[arg(long)]
    cycles: Option<usize>,
    /// Step dynamics
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Relaxation rate in (0, 1]; only used with --mode relax
    #[arg(long)]
    rate: Option<f64>,
    /// Boredom threshold as a fraction of S_KLD
    #[arg(long)]
    boredom_frac: Option<f64>,
    /// Confusion threshold as a multiple of S_BS
    #[arg(long)]
    confusion_frac: Option<f64>,
    /// Arrival tolerance in δ
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Jump,
    Relax,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SimulateFileConfig {
    sp: Option<f64>,
    sl: Option<f64>,
    eps: Option<f64>,
    n: Option<u32>,
    delta0: Option<f64>,
    cycles: Option<usize>,
    mode: Option<String>,
    rate: Option<f64>,
    boredom_frac: Option<f64>,
    confusion_frac: Option<f64>,
    tol: Option<f64>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Args)]
struct EfeArgs {
    /// Policy-model JSON document
    #[arg(long)]
    model: Option<String>,
    /// Policy precision γ; overrides the model's value
    #[arg(long)]
    gamma: Option<f64>,
    /// Re-assert the decomposition identity; exit 3 on violation
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EfeFileConfig {
    model: Option<String>,
    gamma: Option<f64>,
    check: Option<bool>,
    out: Option<String>,
    format: Option<String>,
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: &Option<String>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("reading config {p}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {p}: {e}")))
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

fn parse_format(text: &str) -> CliResult<Format> {
    match text {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        "svg" => Ok(Format::Svg),
        other => Err(CliError::Usage(format!(
            "unknown format {other:?}; expected csv, json or svg"
        ))),
    }
}

fn resolve_format(
    flag: Option<Format>,
    file: Option<String>,
    default: Format,
) -> CliResult<Format> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match file {
        Some(text) => parse_format(&text),
        None => Ok(default),
    }
}

fn jobs_from_env() -> CliResult<Option<usize>> {
    match std::env::var("EPIGAIN_JOBS") {
        Ok(text) => text
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("EPIGAIN_JOBS={text:?} is not a worker count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Eval(args) => {
            let file: EvalFileConfig = load_config(&args.config)?;
            let opts = EvalOptions {
                sp: require(args.params.sp.or(file.sp), "sp")?,
                sl: require(args.params.sl.or(file.sl), "sl")?,
                eps: args
                    .params
                    .eps
                    .or(file.eps)
                    .unwrap_or(ModelParams::DEFAULT_EPSILON),
                n: args.params.n.or(file.n).unwrap_or(1),
                delta_max: args.delta_max.or(file.delta_max).unwrap_or(20.0),
                steps: args.steps.or(file.steps).unwrap_or(400),
                out: args.out.or(file.out).unwrap_or_else(|| "-".into()),
                format: resolve_format(args.format, file.format, Format::Csv)?,
            };
            commands::run_eval(&opts)
        }
        Command::Optimize(args) => {
            let file: OptimizeFileConfig = load_config(&args.config)?;
            let opts = OptimizeOptions {
                sp: require(args.params.sp.or(file.sp), "sp")?,
                sl: require(args.params.sl.or(file.sl), "sl")?,
                eps: args
                    .params
                    .eps
                    .or(file.eps)
                    .unwrap_or(ModelParams::DEFAULT_EPSILON),
                n: args.params.n.or(file.n).unwrap_or(1),
                delta_max: args.delta_max.or(file.delta_max),
                tol: args
                    .tol
                    .or(file.tol)
                    .unwrap_or(epigain::optimize::DEFAULT_TOL),
                strict: args.strict || file.strict.unwrap_or(false),
                out: args.out.or(file.out).unwrap_or_else(|| "-".into()),
                format: resolve_format(args.format, file.format, Format::Json)?,
            };
            commands::run_optimize(&opts)
        }
        Command::Sweep(args) => {
            let file: SweepFileConfig = load_config(&args.config)?;
            let sl_text = require(args.sl.or(file.sl), "sl")?;
            let sp_text = require(args.sp.or(file.sp), "sp")?;
            let heatmap = match args.heatmap.or(file.heatmap) {
                Some(name) => Some(HeatmapField::parse(&name).map_err(CliError::Usage)?),
                None => None,
            };
            let jobs = match args.jobs {
                Some(j) => j,
                None => file.jobs.or(jobs_from_env()?).unwrap_or(0),
            };
            let default_format = if heatmap.is_some() {
                Format::Svg
            } else {
                Format::Csv
            };
            let opts = SweepOptions {
                sl: parse_range(&sl_text).map_err(CliError::Usage)?,
                sp: parse_range(&sp_text).map_err(CliError::Usage)?,
                eps: args
                    .eps
                    .or(file.eps)
                    .unwrap_or(ModelParams::DEFAULT_EPSILON),
                n: args.n.or(file.n).unwrap_or(1),
                tol: args
                    .tol
                    .or(file.tol)
                    .unwrap_or(epigain::optimize::DEFAULT_TOL),
                jobs,
                heatmap,
                progress: args.progress || file.progress.unwrap_or(false),
                out: args.out.or(file.out).unwrap_or_else(|| "-".into()),
                format: resolve_format(args.format, file.format, default_format)?,
            };
            commands::run_sweep(&opts)
        }
        Command::Simulate(args) => {
            let file: SimulateFileConfig = load_config(&args.config)?;
            let mode_arg = match args.mode {
                Some(m) => m,
                None => match file.mode.as_deref() {
                    None | Some("jump") => ModeArg::Jump,
                    Some("relax") => ModeArg::Relax,
                    Some(other) => {
                        return Err(CliError::Usage(format!(
                            "unknown mode {other:?}; expected jump or relax"
                        )))
                    }
                },
            };
            let mode = match mode_arg {
                ModeArg::Jump => StepMode::Jump,
                ModeArg::Relax => StepMode::Relax(args.rate.or(file.rate).unwrap_or(0.5)),
            };
            let opts = SimulateOptions {
                sp: require(args.params.sp.or(file.sp), "sp")?,
                sl: require(args.params.sl.or(file.sl), "sl")?,
                eps: args
                    .params
                    .eps
                    .or(file.eps)
                    .unwrap_or(ModelParams::DEFAULT_EPSILON),
                n: args.params.n.or(file.n).unwrap_or(1),
                delta0: args.delta0.or(file.delta0).unwrap_or(0.0),
                cycles: args.cycles.or(file.cycles).unwrap_or(5),
                mode,
                boredom_frac: args.boredom_frac.or(file.boredom_frac).unwrap_or(0.5),
                confusion_frac: args.confusion_frac.or(file.confusion_frac).unwrap_or(1.5),
                tol: args.tol.or(file.tol).unwrap_or(1e-6),
                out: args.out.or(file.out).unwrap_or_else(|| "-".into()),
                format: resolve_format(args.format, file.format, Format::Csv)?,
            };
            commands::run_simulate(&opts)
        }
        Command::Efe(args) => {
            let file: EfeFileConfig = load_config(&args.config)?;
            let opts = EfeOptions {
                model_path: require(args.model.or(file.model), "model")?,
                gamma: args.gamma.or(file.gamma),
                check: args.check || file.check.unwrap_or(false),
                out: args.out.or(file.out).unwrap_or_else(|| "-".into()),
                format: resolve_format(args.format, file.format, Format::Json)?,
            };
            commands::run_efe(&opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
