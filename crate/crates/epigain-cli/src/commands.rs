//! Implementation of the five subcommands. Each takes fully resolved
//! options (flags merged over any `--config` file) and writes to the
//! chosen destination.

use std::fs;
use std::io::Write;

use serde::Serialize;

use epigain::inquiry::{self, EmotionThresholds, InquiryConfig, StepMode};
use epigain::numerics::{self, QuadratureConfig};
use epigain::optimize::{self, OptimaRecord};
use epigain::sweep::{self, format_real, AxisRange, SweepSpec};
use epigain::{efe, ModelParams};

use crate::svg::{self, Band, Heatmap, LinePlot, Series};
use crate::{CliError, CliResult, Format};

/// Output destination: a file path or `-` for stdout.
pub fn write_output(path: &str, content: &[u8]) -> CliResult<()> {
    if path == "-" {
        std::io::stdout()
            .write_all(content)
            .map_err(|e| CliError::Runtime(format!("writing stdout: {e}")))
    } else {
        fs::write(path, content).map_err(|e| CliError::Runtime(format!("writing {path}: {e}")))
    }
}

fn model_params(sp: f64, sl: f64, eps: f64, n: u32) -> CliResult<ModelParams> {
    Ok(ModelParams::new(sp, sl)?
        .with_epsilon(eps)?
        .with_observations(n, 0.0, 0.0)?)
}

// ---------------------------------------------------------------- eval

pub struct EvalOptions {
    pub sp: f64,
    pub sl: f64,
    pub eps: f64,
    pub n: u32,
    pub delta_max: f64,
    pub steps: usize,
    pub out: String,
    pub format: Format,
}

#[derive(Serialize)]
struct EvalRow {
    delta: f64,
    evidence: f64,
    surprise: f64,
    f: f64,
    kld: f64,
    bs: f64,
    ig: f64,
    u: f64,
    w_post: f64,
    w_pri: f64,
}

pub fn run_eval(opts: &EvalOptions) -> CliResult<()> {
    if !(opts.delta_max.is_finite() && opts.delta_max > 0.0) {
        return Err(CliError::Usage(format!(
            "--delta-max must be positive, got {}",
            opts.delta_max
        )));
    }
    if opts.steps < 1 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let params = model_params(opts.sp, opts.sl, opts.eps, opts.n)?;
    let cfg = QuadratureConfig::default();
    let coeffs = params.free_energy_coeffs();

    let mut rows = Vec::with_capacity(opts.steps + 1);
    for i in 0..=opts.steps {
        let delta = opts.delta_max * i as f64 / opts.steps as f64;
        let point = numerics::gain_point(&params, delta, &cfg)?;
        rows.push(EvalRow {
            delta,
            evidence: point.evidence,
            surprise: point.surprise,
            f: coeffs.eval(delta),
            kld: point.kld,
            bs: point.bs,
            ig: point.ig,
            u: point.u,
            w_post: point.w_post,
            w_pri: point.w_pri,
        });
    }

    let content = match opts.format {
        Format::Csv => {
            let mut text = String::from("delta,evidence,surprise,f,kld,bs,ig,u,w_post,w_pri\n");
            for r in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    format_real(r.delta),
                    format_real(r.evidence),
                    format_real(r.surprise),
                    format_real(r.f),
                    format_real(r.kld),
                    format_real(r.bs),
                    format_real(r.ig),
                    format_real(r.u),
                    format_real(r.w_post),
                    format_real(r.w_pri),
                ));
            }
            text.into_bytes()
        }
        Format::Json => {
            let doc = serde_json::json!({ "params": params, "rows": rows });
            let mut text = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Runtime(format!("json: {e}")))?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Svg => {
            let series = |f: &dyn Fn(&EvalRow) -> (f64, f64), label: &str| Series {
                label: label.to_string(),
                points: rows.iter().map(f).collect(),
            };
            let left = LinePlot {
                title: format!("information gains (s_p={}, s_l={})", opts.sp, opts.sl),
                x_label: "prediction error".into(),
                y_label: "information gain".into(),
                series: vec![
                    series(&|r| (r.delta, r.ig), "IG"),
                    series(&|r| (r.delta, r.kld), "KLD"),
                    series(&|r| (r.delta, r.bs), "BS"),
                ],
            };
            let right = LinePlot {
                title: "information gains vs surprise".into(),
                x_label: "surprise".into(),
                y_label: "information gain".into(),
                series: vec![
                    series(&|r| (r.surprise, r.ig), "IG"),
                    series(&|r| (r.surprise, r.kld), "KLD"),
                    series(&|r| (r.surprise, r.bs), "BS"),
                ],
            };
            svg::render_pair(&left, &right).into_bytes()
        }
    };
    write_output(&opts.out, &content)
}

// ------------------------------------------------------------ optimize

pub struct OptimizeOptions {
    pub sp: f64,
    pub sl: f64,
    pub eps: f64,
    pub n: u32,
    /// Search bound; None means the default bound with auto-widening.
    pub delta_max: Option<f64>,
    pub tol: f64,
    pub strict: bool,
    pub out: String,
    pub format: Format,
}

fn optima_csv(record: &OptimaRecord) -> String {
    let mut text = String::from(sweep::CSV_HEADER);
    text.push('\n');
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        format_real(record.params.s_l),
        format_real(record.params.s_p),
        format_real(record.max_kld),
        format_real(record.max_bs),
        format_real(record.max_ig),
        format_real(record.delta_kld),
        format_real(record.delta_bs),
        format_real(record.delta_ig),
        format_real(record.s_kld),
        format_real(record.s_bs),
        format_real(record.s_ig),
        format_real(record.d_delta),
        format_real(record.d_s),
        record.converged.all(),
    ));
    text
}

pub fn run_optimize(opts: &OptimizeOptions) -> CliResult<()> {
    let params = model_params(opts.sp, opts.sl, opts.eps, opts.n)?;
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {}",
            opts.tol
        )));
    }
    if let Some(bound) = opts.delta_max {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(CliError::Usage(format!(
                "--delta-max must be positive, got {bound}"
            )));
        }
    }
    let bound = opts
        .delta_max
        .unwrap_or_else(|| optimize::default_search_bound(&params));
    let record = optimize::find_optima(&params, &QuadratureConfig::default(), bound, opts.tol);
    if opts.strict && !record.converged.all() {
        return Err(CliError::Runtime(format!(
            "optimization did not converge (kld: {}, bs: {}, ig: {})",
            record.converged.kld, record.converged.bs, record.converged.ig
        )));
    }

    let content = match opts.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&record)
                .map_err(|e| CliError::Runtime(format!("json: {e}")))?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => optima_csv(&record).into_bytes(),
        Format::Svg => {
            return Err(CliError::Usage(
                "optimize does not produce SVG output; use csv or json".into(),
            ))
        }
    };
    write_output(&opts.out, &content)
}

// --------------------------------------------------------------- sweep

pub struct SweepOptions {
    pub sl: AxisRange,
    pub sp: AxisRange,
    pub eps: f64,
    pub n: u32,
    pub tol: f64,
    pub jobs: usize,
    pub heatmap: Option<HeatmapField>,
    pub progress: bool,
    pub out: String,
    pub format: Format,
}

/// Numeric fields of an [`OptimaRecord`] that can be drawn as a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapField {
    MaxKld,
    MaxBs,
    MaxIg,
    DeltaKld,
    DeltaBs,
    DeltaIg,
    SKld,
    SBs,
    SIg,
    DDelta,
    DS,
}

impl HeatmapField {
    pub fn parse(name: &str) -> Result<Self, String> {
        Ok(match name {
            "max_kld" => Self::MaxKld,
            "max_bs" => Self::MaxBs,
            "max_ig" => Self::MaxIg,
            "delta_kld" => Self::DeltaKld,
            "delta_bs" => Self::DeltaBs,
            "delta_ig" => Self::DeltaIg,
            "s_kld" => Self::SKld,
            "s_bs" => Self::SBs,
            "s_ig" => Self::SIg,
            "d_delta" => Self::DDelta,
            "d_s" => Self::DS,
            other => {
                return Err(format!(
                    "unknown heatmap field {other:?}; expected one of max_kld, max_bs, max_ig, \
                     delta_kld, delta_bs, delta_ig, s_kld, s_bs, s_ig, d_delta, d_s"
                ))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MaxKld => "max_kld",
            Self::MaxBs => "max_bs",
            Self::MaxIg => "max_ig",
            Self::DeltaKld => "delta_kld",
            Self::DeltaBs => "delta_bs",
            Self::DeltaIg => "delta_ig",
            Self::SKld => "s_kld",
            Self::SBs => "s_bs",
            Self::SIg => "s_ig",
            Self::DDelta => "d_delta",
            Self::DS => "d_s",
        }
    }

    fn get(&self, record: &OptimaRecord) -> f64 {
        match self {
            Self::MaxKld => record.max_kld,
            Self::MaxBs => record.max_bs,
            Self::MaxIg => record.max_ig,
            Self::DeltaKld => record.delta_kld,
            Self::DeltaBs => record.delta_bs,
            Self::DeltaIg => record.delta_ig,
            Self::SKld => record.s_kld,
            Self::SBs => record.s_bs,
            Self::SIg => record.s_ig,
            Self::DDelta => record.d_delta,
            Self::DS => record.d_s,
        }
    }
}

/// Parses the `min:max:step` range syntax of the sweep axes.
pub fn parse_range(text: &str) -> Result<AxisRange, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!(
            "range {text:?} must have the form min:max:step, e.g. 1:50:5"
        ));
    }
    let parse = |s: &str, what: &str| -> Result<f64, String> {
        s.parse::<f64>()
            .map_err(|_| format!("range {text:?}: {what} {s:?} is not a number"))
    };
    AxisRange::new(
        parse(parts[0], "minimum")?,
        parse(parts[1], "maximum")?,
        parse(parts[2], "step")?,
    )
    .map_err(|e| e.to_string())
}

pub fn run_sweep(opts: &SweepOptions) -> CliResult<()> {
    let mut spec = SweepSpec::new(opts.sl, opts.sp);
    spec.epsilon = opts.eps;
    spec.n = opts.n;
    spec.tol = opts.tol;
    spec.worker_count_hint = opts.jobs;
    spec.validate()?;

    let grid = if opts.progress {
        sweep::run_sweep_with_progress(&spec, |done, total| {
            eprint!("\r{done}/{total} cells");
            if done == total {
                eprintln!();
            }
        })?
    } else {
        sweep::run_sweep(&spec)?
    };

    let content = match (opts.format, opts.heatmap) {
        (Format::Csv, None) => {
            let mut buf = Vec::new();
            sweep::export_csv(&grid, &mut buf)?;
            buf
        }
        (Format::Json, None) => {
            let mut buf = Vec::new();
            sweep::export_json(&grid, &mut buf)?;
            buf
        }
        (Format::Svg, Some(field)) => {
            let x_values = spec.s_l.values();
            let y_values = spec.s_p.values();
            let cells: Vec<f64> = grid.records.iter().map(|r| field.get(r)).collect();
            Heatmap {
                title: field.name().to_string(),
                x_values: &x_values,
                y_values: &y_values,
                cells: &cells,
            }
            .render()
            .into_bytes()
        }
        (Format::Svg, None) => {
            return Err(CliError::Usage(
                "sweep with --format svg needs --heatmap <field>".into(),
            ))
        }
        (_, Some(_)) => return Err(CliError::Usage("--heatmap requires --format svg".into())),
    };
    write_output(&opts.out, &content)
}

// ------------------------------------------------------------ simulate

pub struct SimulateOptions {
    pub sp: f64,
    pub sl: f64,
    pub eps: f64,
    pub n: u32,
    pub delta0: f64,
    pub cycles: usize,
    pub mode: StepMode,
    pub boredom_frac: f64,
    pub confusion_frac: f64,
    pub tol: f64,
    pub out: String,
    pub format: Format,
}

pub fn run_simulate(opts: &SimulateOptions) -> CliResult<()> {
    let params = model_params(opts.sp, opts.sl, opts.eps, opts.n)?;
    let config = InquiryConfig {
        params,
        initial_delta: opts.delta0,
        cycles: opts.cycles,
        step_mode: opts.mode,
        thresholds: EmotionThresholds {
            boredom_frac: opts.boredom_frac,
            confusion_frac: opts.confusion_frac,
        },
        quadrature: QuadratureConfig::default(),
        tol: opts.tol,
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let trace = inquiry::simulate(&config)?;

    let content = match opts.format {
        Format::Csv => {
            let mut buf = Vec::new();
            inquiry::export_trace_csv(&trace, &mut buf)?;
            buf
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&trace)
                .map_err(|e| CliError::Runtime(format!("json: {e}")))?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Svg => {
            let o = &trace.optima;
            let points: Vec<(usize, f64)> =
                trace.steps.iter().map(|s| (s.index, s.surprise)).collect();
            let top = (opts.confusion_frac * o.s_bs * 1.15)
                .max(points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));
            let bottom = (0.25 * opts.boredom_frac * o.s_kld)
                .min(points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
            let bands = [
                Band {
                    label: "boredom".into(),
                    y_lo: bottom,
                    y_hi: opts.boredom_frac * o.s_kld,
                    color: "#9e9e9e",
                },
                Band {
                    label: "pleasure".into(),
                    y_lo: opts.boredom_frac * o.s_kld,
                    y_hi: o.s_kld,
                    color: "#8bc34a",
                },
                Band {
                    label: "optimal band".into(),
                    y_lo: o.s_kld,
                    y_hi: o.s_bs,
                    color: "#ffd54f",
                },
                Band {
                    label: "interest".into(),
                    y_lo: o.s_bs,
                    y_hi: opts.confusion_frac * o.s_bs,
                    color: "#4fc3f7",
                },
                Band {
                    label: "confusion".into(),
                    y_lo: opts.confusion_frac * o.s_bs,
                    y_hi: top,
                    color: "#e57373",
                },
            ];
            svg::render_trace(
                &points,
                &bands,
                &format!("inquiry cycle (s_p={}, s_l={})", opts.sp, opts.sl),
            )
            .into_bytes()
        }
    };
    write_output(&opts.out, &content)
}

// ----------------------------------------------------------------- efe

pub struct EfeOptions {
    pub model_path: String,
    pub gamma: Option<f64>,
    pub check: bool,
    pub out: String,
    pub format: Format,
}

#[derive(Serialize)]
struct EfeReport {
    gamma: f64,
    policies: Vec<EfePolicyReport>,
}

#[derive(Serialize)]
struct EfePolicyReport {
    policy: String,
    g: f64,
    risk: f64,
    p_f: f64,
    p_kld: f64,
    p_bs: f64,
    prior: f64,
}

pub fn run_efe(opts: &EfeOptions) -> CliResult<()> {
    let text = fs::read_to_string(&opts.model_path)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", opts.model_path)))?;
    let model = efe::DiscretePolicyModel::from_json(&text)?;
    let gamma = opts.gamma.unwrap_or(model.gamma);
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(CliError::Usage(format!(
            "--gamma must be nonnegative and finite, got {gamma}"
        )));
    }

    let breakdowns = efe::efe_all(&model)?;
    if opts.check {
        for b in &breakdowns {
            let residual = (b.risk + b.p_f - (b.p_kld + b.p_bs) - b.g).abs();
            if residual > 1e-10 {
                return Err(CliError::Runtime(format!(
                    "decomposition identity violated for policy {:?}: residual {residual}",
                    b.policy
                )));
            }
        }
        eprintln!("identity check passed for {} policies", breakdowns.len());
    }
    let prior = efe::policy_prior(&breakdowns, gamma)?;

    let report = EfeReport {
        gamma,
        policies: breakdowns
            .iter()
            .zip(&prior)
            .map(|(b, &p)| EfePolicyReport {
                policy: b.policy.clone(),
                g: b.g,
                risk: b.risk,
                p_f: b.p_f,
                p_kld: b.p_kld,
                p_bs: b.p_bs,
                prior: p,
            })
            .collect(),
    };

    let content = match opts.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Runtime(format!("json: {e}")))?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => {
            let mut text = String::from("policy,g,risk,p_f,p_kld,p_bs,prior\n");
            for p in &report.policies {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    p.policy,
                    format_real(p.g),
                    format_real(p.risk),
                    format_real(p.p_f),
                    format_real(p.p_kld),
                    format_real(p.p_bs),
                    format_real(p.prior),
                ));
            }
            text.into_bytes()
        }
        Format::Svg => {
            return Err(CliError::Usage(
                "efe does not produce SVG output; use json or csv".into(),
            ))
        }
    };
    write_output(&opts.out, &content)
}
