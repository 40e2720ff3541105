//! The ideal inquiry cycle: alternating maximization of Bayesian surprise
//! (diversive phase, novelty seeking) and KLD (specific phase, evidence
//! seeking), generating surprise fluctuations between S_KLD and S_BS.
//!
//! The model itself only says the two gains are maximized alternately; the
//! step dynamics here are plumbing. `Jump` realizes the literal alternate
//! maximization (one step per phase), `Relax` approaches each target
//! geometrically for smoother traces.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{self, QuadratureConfig};
use crate::optimize::{self, OptimaRecord};
use crate::sweep::format_real;

/// How δ moves toward the active phase target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "rate")]
pub enum StepMode {
    /// Reach the target in a single step.
    Jump,
    /// δ ← δ + rate·(target − δ) per step, switching on arrival within tol.
    Relax(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Moving toward δ_BS: surprise rises, novelty is sought.
    Diversive,
    /// Moving toward δ_KLD: surprise falls, evidence is sought.
    Specific,
}

impl Phase {
    fn flipped(self) -> Self {
        match self {
            Phase::Diversive => Phase::Specific,
            Phase::Specific => Phase::Diversive,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Diversive => write!(f, "diversive"),
            Phase::Specific => write!(f, "specific"),
        }
    }
}

/// Emotion region of the arousal-potential axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emotion {
    Boredom,
    Pleasure,
    OptimalBand,
    Interest,
    Confusion,
}

impl std::fmt::Display for Emotion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Emotion::Boredom => "boredom",
            Emotion::Pleasure => "pleasure",
            Emotion::OptimalBand => "optimal-band",
            Emotion::Interest => "interest",
            Emotion::Confusion => "confusion",
        };
        write!(f, "{name}")
    }
}

fn default_boredom_frac() -> f64 {
    0.5
}

fn default_confusion_frac() -> f64 {
    1.5
}

/// Presentation thresholds splitting the surprise axis into emotion bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionThresholds {
    /// Boredom below this fraction of S_KLD.
    #[serde(default = "default_boredom_frac")]
    pub boredom_frac: f64,
    /// Confusion above this multiple of S_BS.
    #[serde(default = "default_confusion_frac")]
    pub confusion_frac: f64,
}

impl Default for EmotionThresholds {
    fn default() -> Self {
        Self {
            boredom_frac: default_boredom_frac(),
            confusion_frac: default_confusion_frac(),
        }
    }
}

fn default_cycles() -> usize {
    3
}

fn default_arrival_tol() -> f64 {
    1e-6
}

/// Configuration of one inquiry simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InquiryConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub initial_delta: f64,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    pub step_mode: StepMode,
    #[serde(default)]
    pub thresholds: EmotionThresholds,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Arrival tolerance in δ; also the optimizer tolerance for the optima.
    #[serde(default = "default_arrival_tol")]
    pub tol: f64,
}

impl InquiryConfig {
    pub fn new(params: ModelParams, step_mode: StepMode) -> Self {
        Self {
            params,
            initial_delta: 0.0,
            cycles: default_cycles(),
            step_mode,
            thresholds: EmotionThresholds::default(),
            quadrature: QuadratureConfig::default(),
            tol: default_arrival_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.quadrature.validate()?;
        if self.cycles < 1 {
            return Err(Error::InvalidParameter(
                "inquiry cycles must be at least 1".into(),
            ));
        }
        if !(self.initial_delta.is_finite() && self.initial_delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial delta must be nonnegative and finite, got {}",
                self.initial_delta
            )));
        }
        if let StepMode::Relax(rate) = self.step_mode {
            if !(rate.is_finite() && rate > 0.0 && rate <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "relax rate must lie in (0, 1], got {rate}"
                )));
            }
            if rate < 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "relax rate {rate} is too small to terminate"
                )));
            }
        }
        let t = self.thresholds;
        if !(t.boredom_frac.is_finite() && t.boredom_frac > 0.0 && t.boredom_frac < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "boredom fraction must lie in (0, 1), got {}",
                t.boredom_frac
            )));
        }
        if !(t.confusion_frac.is_finite() && t.confusion_frac > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confusion fraction must exceed 1, got {}",
                t.confusion_frac
            )));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "arrival tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// One logged visit of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InquiryStep {
    pub index: usize,
    pub phase: Phase,
    pub delta: f64,
    pub surprise: f64,
    pub kld: f64,
    pub bs: f64,
    pub ig: f64,
    pub emotion: Emotion,
}

/// Full trajectory with the optima it oscillates between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InquiryTrace {
    pub config: InquiryConfig,
    pub optima: OptimaRecord,
    pub steps: Vec<InquiryStep>,
}

/// Maps a surprise level to its emotion band given the optima.
///
/// Bands partition the axis: boredom below boredom_frac·S_KLD, pleasure up
/// to S_KLD (climbing the KLD hill from the left), the optimal band on
/// [S_KLD, S_BS], interest up to confusion_frac·S_BS (the KLD climb from
/// the right), confusion beyond.
pub fn label_emotion(
    surprise: f64,
    optima: &OptimaRecord,
    thresholds: &EmotionThresholds,
) -> Emotion {
    if surprise < thresholds.boredom_frac * optima.s_kld {
        Emotion::Boredom
    } else if surprise < optima.s_kld {
        Emotion::Pleasure
    } else if surprise <= optima.s_bs {
        Emotion::OptimalBand
    } else if surprise <= thresholds.confusion_frac * optima.s_bs {
        Emotion::Interest
    } else {
        Emotion::Confusion
    }
}

/// Runs the alternating-maximization cycle.
///
/// The opening phase is diversive unless the start point already sits above
/// δ_BS; each cycle is one diversive plus one specific phase completion.
/// Refuses to run when the optima have not converged.
pub fn simulate(config: &InquiryConfig) -> Result<InquiryTrace> {
    config.validate()?;
    let optima = optimize::find_optima(
        &config.params,
        &config.quadrature,
        optimize::default_search_bound(&config.params),
        config.tol,
    );
    if !optima.converged.all() {
        return Err(Error::OptimaNotConverged {
            kld: optima.converged.kld,
            bs: optima.converged.bs,
            ig: optima.converged.ig,
        });
    }

    let mut phase = if config.initial_delta > optima.delta_bs {
        Phase::Specific
    } else {
        Phase::Diversive
    };

    let mut steps = Vec::new();
    let mut delta = config.initial_delta;
    let mut log = |index: usize, phase: Phase, delta: f64| -> Result<()> {
        let gains = numerics::noisy_gains(&config.params, delta, &config.quadrature)?;
        let surprise = config.params.surprise(delta);
        steps.push(InquiryStep {
            index,
            phase,
            delta,
            surprise,
            kld: gains.kld,
            bs: gains.bs,
            ig: gains.kld + gains.bs,
            emotion: label_emotion(surprise, &optima, &config.thresholds),
        });
        Ok(())
    };

    log(0, phase, delta)?;

    let mut index = 1;
    const STEP_BUDGET: usize = 1_000_000;
    for _ in 0..2 * config.cycles {
        let target = match phase {
            Phase::Diversive => optima.delta_bs,
            Phase::Specific => optima.delta_kld,
        };
        loop {
            delta = match config.step_mode {
                StepMode::Jump => target,
                StepMode::Relax(rate) => delta + rate * (target - delta),
            };
            log(index, phase, delta)?;
            index += 1;
            if index > STEP_BUDGET {
                return Err(Error::InvalidParameter(format!(
                    "inquiry simulation exceeded {STEP_BUDGET} steps before finishing"
                )));
            }
            if (delta - target).abs() <= config.tol {
                break;
            }
        }
        phase = phase.flipped();
    }

    Ok(InquiryTrace {
        config: *config,
        optima,
        steps,
    })
}

/// Writes the trace as CSV (`step,phase,delta,surprise,kld,bs,ig,emotion`);
/// returns the number of data rows.
pub fn export_trace_csv<W: Write>(trace: &InquiryTrace, out: &mut W) -> Result<usize> {
    writeln!(out, "step,phase,delta,surprise,kld,bs,ig,emotion")?;
    for s in &trace.steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.index,
            s.phase,
            format_real(s.delta),
            format_real(s.surprise),
            format_real(s.kld),
            format_real(s.bs),
            format_real(s.ig),
            s.emotion,
        )?;
    }
    Ok(trace.steps.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_config(step_mode: StepMode) -> InquiryConfig {
        InquiryConfig::new(ModelParams::new(10.0, 1.0).unwrap(), step_mode)
    }

    #[test]
    fn jump_trace_oscillates_between_the_two_optima() {
        let config = canonical_config(StepMode::Jump);
        let trace = simulate(&config).unwrap();
        // 1 initial step + 2 per cycle.
        assert_eq!(trace.steps.len(), 1 + 2 * config.cycles);
        assert_eq!(trace.steps[0].delta, 0.0);
        let (d_bs, d_kld) = (trace.optima.delta_bs, trace.optima.delta_kld);
        for (i, step) in trace.steps.iter().enumerate().skip(1) {
            let expect = if i % 2 == 1 { d_bs } else { d_kld };
            assert_eq!(step.delta, expect, "step {i}");
        }
        // Surprise oscillates between the two optimal surprises.
        assert_eq!(trace.steps[1].surprise, trace.optima.s_bs);
        assert_eq!(trace.steps[2].surprise, trace.optima.s_kld);
    }

    #[test]
    fn phases_alternate_after_opening_approach() {
        let trace = simulate(&canonical_config(StepMode::Jump)).unwrap();
        for (i, step) in trace.steps.iter().enumerate().skip(1) {
            let expect = if i % 2 == 1 {
                Phase::Diversive
            } else {
                Phase::Specific
            };
            assert_eq!(step.phase, expect);
        }
    }

    #[test]
    fn start_above_band_opens_with_specific_phase() {
        let mut config = canonical_config(StepMode::Jump);
        config.initial_delta = 50.0;
        let trace = simulate(&config).unwrap();
        assert!(config.initial_delta > trace.optima.delta_bs);
        assert_eq!(trace.steps[1].phase, Phase::Specific);
        assert_eq!(trace.steps[1].delta, trace.optima.delta_kld);
    }

    #[test]
    fn optimal_band_contains_the_ig_optimum() {
        let trace = simulate(&canonical_config(StepMode::Jump)).unwrap();
        let o = &trace.optima;
        assert!(o.s_kld <= o.s_ig && o.s_ig <= o.s_bs);
        assert_eq!(
            label_emotion(o.s_ig, o, &EmotionThresholds::default()),
            Emotion::OptimalBand
        );
    }

    #[test]
    fn full_rate_relaxation_equals_jump() {
        let jump = simulate(&canonical_config(StepMode::Jump)).unwrap();
        let relax = simulate(&canonical_config(StepMode::Relax(1.0))).unwrap();
        assert_eq!(jump.steps.len(), relax.steps.len());
        for (a, b) in jump.steps.iter().zip(&relax.steps) {
            assert_eq!(a.delta, b.delta);
            assert_eq!(a.phase, b.phase);
        }
    }

    #[test]
    fn relax_trace_stays_in_band_and_amplitude_approaches_gap() {
        let mut config = canonical_config(StepMode::Relax(0.5));
        config.cycles = 4;
        let trace = simulate(&config).unwrap();
        let o = &trace.optima;

        // After the first arrival at δ_BS, never leave [δ_KLD−tol, δ_BS+tol].
        let first_arrival = trace
            .steps
            .iter()
            .position(|s| (s.delta - o.delta_bs).abs() <= config.tol)
            .expect("diversive phase must arrive");
        for step in &trace.steps[first_arrival..] {
            assert!(step.delta >= o.delta_kld - config.tol);
            assert!(step.delta <= o.delta_bs + config.tol);
        }

        // Turning points alternate near δ_BS and δ_KLD; their gaps approach
        // d_delta from below.
        let turns: Vec<f64> = trace
            .steps
            .iter()
            .filter(|s| {
                (s.delta - o.delta_bs).abs() <= config.tol
                    || (s.delta - o.delta_kld).abs() <= config.tol
            })
            .map(|s| s.delta)
            .collect();
        assert!(turns.len() >= 2 * config.cycles);
        for pair in turns.windows(2) {
            let amplitude = (pair[1] - pair[0]).abs();
            assert!(amplitude <= o.d_delta + 1e-12);
            assert!(amplitude >= o.d_delta - 2.0 * config.tol);
        }
    }

    #[test]
    fn emotion_labels_partition_the_surprise_axis_in_order() {
        let trace = simulate(&canonical_config(StepMode::Jump)).unwrap();
        let o = &trace.optima;
        let thresholds = EmotionThresholds::default();
        let hi = 2.0 * thresholds.confusion_frac * o.s_bs;
        let mut last = Emotion::Boredom;
        let mut seen = vec![last];
        let mut s = 0.0;
        while s <= hi {
            let e = label_emotion(s, o, &thresholds);
            if e != last {
                seen.push(e);
                last = e;
            }
            s += o.s_bs * 1e-4;
        }
        assert_eq!(
            seen,
            vec![
                Emotion::Boredom,
                Emotion::Pleasure,
                Emotion::OptimalBand,
                Emotion::Interest,
                Emotion::Confusion
            ]
        );
    }

    #[test]
    fn trace_is_deterministic() {
        let a = simulate(&canonical_config(StepMode::Relax(0.3))).unwrap();
        let b = simulate(&canonical_config(StepMode::Relax(0.3))).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn csv_export_has_schema_header() {
        let trace = simulate(&canonical_config(StepMode::Jump)).unwrap();
        let mut buf = Vec::new();
        let rows = export_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,phase,delta,surprise,kld,bs,ig,emotion"
        );
        assert_eq!(rows, trace.steps.len());
        assert!(text.contains("diversive"));
    }

    #[test]
    fn config_validation_rejects_bad_rates_and_thresholds() {
        let mut config = canonical_config(StepMode::Relax(0.0));
        assert!(config.validate().is_err());
        config.step_mode = StepMode::Relax(1.5);
        assert!(config.validate().is_err());
        config.step_mode = StepMode::Jump;
        config.thresholds.boredom_frac = 1.2;
        assert!(config.validate().is_err());
        config.thresholds = EmotionThresholds::default();
        config.cycles = 0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn refuses_unconverged_optima() {
        // A microscopic quadrature budget forces objective failures.
        let mut config = canonical_config(StepMode::Jump);
        config.quadrature.max_subdivisions = 1;
        match simulate(&config) {
            Err(Error::OptimaNotConverged { .. }) => {}
            other => panic!("expected OptimaNotConverged, got {other:?}"),
        }
    }
}
