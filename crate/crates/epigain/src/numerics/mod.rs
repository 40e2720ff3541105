//! Quadrature-backed quantities of the uniform-noise model: the improper
//! integrals I and J, the noisy information gains, the perceived
//! uncertainty U, and the direct-KL oracle used throughout the tests.
//!
//! The I/J integrands contain ln(1 + ε·N_pri/(e·N_post)). By Bayes' rule
//! e·N_post = p(o|s)·N_pri, so the ratio collapses to ε/p(o|s) and the log
//! term is a softplus of (ln ε − ln p(o|s)); evaluating it that way avoids
//! the overflow of the raw inner exponential, which blows up already a few
//! dozen state units away from the observed mean.

pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ln_one_plus_exp, log_sum_exp};
use crate::model::ModelParams;

pub use quadrature::{integrate, Quadrature, QuadratureConfig};

/// Densities below this floor are treated as zero mass in KL integrands.
const DENSITY_FLOOR: f64 = 1e-300;

/// Log-density floor matching [`DENSITY_FLOOR`].
const LN_DENSITY_FLOOR: f64 = -690.0;

/// Base slack for negative KL values; the noisy compositions widen it by
/// the achieved quadrature error bound before treating a negative result
/// as an implementation bug.
const KL_SLACK: f64 = 1e-9;

/// Every computed quantity at one prediction error δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub delta: f64,
    pub evidence: f64,
    pub surprise: f64,
    pub kld: f64,
    pub bs: f64,
    /// Total information gain; always kld + bs by construction.
    pub ig: f64,
    /// Perceived uncertainty U = surprise − BS.
    pub u: f64,
    pub i_integral: f64,
    pub j_integral: f64,
    pub w_post: f64,
    pub w_pri: f64,
}

/// Integration window: the hull of the prior, posterior and observed means,
/// padded by `truncation_sigmas` combined standard deviations.
pub fn window(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> (f64, f64) {
    let anchored = params.at_delta(delta);
    let post_mean = anchored.gaussian_posterior().eta_post;
    let half = cfg.truncation_sigmas * params.combined_variance().sqrt();
    let lo = params.eta.min(post_mean).min(anchored.obs_mean);
    let hi = params.eta.max(post_mean).max(anchored.obs_mean);
    (lo - half, hi + half)
}

/// Clamps quadrature-noise negatives to zero. `slack` is the base slack
/// plus whatever error the composition accumulated; anything below it is an
/// implementation bug, not jitter.
fn clamp_kl(value: f64, slack: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -slack {
        Ok(0.0)
    } else {
        Err(Error::NegativeKl { value })
    }
}

fn integral_i_quad(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    if params.epsilon == 0.0 {
        return Ok(Quadrature {
            value: 0.0,
            error_bound: 0.0,
            subdivisions: 0,
        });
    }
    let anchored = params.at_delta(delta);
    let prior = params.prior();
    let ln_eps = params.epsilon.ln();
    let (lo, hi) = window(params, delta, cfg);
    integrate(
        |s| {
            let w = prior.pdf(s);
            if w < DENSITY_FLOOR {
                return 0.0;
            }
            w * ln_one_plus_exp(ln_eps - anchored.ln_likelihood(s))
        },
        lo,
        hi,
        cfg,
    )
}

fn integral_j_quad(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    if params.epsilon == 0.0 {
        return Ok(Quadrature {
            value: 0.0,
            error_bound: 0.0,
            subdivisions: 0,
        });
    }
    let anchored = params.at_delta(delta);
    let post = anchored.gaussian_posterior().to_gaussian();
    let ln_eps = params.epsilon.ln();
    let (lo, hi) = window(params, delta, cfg);
    integrate(
        |s| {
            let w = post.pdf(s);
            if w < DENSITY_FLOOR {
                return 0.0;
            }
            w * ln_one_plus_exp(ln_eps - anchored.ln_likelihood(s))
        },
        lo,
        hi,
        cfg,
    )
}

/// I = ∫ N_pri(s)·ln(1 + ε·N_pri(s)/(e(δ)·N_post(s))) ds.
pub fn integral_i(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(integral_i_quad(params, delta, cfg)?.value)
}

/// J: the same integrand weighted by the Gaussian posterior N_post.
pub fn integral_j(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(integral_j_quad(params, delta, cfg)?.value)
}

/// ln(1 + ε/e(δ)), the log correction shared by both noisy gains.
fn ln_noise_ratio(params: &ModelParams, delta: f64) -> f64 {
    params.ln_evidence_noisy(delta) - params.ln_evidence(delta)
}

/// KL divergence from prior to the mixture posterior:
/// KLD_ε = KLD_N + ln(1 + ε/e(δ)) − I.
///
/// With ε = 0 this is exactly the Gaussian-only KLD.
pub fn kld_noisy(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if params.epsilon == 0.0 {
        return Ok(params.kld_gaussian(delta));
    }
    let i = integral_i_quad(params, delta, cfg)?;
    clamp_kl(
        params.kld_gaussian(delta) + ln_noise_ratio(params, delta) - i.value,
        KL_SLACK + i.error_bound,
    )
}

pub(crate) struct NoisyGains {
    pub kld: f64,
    pub bs: f64,
    pub i: f64,
    pub j: f64,
}

/// Computes both gains sharing one evaluation of I and J.
pub(crate) fn noisy_gains(
    params: &ModelParams,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<NoisyGains> {
    if params.epsilon == 0.0 {
        return Ok(NoisyGains {
            kld: params.kld_gaussian(delta),
            bs: params.bs_gaussian(delta),
            i: 0.0,
            j: 0.0,
        });
    }
    let i = integral_i_quad(params, delta, cfg)?;
    let j = integral_j_quad(params, delta, cfg)?;
    let ln_term = ln_noise_ratio(params, delta);
    let kld_slack = KL_SLACK + i.error_bound;
    let kld = clamp_kl(params.kld_gaussian(delta) + ln_term - i.value, kld_slack)?;
    let mix = params.mixture_posterior(delta);
    let bs = clamp_kl(
        mix.w_post * (params.bs_gaussian(delta) - ln_term + j.value) - mix.w_pri * kld,
        KL_SLACK + j.error_bound + kld_slack,
    )?;
    Ok(NoisyGains {
        kld,
        bs,
        i: i.value,
        j: j.value,
    })
}

/// KL divergence from the mixture posterior to the prior:
/// BS_ε = w_post·(BS_N − ln(1 + ε/e) + J) − w_pri·KLD_ε.
pub fn bs_noisy(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(noisy_gains(params, delta, cfg)?.bs)
}

/// Total information gain KLD_ε + BS_ε.
pub fn total_gain(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let gains = noisy_gains(params, delta, cfg)?;
    Ok(gains.kld + gains.bs)
}

/// Perceived uncertainty U = −∫ posterior(s)·ln p_ε(o|s) ds.
///
/// The posterior is the mixture when ε > 0; with ε = 0 both the posterior
/// and the likelihood fall back to their Gaussian forms.
pub fn uncertainty_u(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let anchored = params.at_delta(delta);
    let mix = params.mixture_posterior(delta);
    let ln_eps = (params.epsilon > 0.0).then(|| params.epsilon.ln());
    let (lo, hi) = window(params, delta, cfg);
    let q = integrate(
        |s| {
            let w = mix.pdf(s);
            if w < DENSITY_FLOOR {
                return 0.0;
            }
            let ln_lik = anchored.ln_likelihood(s);
            let ln_noisy = match ln_eps {
                Some(le) => log_sum_exp(ln_lik, le),
                None => ln_lik,
            };
            -w * ln_noisy
        },
        lo,
        hi,
        cfg,
    )?;
    Ok(q.value)
}

/// Bundles every quantity at one δ; ig is constructed as kld + bs.
pub fn gain_point(params: &ModelParams, delta: f64, cfg: &QuadratureConfig) -> Result<GainPoint> {
    let evidence = params.evidence(delta)?;
    let gains = noisy_gains(params, delta, cfg)?;
    let u = uncertainty_u(params, delta, cfg)?;
    let mix = params.mixture_posterior(delta);
    Ok(GainPoint {
        delta,
        evidence,
        surprise: params.surprise(delta),
        kld: gains.kld,
        bs: gains.bs,
        ig: gains.kld + gains.bs,
        u,
        i_integral: gains.i,
        j_integral: gains.j,
        w_post: mix.w_post,
        w_pri: mix.w_pri,
    })
}

/// Brute-force KL oracle: ∫ p·ln(p/q) over the given window.
///
/// Densities are supplied in log form so that the narrow-reference tails
/// (where a plain density underflows f64 but its log is a perfectly finite
/// quadratic) integrate exactly. A non-finite log reference under
/// non-negligible `p` mass is reported as [`Error::NonPositiveDensity`].
pub fn direct_kl<P, Q>(
    ln_density_p: P,
    ln_density_q: Q,
    window: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let bad_point = std::cell::Cell::new(None::<f64>);
    let integrand = |s: f64| {
        let ln_p = ln_density_p(s);
        if ln_p < LN_DENSITY_FLOOR {
            return 0.0;
        }
        let ln_q = ln_density_q(s);
        if !ln_q.is_finite() || ln_p.is_nan() {
            if bad_point.get().is_none() {
                bad_point.set(Some(s));
            }
            return 0.0;
        }
        ln_p.exp() * (ln_p - ln_q)
    };
    let quad = integrate(integrand, window.0, window.1, cfg)?;
    if let Some(at) = bad_point.get() {
        return Err(Error::NonPositiveDensity { at });
    }
    Ok(quad.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Gaussian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canonical() -> ModelParams {
        ModelParams::new(10.0, 1.0).unwrap()
    }

    fn oracle_cfg() -> QuadratureConfig {
        QuadratureConfig::strict()
    }

    /// Monte-Carlo estimate of ∫ weight·softplus(ln ε − ln p(o|s)) ds with
    /// `weight` a Gaussian density; returns (mean, standard error).
    fn monte_carlo_integral(
        params: &ModelParams,
        delta: f64,
        weight: Gaussian,
        samples: usize,
        seed: u64,
    ) -> (f64, f64) {
        let anchored = params.at_delta(delta);
        let ln_eps = params.epsilon.ln();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = weight.std_dev();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            // Box–Muller.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let s = weight.mean + sd * z;
            let v = ln_one_plus_exp(ln_eps - anchored.ln_likelihood(s));
            sum += v;
            sum_sq += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn integrals_vanish_without_noise() {
        let params = canonical().with_epsilon(0.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert_eq!(integral_i(&params, 3.0, &cfg).unwrap(), 0.0);
        assert_eq!(integral_j(&params, 3.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn integrals_are_nonnegative() {
        let cfg = QuadratureConfig::default();
        for (s_p, s_l) in [(10.0, 1.0), (1.0, 50.0), (50.0, 50.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            for delta in [0.0, 2.0, 10.0, 40.0] {
                assert!(integral_i(&params, delta, &cfg).unwrap() >= 0.0);
                assert!(integral_j(&params, delta, &cfg).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn integral_i_matches_monte_carlo() {
        let params = canonical();
        let cfg = oracle_cfg();
        let quad = integral_i(&params, 4.0, &cfg).unwrap();
        let (mc, se) = monte_carlo_integral(&params, 4.0, params.prior(), 1_000_000, 0xE51);
        assert!(
            (quad - mc).abs() <= 3.0 * se,
            "I quadrature {quad} vs Monte-Carlo {mc} ± {se}"
        );
    }

    #[test]
    fn integral_j_matches_monte_carlo() {
        let params = canonical();
        let cfg = oracle_cfg();
        let quad = integral_j(&params, 4.0, &cfg).unwrap();
        let post = params.at_delta(4.0).gaussian_posterior().to_gaussian();
        let (mc, se) = monte_carlo_integral(&params, 4.0, post, 1_000_000, 0xE52);
        assert!(
            (quad - mc).abs() <= 3.0 * se,
            "J quadrature {quad} vs Monte-Carlo {mc} ± {se}"
        );
    }

    #[test]
    fn noisy_gains_converge_to_gaussian_forms_as_noise_vanishes() {
        // At small δ the Gaussian posterior dominates the mixture
        // (w_pri < 1% already at ε = 10⁻³), and both noisy gains approach
        // their closed Gaussian forms as ε → 0. BS converges at the rate of
        // w_pri itself; KLD converges slowly because the noise floor caps
        // the prior-tail region that carries much of the Gaussian KLD.
        let cfg = QuadratureConfig::default();
        assert!(canonical().mixture_posterior(1.0).w_pri < 0.01);

        let mut last_kld_dev = f64::INFINITY;
        let mut last_bs_dev = f64::INFINITY;
        for eps in [1e-3, 1e-6, 1e-9, 1e-12] {
            let params = canonical().with_epsilon(eps).unwrap();
            let kld_dev = (kld_noisy(&params, 1.0, &cfg).unwrap() - params.kld_gaussian(1.0)).abs()
                / params.kld_gaussian(1.0);
            let bs_dev = (bs_noisy(&params, 1.0, &cfg).unwrap() - params.bs_gaussian(1.0)).abs()
                / params.bs_gaussian(1.0);
            assert!(
                kld_dev < last_kld_dev,
                "KLD deviation not shrinking at ε={eps}"
            );
            assert!(
                bs_dev < last_bs_dev,
                "BS deviation not shrinking at ε={eps}"
            );
            last_kld_dev = kld_dev;
            last_bs_dev = bs_dev;
        }
        assert!(last_bs_dev < 1e-9);
        assert!(last_kld_dev < 0.08);
    }

    #[test]
    fn noisy_gains_vanish_in_far_field() {
        let cfg = QuadratureConfig::default();
        for (s_p, s_l) in [(10.0, 1.0), (1.0, 1.0), (50.0, 10.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            let far = 20.0 * params.combined_variance().sqrt();
            let kld = kld_noisy(&params, far, &cfg).unwrap();
            let bs = bs_noisy(&params, far, &cfg).unwrap();
            assert!(kld <= 1e-3, "far-field KLD {kld} at s_p={s_p}, s_l={s_l}");
            assert!(bs <= 1e-3, "far-field BS {bs} at s_p={s_p}, s_l={s_l}");

            // Cross-checked against the direct-KL oracle.
            let mix = params.mixture_posterior(far);
            let prior = params.prior();
            let win = window(&params, far, &cfg);
            let direct =
                direct_kl(|s| prior.ln_pdf(s), |s| mix.ln_pdf(s), win, &oracle_cfg()).unwrap();
            assert!(direct <= 1e-3);
            assert!((kld - direct).abs() < 1e-6);
        }
    }

    #[test]
    fn noisy_gains_agree_with_direct_kl_oracle() {
        let cfg = QuadratureConfig::default();
        let oracle = oracle_cfg();
        for (s_p, s_l) in [(10.0, 1.0), (1.0, 10.0), (50.0, 50.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            for delta in [0.0, 1.0, 4.0, 8.0] {
                let win = window(&params, delta, &cfg);
                let mix = params.mixture_posterior(delta);
                let prior = params.prior();

                let kld = kld_noisy(&params, delta, &cfg).unwrap();
                let kld_oracle =
                    direct_kl(|s| prior.ln_pdf(s), |s| mix.ln_pdf(s), win, &oracle).unwrap();
                assert!(
                    (kld - kld_oracle).abs() < 1e-6,
                    "KLD mismatch {kld} vs {kld_oracle} at s_p={s_p}, s_l={s_l}, δ={delta}"
                );

                let bs = bs_noisy(&params, delta, &cfg).unwrap();
                let bs_oracle =
                    direct_kl(|s| mix.ln_pdf(s), |s| prior.ln_pdf(s), win, &oracle).unwrap();
                assert!(
                    (bs - bs_oracle).abs() < 1e-6,
                    "BS mismatch {bs} vs {bs_oracle} at s_p={s_p}, s_l={s_l}, δ={delta}"
                );
            }
        }
    }

    #[test]
    fn general_n_noisy_path_agrees_with_oracle() {
        // The ε/p(o|s) collapse of the integrand holds for any n by Bayes'
        // rule; verify the n = 3 path against the direct oracle.
        let params = ModelParams::new(6.0, 2.0)
            .unwrap()
            .with_observations(3, 0.0, 0.4)
            .unwrap();
        let cfg = QuadratureConfig::default();
        let oracle = oracle_cfg();
        for delta in [0.5, 3.0] {
            let win = window(&params, delta, &cfg);
            let mix = params.mixture_posterior(delta);
            let prior = params.prior();
            let kld = kld_noisy(&params, delta, &cfg).unwrap();
            let kld_oracle =
                direct_kl(|s| prior.ln_pdf(s), |s| mix.ln_pdf(s), win, &oracle).unwrap();
            assert!(
                (kld - kld_oracle).abs() < 1e-6,
                "n=3 KLD mismatch {kld} vs {kld_oracle} at δ={delta}"
            );
            let bs = bs_noisy(&params, delta, &cfg).unwrap();
            let bs_oracle =
                direct_kl(|s| mix.ln_pdf(s), |s| prior.ln_pdf(s), win, &oracle).unwrap();
            assert!(
                (bs - bs_oracle).abs() < 1e-6,
                "n=3 BS mismatch {bs} vs {bs_oracle} at δ={delta}"
            );
        }
    }

    #[test]
    fn surprise_splits_into_bs_plus_uncertainty() {
        let cfg = QuadratureConfig::default();
        for (s_p, s_l) in [(10.0, 1.0), (1.0, 10.0), (50.0, 1.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            for delta in [0.0, 2.5, 7.0, 12.0] {
                let bs = bs_noisy(&params, delta, &cfg).unwrap();
                let u = uncertainty_u(&params, delta, &cfg).unwrap();
                let surprise = params.surprise(delta);
                assert!(
                    (surprise - (bs + u)).abs() < 1e-5,
                    "identity broke at s_p={s_p}, s_l={s_l}, δ={delta}: \
                     {surprise} vs {}",
                    bs + u
                );
            }
        }
    }

    #[test]
    fn uncertainty_closed_form_without_noise() {
        // With ε = 0: U = ½ln(2π s_l) + [s_post + (η_post − ō)²]/(2 s_l).
        let params = canonical().with_epsilon(0.0).unwrap();
        let cfg = oracle_cfg();
        for delta in [0.0, 1.5, 4.0] {
            let anchored = params.at_delta(delta);
            let post = anchored.gaussian_posterior();
            let gap = post.eta_post - anchored.obs_mean;
            let expect = 0.5 * (crate::math::LN_TWO_PI + params.s_l.ln())
                + (post.s_post + gap * gap) / (2.0 * params.s_l);
            let u = uncertainty_u(&params, delta, &cfg).unwrap();
            assert!(
                (u - expect).abs() < 1e-9,
                "U mismatch at δ={delta}: {u} vs {expect}"
            );
        }
    }

    #[test]
    fn uncertainty_is_finite_with_noise_floor() {
        let params = canonical();
        let cfg = QuadratureConfig::default();
        for delta in [0.0, 30.0, 100.0] {
            assert!(uncertainty_u(&params, delta, &cfg).unwrap().is_finite());
        }
    }

    #[test]
    fn gain_point_bundles_consistently() {
        let params = canonical();
        let cfg = QuadratureConfig::default();
        let gp = gain_point(&params, 3.0, &cfg).unwrap();
        assert_eq!(gp.ig, gp.kld + gp.bs);
        assert!(gp.kld >= 0.0 && gp.bs >= 0.0);
        assert_eq!(gp.w_post + gp.w_pri, 1.0);
        assert_eq!(
            gain_point(&params, -3.0, &cfg).unwrap().surprise,
            gp.surprise
        );
        let at_zero = gain_point(&params, 0.0, &cfg).unwrap();
        assert!((at_zero.w_post - 0.99175).abs() < 1e-4);
    }

    #[test]
    fn total_gain_is_unimodal_on_canonical_scan() {
        let params = canonical();
        let cfg = QuadratureConfig::default();
        let values: Vec<f64> = (0..=200)
            .map(|i| total_gain(&params, 0.1 * f64::from(i), &cfg).unwrap())
            .collect();
        let maxima = count_strict_maxima(&values, 1e-9);
        assert_eq!(maxima, 1, "IG scan should have exactly one peak");
    }

    fn count_strict_maxima(values: &[f64], noise: f64) -> usize {
        // Collapse sub-noise moves, then count up→down turns.
        let mut direction = 0i8;
        let mut maxima = 0;
        for w in values.windows(2) {
            let diff = w[1] - w[0];
            if diff.abs() <= noise {
                continue;
            }
            let step = if diff > 0.0 { 1 } else { -1 };
            if direction == 1 && step == -1 {
                maxima += 1;
            }
            direction = step;
        }
        maxima
    }

    #[test]
    fn mixture_density_normalizes() {
        let cfg = QuadratureConfig::default();
        for (s_p, s_l, delta) in [(10.0, 1.0, 4.0), (1.0, 50.0, 9.0), (50.0, 50.0, 30.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            let mix = params.mixture_posterior(delta);
            let win = window(&params, delta, &cfg);
            let total = integrate(|s| mix.pdf(s), win.0, win.1, &cfg).unwrap().value;
            assert!((total - 1.0).abs() < 1e-6, "mixture mass {total}");
        }
    }

    #[test]
    fn direct_kl_identical_densities_is_zero() {
        let g = Gaussian::new(0.3, 2.0);
        let cfg = QuadratureConfig::default();
        let kl = direct_kl(|s| g.ln_pdf(s), |s| g.ln_pdf(s), (-20.0, 20.0), &cfg).unwrap();
        assert!(kl.abs() < 1e-12);
    }

    #[test]
    fn direct_kl_unit_gaussians_mean_gap() {
        let p = Gaussian::new(0.0, 1.0);
        let q = Gaussian::new(1.0, 1.0);
        let cfg = oracle_cfg();
        let kl = direct_kl(|s| p.ln_pdf(s), |s| q.ln_pdf(s), (-16.0, 17.0), &cfg).unwrap();
        assert!((kl - 0.5).abs() < 1e-10);
    }

    #[test]
    fn direct_kl_rejects_nonpositive_reference() {
        let p = Gaussian::new(0.0, 1.0);
        let cfg = QuadratureConfig::default();
        // A density that is exactly zero on half the window.
        let ln_q = |s: f64| {
            if s < 0.0 {
                f64::NEG_INFINITY
            } else {
                0.05f64.ln()
            }
        };
        match direct_kl(|s| p.ln_pdf(s), ln_q, (-10.0, 10.0), &cfg) {
            Err(Error::NonPositiveDensity { at }) => assert!(at < 0.0),
            other => panic!("expected NonPositiveDensity, got {other:?}"),
        }
    }

    #[test]
    fn no_negative_kl_beyond_slack_on_grid() {
        let cfg = QuadratureConfig::default();
        for (s_p, s_l) in [(1.0, 1.0), (10.0, 1.0), (50.0, 50.0)] {
            let params = ModelParams::new(s_p, s_l).unwrap();
            let mut delta = 0.0;
            while delta <= 15.0 {
                assert!(kld_noisy(&params, delta, &cfg).unwrap() >= 0.0);
                assert!(bs_noisy(&params, delta, &cfg).unwrap() >= 0.0);
                delta += 2.5;
            }
        }
    }
}
