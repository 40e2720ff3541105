//! Closed-form Gaussian Bayesian quantities and the uniform-noise mixture.
//!
//! The generative model is a Gaussian prior N(η, s_p) over a hidden state,
//! observed through a Gaussian likelihood of variance s_l, optionally with a
//! flat noise floor ε added to the likelihood. Everything here is exact
//! algebra; the improper integrals that the noisy information gains require
//! live in [`crate::numerics`].
//!
//! All likelihood and evidence math runs in log space; exponentiation happens
//! only at API boundaries, because the evidence underflows already for
//! moderate prediction errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, Gaussian, LN_TWO_PI};

fn default_n() -> u32 {
    1
}

fn default_epsilon() -> f64 {
    ModelParams::DEFAULT_EPSILON
}

/// Full parameterization of the generative model.
///
/// The prediction error δ = η − ō is always derived via [`ModelParams::delta`],
/// never stored. Curve evaluations that sweep δ use [`ModelParams::at_delta`]
/// to re-anchor the observed mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Prior mean η.
    #[serde(default)]
    pub eta: f64,
    /// Prior variance (prediction uncertainty), must be positive.
    pub s_p: f64,
    /// Gaussian likelihood variance (observation uncertainty), must be positive.
    pub s_l: f64,
    /// Number of observations.
    #[serde(default = "default_n")]
    pub n: u32,
    /// Observed data mean ō.
    #[serde(default)]
    pub obs_mean: f64,
    /// Observed data variance V; forced to 0 when n = 1.
    #[serde(default)]
    pub obs_var: f64,
    /// Uniform-likelihood probability ε.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl ModelParams {
    pub const DEFAULT_EPSILON: f64 = 1e-3;

    /// Model with the given variances, zero means, a single observation and
    /// the default noise level ε = 10⁻³.
    pub fn new(s_p: f64, s_l: f64) -> Result<Self> {
        Self {
            eta: 0.0,
            s_p,
            s_l,
            n: 1,
            obs_mean: 0.0,
            obs_var: 0.0,
            epsilon: Self::DEFAULT_EPSILON,
        }
        .validated()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validated()
    }

    pub fn with_observations(mut self, n: u32, obs_mean: f64, obs_var: f64) -> Result<Self> {
        self.n = n;
        self.obs_mean = obs_mean;
        self.obs_var = obs_var;
        self.validated()
    }

    pub fn with_prior_mean(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validated()
    }

    /// Checks all invariants, normalizing `obs_var` to 0 for n = 1.
    pub fn validated(mut self) -> Result<Self> {
        if !(self.s_p.is_finite() && self.s_p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prior variance s_p must be positive and finite, got {}",
                self.s_p
            )));
        }
        if !(self.s_l.is_finite() && self.s_l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "likelihood variance s_l must be positive and finite, got {}",
                self.s_l
            )));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter(
                "observation count n must be at least 1".into(),
            ));
        }
        if !(self.obs_var.is_finite() && self.obs_var >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "observed variance must be nonnegative and finite, got {}",
                self.obs_var
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "uniform likelihood epsilon must be nonnegative and finite, got {}",
                self.epsilon
            )));
        }
        if !self.eta.is_finite() || !self.obs_mean.is_finite() {
            return Err(Error::InvalidParameter(
                "means eta and obs_mean must be finite".into(),
            ));
        }
        if self.n == 1 {
            self.obs_var = 0.0;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        (*self).validated().map(|_| ())
    }

    /// Prediction error δ = η − ō.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.eta - self.obs_mean
    }

    /// Copy of the model re-anchored so that `delta()` equals the given
    /// prediction error (the prior mean stays put, the observed mean moves).
    #[inline]
    pub fn at_delta(&self, delta: f64) -> Self {
        Self {
            obs_mean: self.eta - delta,
            ..*self
        }
    }

    /// s_p + s_l, the variance of the evidence for a single observation.
    #[inline]
    pub fn combined_variance(&self) -> f64 {
        self.s_p + self.s_l
    }

    /// Prior as a plain Gaussian.
    pub fn prior(&self) -> Gaussian {
        Gaussian::new(self.eta, self.s_p)
    }

    /// Log of the Gaussian likelihood of the observed data at state `s`,
    /// as a function of s: −[n(s−ō)² + nV]/(2 s_l) − (n/2)·ln(2π s_l).
    #[inline]
    pub fn ln_likelihood(&self, s: f64) -> f64 {
        let n = f64::from(self.n);
        let z = s - self.obs_mean;
        -(n * (z * z + self.obs_var)) / (2.0 * self.s_l) - 0.5 * n * (LN_TWO_PI + self.s_l.ln())
    }

    /// Log evidence ln e(δ) = −(A_F·δ² + B_F).
    #[inline]
    pub fn ln_evidence(&self, delta: f64) -> f64 {
        -self.free_energy_coeffs().eval(delta)
    }

    /// Gaussian evidence e(δ).
    ///
    /// For n = 1 this is the density of N(0, s_p + s_l) at δ. Underflow to
    /// zero for huge δ is a valid limit; NaN anywhere is an error.
    pub fn evidence(&self, delta: f64) -> Result<f64> {
        if delta.is_nan() {
            return Err(Error::NonFinite {
                context: "evidence",
                delta,
            });
        }
        let value = self.ln_evidence(delta).exp();
        if value.is_nan() || value.is_infinite() {
            return Err(Error::NonFinite {
                context: "evidence",
                delta,
            });
        }
        Ok(value)
    }

    /// ln(e(δ) + ε), the log evidence under the uniform-noise likelihood.
    ///
    /// Computed as a log-sum-exp; with ε = 0 and a huge δ the result
    /// underflows to −∞, which is returned as is.
    #[inline]
    pub fn ln_evidence_noisy(&self, delta: f64) -> f64 {
        if self.epsilon == 0.0 {
            return self.ln_evidence(delta);
        }
        log_sum_exp(self.ln_evidence(delta), self.epsilon.ln())
    }

    /// Surprise −ln(e(δ) + ε); the arousal-potential measure.
    #[inline]
    pub fn surprise(&self, delta: f64) -> f64 {
        -self.ln_evidence_noisy(delta)
    }

    /// Coefficients of the free energy F(δ) = A_F·δ² + B_F.
    pub fn free_energy_coeffs(&self) -> QuadraticCoeffs {
        let n = f64::from(self.n);
        let denom = n * self.s_p + self.s_l;
        QuadraticCoeffs {
            a: 0.5 * n / denom,
            b: 0.5
                * (denom.ln()
                    + (n - 1.0) * self.s_l.ln()
                    + n * LN_TWO_PI
                    + n * self.obs_var / self.s_l),
        }
    }

    /// Coefficients of KLD(δ) = A_KLD·δ² + B_KLD for a single observation.
    ///
    /// The constant term is the standard Gaussian-KL constant,
    /// ½·(s_p/s_l − ln(1 + s_p/s_l)).
    pub fn kld_coeffs(&self) -> QuadraticCoeffs {
        let ratio = self.s_p / self.s_l;
        QuadraticCoeffs {
            a: self.s_p / (2.0 * self.s_l * self.combined_variance()),
            b: 0.5 * (ratio - ratio.ln_1p()),
        }
    }

    /// Coefficients of BS(δ) = A_BS·δ² + B_BS for a single observation.
    ///
    /// Constant term ½·(ln(1 + s_p/s_l) − s_p/(s_p + s_l)).
    pub fn bs_coeffs(&self) -> QuadraticCoeffs {
        let total = self.combined_variance();
        QuadraticCoeffs {
            a: self.s_p / (2.0 * total * total),
            b: 0.5 * ((self.s_p / self.s_l).ln_1p() - self.s_p / total),
        }
    }

    /// Conjugate Gaussian posterior given the stored observations.
    pub fn gaussian_posterior(&self) -> GaussianPosterior {
        let n = f64::from(self.n);
        let denom = n * self.s_p + self.s_l;
        GaussianPosterior {
            eta_post: (n * self.s_p * self.obs_mean + self.s_l * self.eta) / denom,
            s_post: self.s_p * self.s_l / denom,
        }
    }

    /// KL divergence from prior to posterior, D_KL[p(s) ‖ p(s|o)], as a
    /// function of the prediction error. Information gain of recognition.
    pub fn kld_gaussian(&self, delta: f64) -> f64 {
        if self.n == 1 {
            self.kld_coeffs().eval(delta)
        } else {
            let post = self.at_delta(delta).gaussian_posterior().to_gaussian();
            self.prior().kl_divergence(&post)
        }
    }

    /// KL divergence from posterior to prior, D_KL[p(s|o) ‖ p(s)]; the
    /// Bayesian surprise, i.e. the expected gain of updating the prior.
    pub fn bs_gaussian(&self, delta: f64) -> f64 {
        if self.n == 1 {
            self.bs_coeffs().eval(delta)
        } else {
            let post = self.at_delta(delta).gaussian_posterior().to_gaussian();
            post.kl_divergence(&self.prior())
        }
    }

    /// KLD − BS; strictly positive for every δ when s_p > 0.
    pub fn kld_minus_bs_gaussian(&self, delta: f64) -> f64 {
        self.kld_gaussian(delta) - self.bs_gaussian(delta)
    }

    /// Posterior under the uniform-noise likelihood: a mixture of the
    /// Gaussian posterior and the prior with evidence-proportional weights.
    pub fn mixture_posterior(&self, delta: f64) -> MixturePosterior {
        let anchored = self.at_delta(delta);
        let gaussian_post = anchored.gaussian_posterior();
        let w_post = if self.epsilon == 0.0 {
            1.0
        } else {
            // e/(e+ε) via logs so that underflowed evidence gives exactly 0.
            (anchored.ln_evidence(delta) - anchored.ln_evidence_noisy(delta)).exp()
        };
        MixturePosterior {
            w_post,
            w_pri: 1.0 - w_post,
            gaussian_post,
            prior: self.prior(),
        }
    }
}

/// Gaussian conjugate posterior N(η_post, s_post).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPosterior {
    pub eta_post: f64,
    pub s_post: f64,
}

impl GaussianPosterior {
    pub fn to_gaussian(self) -> Gaussian {
        Gaussian::new(self.eta_post, self.s_post)
    }

    #[inline]
    pub fn ln_pdf(&self, s: f64) -> f64 {
        self.to_gaussian().ln_pdf(s)
    }

    #[inline]
    pub fn pdf(&self, s: f64) -> f64 {
        self.to_gaussian().pdf(s)
    }
}

/// Weighted mixture of the Gaussian posterior and the prior: the posterior
/// under the flat-noise likelihood. Weights sum to 1 by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixturePosterior {
    pub w_post: f64,
    pub w_pri: f64,
    pub gaussian_post: GaussianPosterior,
    pub prior: Gaussian,
}

impl MixturePosterior {
    /// Mixture density w_post·N_post(s) + w_pri·N_pri(s).
    #[inline]
    pub fn pdf(&self, s: f64) -> f64 {
        self.w_post * self.gaussian_post.pdf(s) + self.w_pri * self.prior.pdf(s)
    }

    /// Stable log density.
    #[inline]
    pub fn ln_pdf(&self, s: f64) -> f64 {
        if self.w_pri == 0.0 {
            return self.gaussian_post.ln_pdf(s);
        }
        if self.w_post == 0.0 {
            return self.prior.ln_pdf(s) + self.w_pri.ln();
        }
        log_sum_exp(
            self.w_post.ln() + self.gaussian_post.ln_pdf(s),
            self.w_pri.ln() + self.prior.ln_pdf(s),
        )
    }
}

/// Coefficients of a quadratic a·δ² + b in the prediction error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    pub a: f64,
    pub b: f64,
}

impl QuadraticCoeffs {
    #[inline]
    pub fn eval(&self, delta: f64) -> f64 {
        self.a * delta * delta + self.b
    }
}
