//! Small numerical building blocks: stable log-domain helpers and the
//! univariate Gaussian used throughout the model.

/// ln(2π), precomputed.
pub const LN_TWO_PI: f64 = 1.837_877_066_409_345_5;

/// Stable ln(exp(a) + exp(b)).
///
/// Handles −∞ inputs (zero probabilities) without producing NaN.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Stable ln(1 + exp(x)), valid for any magnitude of `x`.
///
/// For large positive `x` the naive form overflows; this one degrades to
/// `x` itself, and to `exp(x)` for very negative `x`.
#[inline]
pub fn ln_one_plus_exp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Univariate Gaussian N(mean, var) parameterized by variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub var: f64,
}

impl Gaussian {
    pub fn new(mean: f64, var: f64) -> Self {
        debug_assert!(var > 0.0, "Gaussian variance must be positive");
        Self { mean, var }
    }

    /// Log density at `x`.
    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = x - self.mean;
        -0.5 * (z * z / self.var + self.var.ln() + LN_TWO_PI)
    }

    /// Density at `x`.
    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn std_dev(&self) -> f64 {
        self.var.sqrt()
    }

    /// Closed-form KL divergence D_KL[self ‖ other].
    pub fn kl_divergence(&self, other: &Gaussian) -> f64 {
        let mean_gap = self.mean - other.mean;
        0.5 * ((other.var / self.var).ln() + (self.var + mean_gap * mean_gap) / other.var - 1.0)
    }
}

/// Density of N(0, var) at `x`; convenience for evidence checks.
pub fn centered_gaussian_pdf(x: f64, var: f64) -> f64 {
    (-0.5 * (x * x / var + var.ln() + LN_TWO_PI)).exp()
}
