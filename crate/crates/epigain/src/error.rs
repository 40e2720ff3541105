//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed validation before any computation started.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A value that must be finite came out as NaN or infinite.
    #[error("non-finite value in {context} at delta = {delta}")]
    NonFinite { context: &'static str, delta: f64 },

    /// Adaptive quadrature hit the subdivision cap before reaching the
    /// requested tolerance. Carries the best estimate and its error bound.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate}, error bound {error_bound})"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// A density handed to `direct_kl` evaluated to a non-positive value
    /// where the reference density still has mass.
    #[error("non-positive density at s = {at}")]
    NonPositiveDensity { at: f64 },

    /// A KL divergence came out negative beyond the quadrature-noise slack.
    #[error("KL divergence is negative beyond numerical slack: {value}")]
    NegativeKl { value: f64 },

    /// The optimizer objective returned NaN or an infinity.
    #[error("objective returned a non-finite value at delta = {delta}")]
    ObjectiveNonFinite { delta: f64 },

    /// Inquiry simulation needs all three optima to have converged.
    #[error(
        "inquiry simulation refused: optima not converged \
         (kld: {kld}, bs: {bs}, ig: {ig})"
    )]
    OptimaNotConverged { kld: bool, bs: bool, ig: bool },

    /// A discrete policy model failed schema validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A log term with nonzero mass hit a zero probability.
    #[error("zero probability with nonzero mass at state {state:?}{}",
        .observation.as_ref().map(|o| format!(", observation {o:?}")).unwrap_or_default())]
    ZeroProbability {
        state: String,
        observation: Option<String>,
    },

    /// The expected-free-energy decomposition failed to reproduce the
    /// direct evaluation.
    #[error(
        "expected free energy decomposition mismatch: \
         direct {direct}, recomposed {recomposed}"
    )]
    DecompositionMismatch { direct: f64, recomposed: f64 },

    /// I/O failure while exporting results.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// True for errors caused by bad inputs rather than failed numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::InvalidModel(_))
    }
}
