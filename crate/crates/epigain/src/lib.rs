//! Information-gain model of epistemic emotions.
//!
//! A Gaussian generative model with a uniform-noise likelihood floor turns
//! Kullback–Leibler information gains into peaked functions of the
//! prediction error, reproducing the inverse-U arousal-potential curve.
//! The crate computes the closed-form Gaussian quantities, the
//! quadrature-backed noisy gains, locates the optimal prediction errors and
//! surprises, sweeps the uncertainty plane, simulates the alternating
//! curiosity-driven inquiry cycle, and checks the expected-free-energy
//! decomposition on discrete policy models.
//!
//! Quick tour:
//!
//! ```
//! use epigain::{ModelParams, QuadratureConfig};
//!
//! let params = ModelParams::new(10.0, 1.0).unwrap(); // s_p, s_l
//! let cfg = QuadratureConfig::default();
//! let point = epigain::numerics::gain_point(&params, 3.0, &cfg).unwrap();
//! assert!(point.ig > 0.0);
//!
//! let optima = epigain::optimize::find_optima_default(&params, &cfg);
//! assert!(optima.delta_kld < optima.delta_bs);
//! ```

pub mod efe;
pub mod error;
pub mod inquiry;
pub mod math;
pub mod model;
pub mod numerics;
pub mod optimize;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{GaussianPosterior, MixturePosterior, ModelParams, QuadraticCoeffs};
pub use numerics::{GainPoint, QuadratureConfig};
pub use optimize::{find_optima, find_optima_default, maximize_scalar, OptimaRecord};
pub use sweep::{run_sweep, AxisRange, SweepGrid, SweepSpec};
