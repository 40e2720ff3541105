//! Bounded scalar maximization of the information gains over δ ≥ 0.
//!
//! The maximizer is a golden-section search accelerated by safeguarded
//! parabolic interpolation (the classic bounded Brent scheme), run on the
//! negated objective. Evenness of every gain in δ lets the search stay on
//! the nonnegative half-axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{self, QuadratureConfig};

/// Default argument tolerance for the gain optimizations.
pub const DEFAULT_TOL: f64 = 1e-5;

/// Iteration cap; generous for a bracketing method at these tolerances.
pub const DEFAULT_MAX_ITERS: usize = 200;

/// How many times a search bound may be doubled when an argmax pins to it.
const MAX_WIDENINGS: u32 = 6;

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 − √5)/2

/// Outcome of one scalar maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMaximum {
    pub argmax: f64,
    pub max: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Locates a local maximum of `f` on [lo, hi] to within `tol` in the
/// argument. Plateaus tie-break to the lowest argument.
///
/// A parabolic step is taken only when it falls inside the current bracket
/// and shrinks it; otherwise the step is golden-section. Hitting the
/// iteration cap returns the best point seen with `converged = false`.
pub fn maximize_scalar<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iters: usize,
) -> Result<ScalarMaximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "search interval [{lo}, {hi}] is not a finite increasing interval"
        )));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    // Minimize the negation.
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if !y.is_finite() {
            return Err(Error::ObjectiveNonFinite { delta: x });
        }
        Ok(-y)
    };

    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = eval(x)?;
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iters {
        iterations = iter;
        let m = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;

        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }

        let mut use_golden = true;
        if e.abs() > tol1 {
            // Parabola through (v, fv), (w, fw), (x, fx).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if m - x >= 0.0 { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u)?;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u >= x {
                b = u;
            } else {
                a = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let mut argmax = x;
    let mut max = -fx;

    // Plateau tie-break: the lowest argument wins when it is at least as
    // good as the interior point the bracket settled on.
    let f_lo = -eval(lo)?;
    if f_lo >= max {
        argmax = lo;
        max = f_lo;
    }

    Ok(ScalarMaximum {
        argmax,
        max,
        converged,
        iterations,
    })
}

/// Per-objective convergence flags of an [`OptimaRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceFlags {
    pub kld: bool,
    pub bs: bool,
    pub ig: bool,
}

impl ConvergenceFlags {
    pub fn all(&self) -> bool {
        self.kld && self.bs && self.ig
    }
}

/// Optimal prediction errors and surprises for KLD, BS and IG, with the
/// fluctuation gaps D_δ = δ_BS − δ_KLD and D_S = S_BS − S_KLD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimaRecord {
    pub delta_kld: f64,
    pub delta_bs: f64,
    pub delta_ig: f64,
    pub s_kld: f64,
    pub s_bs: f64,
    pub s_ig: f64,
    pub max_kld: f64,
    pub max_bs: f64,
    pub max_ig: f64,
    pub d_delta: f64,
    pub d_s: f64,
    pub params: ModelParams,
    /// Final search bound after any auto-widening.
    pub search_bound: f64,
    pub converged: ConvergenceFlags,
}

/// Default δ search bound: 10 combined standard deviations. Auto-widening
/// in [`find_optima`] covers parameter corners whose peaks sit beyond it.
pub fn default_search_bound(params: &ModelParams) -> f64 {
    10.0 * params.combined_variance().sqrt()
}

struct ObjectiveOptimum {
    argmax: f64,
    max: f64,
    converged: bool,
    bound: f64,
}

fn optimize_objective<F>(mut f: F, search_bound: f64, tol: f64) -> ObjectiveOptimum
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut bound = search_bound;
    for attempt in 0..=MAX_WIDENINGS {
        match maximize_scalar(&mut f, 0.0, bound, tol, DEFAULT_MAX_ITERS) {
            Ok(found) => {
                // An argmax this close to the bound means the peak may lie
                // beyond it; double and retry.
                let margin = (10.0 * tol).max(1e-6 * bound);
                let pinned = found.argmax >= bound - margin;
                if !pinned {
                    return ObjectiveOptimum {
                        argmax: found.argmax,
                        max: found.max,
                        converged: found.converged,
                        bound,
                    };
                }
                if attempt == MAX_WIDENINGS {
                    return ObjectiveOptimum {
                        argmax: found.argmax,
                        max: found.max,
                        converged: false,
                        bound,
                    };
                }
                bound *= 2.0;
            }
            Err(_) => {
                return ObjectiveOptimum {
                    argmax: f64::NAN,
                    max: f64::NAN,
                    converged: false,
                    bound,
                }
            }
        }
    }
    unreachable!("widening loop always returns");
}

/// Maximizes KLD_ε, BS_ε and their sum over δ ∈ [0, search_bound], mapping
/// each optimal prediction error to its optimal surprise.
///
/// Failures are recorded per objective in the convergence flags; a record
/// is always returned.
pub fn find_optima(
    params: &ModelParams,
    cfg: &QuadratureConfig,
    search_bound: f64,
    tol: f64,
) -> OptimaRecord {
    let kld = optimize_objective(|d| numerics::kld_noisy(params, d, cfg), search_bound, tol);
    let bs = optimize_objective(|d| numerics::bs_noisy(params, d, cfg), search_bound, tol);
    let ig = optimize_objective(|d| numerics::total_gain(params, d, cfg), search_bound, tol);

    OptimaRecord {
        delta_kld: kld.argmax,
        delta_bs: bs.argmax,
        delta_ig: ig.argmax,
        s_kld: params.surprise(kld.argmax),
        s_bs: params.surprise(bs.argmax),
        s_ig: params.surprise(ig.argmax),
        max_kld: kld.max,
        max_bs: bs.max,
        max_ig: ig.max,
        d_delta: bs.argmax - kld.argmax,
        d_s: params.surprise(bs.argmax) - params.surprise(kld.argmax),
        params: *params,
        search_bound: kld.bound.max(bs.bound).max(ig.bound),
        converged: ConvergenceFlags {
            kld: kld.converged,
            bs: bs.converged,
            ig: ig.converged,
        },
    }
}

/// [`find_optima`] with the default bound and tolerance.
pub fn find_optima_default(params: &ModelParams, cfg: &QuadratureConfig) -> OptimaRecord {
    find_optima(params, cfg, default_search_bound(params), DEFAULT_TOL)
}
