//! Margin selection: fixed ε, or ε derived from a per-point measurement
//! budget L.
//!
//! The adaptive rule asks: after fictitiously observing one point L times,
//! the posterior variance there would shrink to
//! σ²_L = λ⁻¹k(x,x)/(λ⁻¹ + L·k(x,x)); pick ε wide enough that a candidate
//! with that much data and mean pinned at θ still lands in the margin band
//! with probability 1 − (1−δ)/|𝒳|.

use serde::{Deserialize, Serialize};

use crate::error::{LseError, Result};
use crate::normal::norm_quantile;

/// How the margin ε is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginPolicy {
    /// User-supplied ε.
    Fixed { eps: f64 },
    /// ε from the L-knob; δ is shared with the stopping criterion.
    Adaptive { l_measurements: u32 },
}

impl MarginPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginPolicy::Fixed { eps } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(LseError::InvalidConfig {
                        key: "margin.eps".into(),
                        reason: format!("must be positive and finite, got {eps}"),
                    });
                }
            }
            MarginPolicy::Adaptive { l_measurements } => {
                if l_measurements == 0 {
                    return Err(LseError::InvalidConfig {
                        key: "margin.l_measurements".into(),
                        reason: "must be at least 1".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Posterior variance at a point after observing it L times:
/// σ²_L = λ⁻¹k/(λ⁻¹ + L·k).
pub fn sigma_l_sq(k_xx: f64, lambda: f64, l_measurements: u32) -> f64 {
    debug_assert!(k_xx > 0.0 && lambda > 0.0 && l_measurements >= 1);
    let inv_lambda = 1.0 / lambda;
    inv_lambda * k_xx / (inv_lambda + f64::from(l_measurements) * k_xx)
}

/// Adaptive margin ε(x) = 2σ_L(x)·Φ⁻¹(1 − (1−δ)/(2|𝒳|)).
///
/// With a stationary kernel k(x,x) is constant, so one call covers the whole
/// candidate set. Recompute after every hyperparameter refit, since both λ
/// and k(x,x) move.
pub fn adaptive_eps(
    k_xx: f64,
    lambda: f64,
    l_measurements: u32,
    delta: f64,
    n_candidates: usize,
) -> f64 {
    debug_assert!(delta > 0.0 && delta < 1.0 && n_candidates >= 1);
    let sigma_l = sigma_l_sq(k_xx, lambda, l_measurements).sqrt();
    let q = 1.0 - (1.0 - delta) / (2.0 * n_candidates as f64);
    2.0 * sigma_l * norm_quantile(q)
}
