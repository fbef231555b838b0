//! Candidate classification into (upper, lower, undetermined) and the
//! conversion between the confidence parameter β and the margin ε.
//!
//! Two rules are supported: the probability rule assigns each candidate to
//! whichever of Pr(∈H), Pr(∈L), Pr(∈U) is largest; the interval rule uses
//! μ ± βσ against θ. Treating Φ(β) as a stand-in for Pr(∈U) makes the two
//! rules coincide whenever Φ(β) > ½, which is what the β↔ε conversions
//! exploit.

use serde::{Deserialize, Serialize};

use crate::error::{LseError, Result};
use crate::normal::{norm_cdf, norm_quantile};
use crate::probabilities::{class_probs, TriProbability};

/// Disjoint index sets partitioning the candidate set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationTriplet {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    pub undetermined: Vec<usize>,
}

impl ClassificationTriplet {
    pub fn len(&self) -> usize {
        self.upper.len() + self.lower.len() + self.undetermined.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assign every candidate to the set with the largest probability.
///
/// Exact ties resolve upper, then lower, then undetermined; they have
/// measure zero but the rule must still be a function.
pub fn classify_proposed(tps: &[TriProbability]) -> ClassificationTriplet {
    let mut triplet = ClassificationTriplet {
        upper: Vec::new(),
        lower: Vec::new(),
        undetermined: Vec::new(),
    };
    for (i, tp) in tps.iter().enumerate() {
        if tp.p_h >= tp.p_l && tp.p_h >= tp.p_u {
            triplet.upper.push(i);
        } else if tp.p_l >= tp.p_u {
            triplet.lower.push(i);
        } else {
            triplet.undetermined.push(i);
        }
    }
    triplet
}

/// Confidence-interval rule: upper iff μ − βσ > θ, lower iff μ + βσ < θ.
pub fn classify_standard(mu: &[f64], sigma: &[f64], theta: f64, beta: f64) -> ClassificationTriplet {
    debug_assert!(beta > 0.0);
    debug_assert_eq!(mu.len(), sigma.len());
    let mut triplet = ClassificationTriplet {
        upper: Vec::new(),
        lower: Vec::new(),
        undetermined: Vec::new(),
    };
    for i in 0..mu.len() {
        if mu[i] - beta * sigma[i] > theta {
            triplet.upper.push(i);
        } else if mu[i] + beta * sigma[i] < theta {
            triplet.lower.push(i);
        } else {
            triplet.undetermined.push(i);
        }
    }
    triplet
}

/// Largest β the quantile can report before Φ(β) rounds to 1.
pub const BETA_CAP: f64 = 8.209536151601387;

/// β = Φ⁻¹(Pr(x ∈ U_θ)) for the margin ε at this candidate.
///
/// Output is capped at [`BETA_CAP`] once the band probability saturates.
pub fn eps_to_beta(mu: f64, sigma: f64, theta: f64, eps: f64) -> f64 {
    debug_assert!(sigma > 0.0 && eps > 0.0);
    let p_u = class_probs(mu, sigma, theta, eps).p_u;
    if p_u >= 1.0 - 1e-16 {
        return BETA_CAP;
    }
    norm_quantile(p_u.max(f64::MIN_POSITIVE))
}

/// ε = g⁻¹(Φ(β)): invert the band probability by bisection.
///
/// g(ε) = Pr(x ∈ U_θ) is strictly increasing in ε, so the bracket
/// [0, 2(|θ−μ| + 10σ)] doubled until g exceeds the target always contains
/// the root. Fails when Φ(β) rounds to 1 and no finite margin can attain it.
pub fn beta_to_eps(mu: f64, sigma: f64, theta: f64, beta: f64) -> Result<f64> {
    debug_assert!(sigma > 0.0);
    let target = norm_cdf(beta);
    if target >= 1.0 {
        return Err(LseError::UnattainableTarget { target });
    }
    if target <= 0.0 {
        return Ok(0.0);
    }
    let g = |eps: f64| class_probs(mu, sigma, theta, eps).p_u;

    let mut hi = 2.0 * ((theta - mu).abs() + 10.0 * sigma);
    let mut grow = 0;
    while g(hi) < target {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(LseError::UnattainableTarget { target });
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // no representable point left between the brackets
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
