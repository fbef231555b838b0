//! Per-candidate classification probabilities under the GP posterior.
//!
//! For a candidate x with posterior N(μ, σ²), threshold θ, and margin band
//! 𝓔 = (−ε/2, ε/2] around θ:
//!
//! - `p_l` = Pr(f(x) ≤ θ), `p_h` = 1 − p_l,
//! - `p_u` = Pr(f(x) − θ ∈ 𝓔),
//! - `p_min`/`p_max` = min/max of {p_h, p_l} (misclassification/classification
//!   probability),
//! - `r_min` = min{p_h, p_l, 1 − p_u} drives both the acquisition score and
//!   the stopping bound, and `r_max` = max{p_h, p_l, p_u} drives the
//!   probability classification rule.
//!
//! The joint law of the sign indicator z = 1{f − θ > 0} and the margin
//! indicator w = 1{f − θ ∈ 𝓔} splits the range into four bins, which is what
//! the metric lower bounds are proved from.

use serde::{Deserialize, Serialize};

use crate::normal::{norm_cdf, norm_interval};

/// Classification, misclassification, and margin probabilities for one
/// candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriProbability {
    pub p_h: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub p_not_u: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl TriProbability {
    /// Assemble the derived fields from the three base probabilities.
    pub fn from_parts(p_h: f64, p_l: f64, p_u: f64) -> Self {
        let p_not_u = 1.0 - p_u;
        Self {
            p_h,
            p_l,
            p_u,
            p_not_u,
            p_min: p_h.min(p_l),
            p_max: p_h.max(p_l),
            r_min: p_h.min(p_l).min(p_not_u),
            r_max: p_h.max(p_l).max(p_u),
        }
    }
}

/// Joint distribution of the sign and margin indicators over the four
/// intervals cut by θ − ε/2, θ, θ + ε/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourBin {
    /// Pr(f ≤ θ − ε/2)
    pub p00: f64,
    /// Pr(θ − ε/2 < f ≤ θ)
    pub p01: f64,
    /// Pr(θ < f ≤ θ + ε/2)
    pub p11: f64,
    /// Pr(f > θ + ε/2)
    pub p10: f64,
}

/// Classification probabilities of one candidate from its posterior marginal.
///
/// A degenerate σ = 0 posterior is the point mass at μ: probabilities become
/// indicators, with the margin interval half-open on the left.
pub fn class_probs(mu: f64, sigma: f64, theta: f64, eps: f64) -> TriProbability {
    debug_assert!(eps > 0.0, "margin must be positive");
    if sigma <= 0.0 {
        let gap = mu - theta;
        let p_l = if gap <= 0.0 { 1.0 } else { 0.0 };
        let p_u = if gap > -eps / 2.0 && gap <= eps / 2.0 { 1.0 } else { 0.0 };
        return TriProbability::from_parts(1.0 - p_l, p_l, p_u);
    }
    let t = (theta - mu) / sigma;
    let p_l = norm_cdf(t);
    let p_h = norm_cdf(-t);
    let lo = (theta - eps / 2.0 - mu) / sigma;
    let hi = (theta + eps / 2.0 - mu) / sigma;
    let p_u = norm_interval(lo, hi);
    TriProbability::from_parts(p_h, p_l, p_u)
}

/// Four-bin joint distribution of the sign and margin indicators.
pub fn four_bin(mu: f64, sigma: f64, theta: f64, eps: f64) -> FourBin {
    debug_assert!(eps > 0.0, "margin must be positive");
    if sigma <= 0.0 {
        let gap = mu - theta;
        let half = eps / 2.0;
        let (mut p00, mut p01, mut p11, mut p10) = (0.0, 0.0, 0.0, 0.0);
        if gap <= -half {
            p00 = 1.0;
        } else if gap <= 0.0 {
            p01 = 1.0;
        } else if gap <= half {
            p11 = 1.0;
        } else {
            p10 = 1.0;
        }
        return FourBin { p00, p01, p11, p10 };
    }
    let lo = (theta - eps / 2.0 - mu) / sigma;
    let mid = (theta - mu) / sigma;
    let hi = (theta + eps / 2.0 - mu) / sigma;
    FourBin {
        p00: norm_cdf(lo),
        p01: norm_interval(lo, mid),
        p11: norm_interval(mid, hi),
        p10: norm_cdf(-hi),
    }
}

/// How the union-bound weight γ(x) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaVariant {
    /// γ = max{p_min, p_u}: the exact concentration weight.
    Exact,
    /// γ = max{(p_min + p_max)/2, p_u}: midpoint tweak that avoids testing
    /// |z − E\[z\]| = γ on the knife edge when checking events on sampled paths.
    Midpoint,
}

/// The (γ, η) pair controlling the per-candidate concentration event
/// |z − E\[z\]| ≤ γ and w ≥ η.
pub fn gamma_eta(tp: &TriProbability, variant: GammaVariant) -> (f64, u8) {
    let gamma = match variant {
        GammaVariant::Exact => tp.p_min.max(tp.p_u),
        GammaVariant::Midpoint => (0.5 * (tp.p_min + tp.p_max)).max(tp.p_u),
    };
    let eta = u8::from(tp.p_u > tp.p_max);
    (gamma, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_posterior_splits_evenly() {
        let tp = class_probs(3.0, 1.0, 3.0, 0.5);
        assert!((tp.p_l - 0.5).abs() < 1e-15);
        assert!((tp.p_h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_margin_band_probability() {
        // mu = theta, sigma = 1, eps = 2: p_u = 2*Phi(1) - 1
        let tp = class_probs(0.0, 1.0, 0.0, 2.0);
        assert!((tp.p_u - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!((tp.p_not_u - (1.0 - 0.682_689_492_137_085_9)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_posterior_is_indicator() {
        let tp = class_probs(1.0, 0.0, 0.0, 1.0);
        assert_eq!((tp.p_h, tp.p_l, tp.p_u), (1.0, 0.0, 0.0));
        // exactly on the closed right edge of the margin band
        let tp = class_probs(0.5, 0.0, 0.0, 1.0);
        assert_eq!((tp.p_h, tp.p_u), (1.0, 1.0));
        // open left edge stays out
        let tp = class_probs(-0.5, 0.0, 0.0, 1.0);
        assert_eq!((tp.p_l, tp.p_u), (1.0, 0.0));
    }

    #[test]
    fn four_bin_matches_reference_split() {
        let fb = four_bin(0.0, 1.0, 0.0, 2.0);
        assert!((fb.p00 - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!((fb.p01 - 0.341_344_746_068_542_9).abs() < 1e-12);
        assert!((fb.p11 - 0.341_344_746_068_542_9).abs() < 1e-12);
        assert!((fb.p10 - 0.158_655_253_931_457_05).abs() < 1e-12);
    }

    #[test]
    fn four_bin_marginals_are_consistent() {
        for (mu, sigma, theta, eps) in [
            (0.2, 1.0, 0.0, 1.0),
            (-1.5, 0.3, 0.1, 0.25),
            (4.0, 2.0, 3.5, 3.0),
            (0.0, 1.0, 0.0, 1e-300),
        ] {
            let tp = class_probs(mu, sigma, theta, eps);
            let fb = four_bin(mu, sigma, theta, eps);
            assert!((fb.p00 + fb.p01 - tp.p_l).abs() < 1e-12);
            assert!((fb.p10 + fb.p11 - tp.p_h).abs() < 1e-12);
            assert!((fb.p01 + fb.p11 - tp.p_u).abs() < 1e-12);
            assert!((fb.p00 + fb.p01 + fb.p11 + fb.p10 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_margin_empties_the_band() {
        let fb = four_bin(0.3, 1.0, 0.0, 1e-300);
        assert!(fb.p01.abs() < 1e-15);
        assert!(fb.p11.abs() < 1e-15);
    }

    #[test]
    fn gamma_eta_exact_values() {
        let tp = TriProbability::from_parts(0.2, 0.8, 0.3);
        let (gamma, eta) = gamma_eta(&tp, GammaVariant::Exact);
        assert_eq!(gamma, 0.3);
        assert_eq!(eta, 0);
        let (gamma, _) = gamma_eta(&tp, GammaVariant::Midpoint);
        assert_eq!(gamma, 0.5);

        let dominant_margin = TriProbability::from_parts(0.4, 0.6, 0.9);
        let (gamma, eta) = gamma_eta(&dominant_margin, GammaVariant::Exact);
        assert_eq!(gamma, 0.9);
        assert_eq!(eta, 1);
    }

    #[test]
    fn swapping_sides_fixes_the_band() {
        let a = class_probs(1.3, 0.7, 1.0, 0.5);
        let b = class_probs(0.7, 0.7, 1.0, 0.5);
        assert!((a.p_h - b.p_l).abs() < 1e-13);
        assert!((a.p_l - b.p_h).abs() < 1e-13);
        assert!((a.p_u - b.p_u).abs() < 1e-13);
    }
}
