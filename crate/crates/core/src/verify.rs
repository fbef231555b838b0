//! Monte-Carlo verification of the stopping bound.
//!
//! The stopping rule promises Pr(triplet is ε-accurate) ≥ 1 − Σ r_min under
//! the posterior. Sampling paths from the joint posterior and checking the
//! ε-accuracy event directly gives an empirical estimate of the left-hand
//! side to compare against the computable right-hand side.

use crate::classification::ClassificationTriplet;
use crate::error::Result;
use crate::gp::{sample_paths, JointPosterior};
use crate::metrics::eps_accuracy;
use crate::probabilities::{gamma_eta, GammaVariant, TriProbability};

/// Fraction of posterior sample paths for which the triplet is ε-accurate,
/// with its binomial standard error.
pub fn empirical_eps_accuracy_prob(
    jp: &JointPosterior,
    triplet: &ClassificationTriplet,
    theta: f64,
    eps: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    debug_assert!(n_paths >= 100);
    let paths = sample_paths(jp, n_paths, seed)?;
    let n = jp.mean.len();
    let mut hits = 0usize;
    let mut f = vec![0.0; n];
    for p in 0..n_paths {
        for (j, fj) in f.iter_mut().enumerate() {
            *fj = paths[(p, j)];
        }
        if eps_accuracy(triplet, &f, theta, eps) {
            hits += 1;
        }
    }
    let estimate = hits as f64 / n_paths as f64;
    let stderr = (estimate * (1.0 - estimate) / n_paths as f64).sqrt();
    Ok((estimate, stderr))
}

/// Same probability, evaluated through the per-candidate concentration
/// events |z − E\[z\]| ≤ γ and w ≥ η instead of the set memberships.
///
/// With the exact γ the first event tests a numerical equality, so the
/// midpoint variant is the usable default; the exact variant exists as a
/// cross-check.
pub fn empirical_event_prob(
    jp: &JointPosterior,
    tps: &[TriProbability],
    theta: f64,
    eps: f64,
    variant: GammaVariant,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    debug_assert!(n_paths >= 100);
    debug_assert_eq!(jp.mean.len(), tps.len());
    let paths = sample_paths(jp, n_paths, seed)?;
    let pairs: Vec<(f64, u8)> = tps.iter().map(|tp| gamma_eta(tp, variant)).collect();
    let mut hits = 0usize;
    for p in 0..n_paths {
        let ok = tps.iter().enumerate().all(|(j, tp)| {
            let gap = paths[(p, j)] - theta;
            let z = f64::from(gap > 0.0);
            let w = u8::from(gap > -eps / 2.0 && gap <= eps / 2.0);
            let (gamma, eta) = pairs[j];
            (z - tp.p_h).abs() <= gamma && w >= eta
        });
        if ok {
            hits += 1;
        }
    }
    let estimate = hits as f64 / n_paths as f64;
    let stderr = (estimate * (1.0 - estimate) / n_paths as f64).sqrt();
    Ok((estimate, stderr))
}

/// Slack of the stopping bound: estimate − (1 − Σ r_min).
pub fn bound_gap(estimate: f64, tps: &[TriProbability]) -> f64 {
    let bound = 1.0 - tps.iter().map(|tp| tp.r_min).sum::<f64>();
    estimate - bound
}
