//! Stopping criteria evaluated each iteration.
//!
//! The margin-aware criterion stops once 1 − Σ_x r_min(x) ≥ δ, at which
//! point the triplet produced by the probability rule is ε-accurate with
//! probability at least δ. Two reference criteria ride along: FC (stop when
//! nothing is left undetermined under the interval rule) and FS (stop when a
//! low percentile of posterior-sampled F-scores clears a target).

use serde::{Deserialize, Serialize};

use crate::classification::ClassificationTriplet;
use crate::error::Result;
use crate::gp::{sample_paths, JointPosterior};
use crate::metrics::f_score;
use crate::probabilities::TriProbability;

/// Snapshot of the monitored criteria at one iteration. The margin-aware
/// bound costs nothing and is always present; the other criteria are None
/// when not monitored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingReport {
    /// 1 − Σ r_min; can go negative when many candidates are undecided.
    pub proposed_bound: f64,
    pub proposed_stop: bool,
    pub fc_stop: Option<bool>,
    pub fs_percentile: Option<f64>,
    pub fs_stop: Option<bool>,
}

/// Margin-aware criterion: stop iff 1 − Σ r_min ≥ δ.
pub fn check_proposed(tps: &[TriProbability], delta: f64) -> (bool, f64) {
    let bound = 1.0 - tps.iter().map(|tp| tp.r_min).sum::<f64>();
    (bound >= delta, bound)
}

/// Fully-classified criterion: stop once the undetermined set is empty.
pub fn check_fc(triplet: &ClassificationTriplet) -> bool {
    triplet.undetermined.is_empty()
}

/// F-score sampling criterion.
///
/// Draw `n_samples` paths from the joint posterior, score the fixed
/// prediction against each sampled truth {x: path(x) > θ}, and stop iff the
/// (100 − percentile)-th nearest-rank percentile of those scores reaches
/// `target_f`.
pub fn check_fs(
    jp: &JointPosterior,
    prediction_upper: &[usize],
    theta: f64,
    target_f: f64,
    percentile: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(bool, f64)> {
    debug_assert!(n_samples >= 100, "too few samples for a percentile");
    let n = jp.mean.len();
    let paths = sample_paths(jp, n_samples, seed)?;
    let mut scores = Vec::with_capacity(n_samples);
    let mut sampled_upper = Vec::with_capacity(n);
    for p in 0..n_samples {
        sampled_upper.clear();
        for j in 0..n {
            if paths[(p, j)] > theta {
                sampled_upper.push(j);
            }
        }
        scores.push(f_score(prediction_upper, &sampled_upper, n));
    }
    scores.sort_by(f64::total_cmp);
    let q = (100.0 - percentile).clamp(0.0, 100.0);
    // nearest-rank percentile
    let rank = ((q / 100.0 * n_samples as f64).ceil() as usize).clamp(1, n_samples);
    let value = scores[rank - 1];
    Ok((value >= target_f, value))
}
