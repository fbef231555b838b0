//! Evaluation metrics against ground truth and the closed-form lower bounds
//! implied by an ε-accurate triplet.
//!
//! Candidates in the upper set are the positive class. When every estimated
//! set is correct and only the undetermined set can cost us, the worst case
//! places all of Ũ in FP∪FN, which yields computable floors for accuracy,
//! precision, recall, specificity, and F-score.

use serde::{Deserialize, Serialize};

use crate::classification::ClassificationTriplet;

/// Standard confusion-matrix counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Closed-form metric floors computed from set sizes alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBounds {
    pub accuracy_lb: f64,
    pub precision_lb: f64,
    pub recall_lb: f64,
    pub specificity_lb: f64,
    pub f_score_lb: f64,
}

/// Prediction used for scoring: upper iff the posterior mean clears θ.
/// Classified and unclassified candidates alike go through the same
/// thresholding.
pub fn evaluation_prediction(mu: &[f64], theta: f64) -> Vec<usize> {
    mu.iter()
        .enumerate()
        .filter(|(_, &m)| m > theta)
        .map(|(i, _)| i)
        .collect()
}

fn mask(indices: &[usize], n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in indices {
        debug_assert!(i < n);
        m[i] = true;
    }
    m
}

/// Confusion counts of a predicted upper set against the true upper set.
pub fn confusion(pred_upper: &[usize], true_upper: &[usize], n: usize) -> ConfusionCounts {
    let pred = mask(pred_upper, n);
    let truth = mask(true_upper, n);
    let mut c = ConfusionCounts {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
    };
    for i in 0..n {
        match (pred[i], truth[i]) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// F-score 2TP/(2TP + FP + FN); defined as 1 when both sets are empty.
pub fn f_score(pred_upper: &[usize], true_upper: &[usize], n: usize) -> f64 {
    let c = confusion(pred_upper, true_upper, n);
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        1.0
    } else {
        2.0 * c.tp as f64 / denom as f64
    }
}

/// Does the triplet classify the function `f_true` correctly up to the
/// margin? Upper members need f > θ, lower members f ≤ θ, and undetermined
/// members f − θ ∈ (−ε/2, ε/2].
pub fn eps_accuracy(
    triplet: &ClassificationTriplet,
    f_true: &[f64],
    theta: f64,
    eps: f64,
) -> bool {
    debug_assert!(eps > 0.0);
    triplet.upper.iter().all(|&i| f_true[i] - theta > 0.0)
        && triplet.lower.iter().all(|&i| f_true[i] - theta <= 0.0)
        && triplet.undetermined.iter().all(|&i| {
            let gap = f_true[i] - theta;
            gap > -eps / 2.0 && gap <= eps / 2.0
        })
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Metric floors valid whenever the triplet is ε-accurate.
pub fn metric_lower_bounds(triplet: &ClassificationTriplet) -> MetricBounds {
    let h = triplet.upper.len();
    let l = triplet.lower.len();
    let u = triplet.undetermined.len();
    MetricBounds {
        accuracy_lb: ratio_or_one(h + l, h + l + u),
        precision_lb: ratio_or_one(h, h + u),
        recall_lb: ratio_or_one(h, h + u),
        specificity_lb: ratio_or_one(l, l + u),
        f_score_lb: ratio_or_one(2 * h, 2 * h + u),
    }
}
