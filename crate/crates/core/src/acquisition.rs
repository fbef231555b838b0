//! Acquisition strategies: score every candidate, pick the argmax.
//!
//! The margin-aware strategy scores by r_min, so a candidate stops being
//! attractive once either its classification is settled or its value is
//! confidently inside the margin band. Baselines: plain misclassification
//! probability, straddle, and uncertainty sampling. Anything else can plug
//! in through [`AcquisitionStrategy`].

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{LseError, Result};
use crate::probabilities::TriProbability;

/// Built-in acquisition score functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcquisitionKind {
    /// r_min(x): margin-aware misclassification score.
    Proposed,
    /// p_min(x): classic misclassification probability.
    MisclassBaseline,
    /// β·σ − |μ − θ|.
    Straddle { beta: f64 },
    /// σ(x) alone.
    UncertaintySampling,
}

/// An acquisition kind plus the repeat-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionPolicy {
    #[serde(flatten)]
    pub kind: AcquisitionKind,
    pub allow_repeats: bool,
}

impl AcquisitionPolicy {
    pub fn proposed() -> Self {
        Self {
            kind: AcquisitionKind::Proposed,
            allow_repeats: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AcquisitionKind::Straddle { beta } = self.kind {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(LseError::InvalidConfig {
                    key: "acquisition.beta".into(),
                    reason: format!("straddle beta must be positive, got {beta}"),
                });
            }
        }
        Ok(())
    }
}

/// Extension point for score functions not shipped here (e.g. information
/// gain variants). Built-in kinds implement it too.
pub trait AcquisitionStrategy {
    fn score(&self, tp: &TriProbability, mu: f64, sigma: f64, theta: f64) -> f64;
}

impl AcquisitionStrategy for AcquisitionKind {
    fn score(&self, tp: &TriProbability, mu: f64, sigma: f64, theta: f64) -> f64 {
        match *self {
            AcquisitionKind::Proposed => tp.r_min,
            AcquisitionKind::MisclassBaseline => tp.p_min,
            AcquisitionKind::Straddle { beta } => beta * sigma - (mu - theta).abs(),
            AcquisitionKind::UncertaintySampling => sigma,
        }
    }
}

/// Score one candidate under the policy.
pub fn score(policy: &AcquisitionPolicy, tp: &TriProbability, mu: f64, sigma: f64, theta: f64) -> f64 {
    policy.kind.score(tp, mu, sigma, theta)
}

/// Argmax over eligible candidates; ties go to the lowest index so traces
/// replay exactly.
///
/// With `allow_repeats` off, candidates in `history` are skipped; if that
/// leaves nothing, the exhaustion error tells the caller to stop the run.
pub fn select_next(
    policy: &AcquisitionPolicy,
    scores: &[f64],
    history: &HashSet<usize>,
) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !policy.allow_repeats && history.contains(&i) {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i).ok_or(LseError::CandidatesExhausted { n: scores.len() })
}
