//! Level set estimation with Gaussian-process surrogates.
//!
//! Given a black-box function observable only through noisy point queries,
//! the goal is to classify every candidate of a finite input set by whether
//! the function exceeds a threshold θ. The library provides:
//!
//! - exact GP regression over the candidate set ([`gp`]),
//! - classification and margin probabilities per candidate ([`probabilities`]),
//! - a margin-aware acquisition rule plus baselines ([`acquisition`]),
//! - probability- and confidence-interval-based classification rules with
//!   β↔ε conversion ([`classification`]),
//! - fixed and adaptive margin selection ([`margin`]),
//! - stopping criteria with a computable ε-accuracy lower bound ([`stopping`]),
//! - F-score and closed-form metric lower bounds ([`metrics`]),
//! - a Monte-Carlo verifier of the stopping bound ([`verify`]),
//! - benchmark test functions on grids ([`benchmarks`]),
//! - and an end-to-end, seeded experiment loop ([`runner`]).

pub mod acquisition;
pub mod benchmarks;
pub mod classification;
pub mod error;
pub mod gp;
pub mod margin;
pub mod metrics;
pub mod normal;
pub mod probabilities;
pub mod runner;
pub mod stopping;
pub mod verify;

pub use acquisition::{AcquisitionKind, AcquisitionPolicy};
pub use classification::ClassificationTriplet;
pub use error::{LseError, Result};
pub use gp::{
    Dataset, HyperparamBounds, InputPoint, JointPosterior, KernelHyperparams, MeanFunction,
    PosteriorSummary,
};
pub use margin::MarginPolicy;
pub use metrics::{ConfusionCounts, MetricBounds};
pub use probabilities::{FourBin, TriProbability};
pub use runner::{ExperimentConfig, ExperimentTrace, IterationRecord};
pub use stopping::StoppingReport;
