use thiserror::Error;

/// Errors surfaced by the estimation library.
#[derive(Debug, Error)]
pub enum LseError {
    /// Covariance factorization failed even after jitter escalation.
    #[error("covariance factorization failed for {n} observations after jitter escalation")]
    SingularCovariance { n: usize },

    /// Every candidate has already been selected and repeats are disallowed.
    #[error("candidate set exhausted: all {n} candidates already selected")]
    CandidatesExhausted { n: usize },

    /// A target probability cannot be attained by any finite margin.
    #[error("margin inversion target {target} is not attainable")]
    UnattainableTarget { target: f64 },

    /// Input point lies outside the benchmark domain.
    #[error("point {point:?} outside domain bounds of {function}")]
    OutOfDomain { function: String, point: Vec<f64> },

    /// Configuration value failed validation.
    #[error("invalid config: {key}: {reason}")]
    InvalidConfig { key: String, reason: String },

    /// Trace serialization or persistence failure.
    #[error("trace i/o: {0}")]
    TraceIo(String),
}

pub type Result<T> = std::result::Result<T, LseError>;
