use thiserror::Error;

/// Errors produced by distribution handling, entropy evaluation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: a distribution needs at least one state")]
    EmptyInput,

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("non-finite probability at index {index}")]
    NonFinite { index: usize },

    #[error("probability {value} at index {index} exceeds 1")]
    ProbabilityAboveOne { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sampling needs at least 2 states, got {states}")]
    DegenerateSampling { states: usize },

    #[error("variation step {step} leaves the simplex")]
    StepTooLarge { step: f64 },

    #[error("invalid variation: {0}")]
    InvalidVariation(String),

    #[error("parameter {name} = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate trace part: h is linear, so the entropy is constant")]
    DegenerateH,

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("derivative is singular at t = {t}")]
    SingularDerivative { t: f64 },

    #[error("least-squares design is rank deficient (rank {rank} of 4)")]
    RankDeficient { rank: usize },

    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("line {line}: {source}")]
    AtLine { line: usize, source: Box<Error> },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
