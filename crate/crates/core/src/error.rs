use thiserror::Error;

use crate::models::ModelKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("missing field `{field}` in group {group}")]
    MissingField { group: usize, field: &'static str },
    #[error("negative count in group {group}")]
    NegativeCount { group: usize },
    #[error("zero groups")]
    ZeroGroups,
    #[error("degenerate group {group}: no bilateral or unilateral subjects")]
    DegenerateGroup { group: usize },
    #[error("group count mismatch: expected {expected}, got {got}")]
    GroupMismatch { expected: usize, got: usize },

    #[error("model {0} has no nuisance parameter")]
    NoNuisance(ModelKind),
    #[error("nuisance parameter {kappa} outside the admissible region of {model}")]
    OutOfDomain { model: ModelKind, kappa: f64 },
    #[error("marginal probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("singular point: a denominator vanishes at the evaluation point")]
    SingularPoint,

    #[error("no admissible root in (0, 1)")]
    NoAdmissibleRoot,
    #[error("singular Hessian in the nuisance update")]
    SingularHessian,
    #[error("nuisance parameter unidentifiable: no bilateral subjects")]
    Unidentifiable,
    #[error("model fit failed: {0}")]
    FitFailed(String),

    #[error("saturated or over-parameterized; asymptotic test undefined (dof {0})")]
    DofUndefined(i64),
    #[error("method {0} is not valid here")]
    WrongMethod(String),
    #[error("no usable bootstrap replicates ({failed} failed)")]
    NoValidReplicates { failed: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
