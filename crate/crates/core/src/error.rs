use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value:?} is not a point of the prediction space")]
    NotInPredSpace { value: Vec<f64> },

    /// The observation has zero marginal probability (or lies outside the observation space).
    #[error("conditioning undefined: observation {obs:?} has zero marginal probability")]
    ConditioningUndefined { obs: Vec<f64> },

    #[error("parameter {theta:?} lies outside the parameter space")]
    ThetaOutsideSpace { theta: Vec<f64> },

    #[error("rule space too large: {count} rules exceed the cap of {cap}")]
    TooManyRules { count: u128, cap: u64 },

    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rule does not match the model: {0}")]
    RuleMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("objective is unbounded below")]
    UnboundedObjective,

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at `{key}`: {constraint}")]
    Schema { key: String, constraint: String },
}
