use thiserror::Error;

use crate::subset::SubsetIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truth table has {actual} entries, expected 2^{n} = {expected}")]
    SizeMismatch {
        n: usize,
        expected: usize,
        actual: usize,
    },

    /// `lower ⊆ upper` but `φ(lower) > φ(upper)`, or an endpoint is wrong
    /// (then `lower == upper` is the offending endpoint).
    #[error("structure is not semicoherent: {reason} (witness {lower} -> {upper})")]
    NotSemicoherent {
        lower: SubsetIndex,
        upper: SubsetIndex,
        reason: &'static str,
    },

    #[error("{n} components exceeds the limit of {max} for this operation")]
    TooManyComponents { n: usize, max: usize },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown variable `{name}` at position {position}")]
    UnknownVariable { name: String, position: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid lifetime model: {0}")]
    InvalidModel(String),

    #[error("component {j} is out of range for n = {n}")]
    ComponentOutOfRange { j: usize, n: usize },

    #[error("component {j} must not belong to the subset {subset}")]
    JInA { j: usize, subset: SubsetIndex },

    #[error("component count mismatch: structure has {structure}, model has {model}")]
    ComponentMismatch { structure: usize, model: usize },

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    QuadratureFailure { achieved: f64, requested: f64 },

    #[error("incomplete table: {0}")]
    IncompleteTable(String),

    #[error("inconsistent ordering table at {subset}: {left} vs {right}")]
    InconsistentTable {
        subset: SubsetIndex,
        left: f64,
        right: f64,
    },

    #[error("more than {limit} consecutive tied draws at index {index}")]
    TieRejectionOverflow { index: u64, limit: usize },

    #[error("lifetimes contain ties")]
    TiedLifetimes,

    #[error("lifetimes must be finite and positive")]
    InvalidLifetime,

    #[error("method `{method}` is not available for the {model} model")]
    MethodUnavailable {
        method: &'static str,
        model: &'static str,
    },

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    /// Malformed system-spec file; `field` is a dotted path such as
    /// `model.lambda`.
    #[error("spec error at `{field}`: {message}")]
    Spec { field: String, message: String },
}

impl Error {
    /// Errors caused by numerics rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::TieRejectionOverflow { .. }
                | Error::InconsistentTable { .. }
        )
    }
}
