//! Crate-wide error type.

use crate::subset::SubsetIndex;

/// Errors raised by distribution construction, information measures,
/// mixtures, models, and objectives.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Alphabet has no modalities, a zero-sized modality, or too many modalities.
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    /// Product of alphabet sizes exceeds the enumeration cell cap.
    #[error("enumeration budget exceeded: {cells} cells > cap {cap}")]
    BudgetExceeded { cells: usize, cap: usize },

    /// Probability table fails validation (length, negativity, normalization).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Subset references a modality index outside the alphabet.
    #[error("invalid subset {subset}: alphabet has {modalities} modalities")]
    InvalidSubset {
        subset: SubsetIndex,
        modalities: usize,
    },

    /// Subset arguments must be disjoint for this operation.
    #[error("subsets {a} and {b} overlap")]
    OverlappingSubsets { a: SubsetIndex, b: SubsetIndex },

    /// An operation that requires a non-empty subset received the empty one.
    #[error("empty subset not allowed here")]
    EmptySubset,

    /// Two tables that must share a support have different lengths.
    #[error("support mismatch: left has {left} entries, right has {right}")]
    SupportMismatch { left: usize, right: usize },

    /// KL/cross-entropy is undefined: q(x) = 0 at an index where p(x) > 0.
    #[error("absolute continuity violated at index {index}: p={p}, q=0")]
    AbsoluteContinuityViolated { index: usize, p: f64 },

    /// Subset mixture fails validation.
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    /// A mixture, model, and distribution disagree on the modality count.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Operation is defined only for a strict subset of mixture families.
    #[error("family {family} not supported: {reason}")]
    UnsupportedFamily { family: String, reason: String },

    /// Dataset variant does not support the requested derived quantity.
    #[error("dataset variant not supported: {0}")]
    UnsupportedVariant(String),

    /// A conditional channel table fails validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// Rate identity requires the queried subset to be part of the mixture.
    #[error("subset {subset} is not a member of the mixture")]
    SubsetNotInMixture { subset: SubsetIndex },

    /// A scalar argument (β, step size, …) is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Training aborted on a non-finite objective or gradient.
    #[error("non-finite objective at step {step}: value {value}")]
    NonFiniteObjective { step: usize, value: f64 },

    /// Leave-one-out coherence needs at least two modalities.
    #[error("leave-one-out coherence undefined for a single modality")]
    LeaveOneOutUndefined,

    /// Text deserialization failed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
