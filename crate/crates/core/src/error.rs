use thiserror::Error;

/// Errors produced by model construction, covariation and analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("indeterminate label `{0}` not found")]
    LabelNotFound(String),

    #[error("atom id {0} out of range (model has {1} atoms)")]
    AtomOutOfRange(usize, usize),

    #[error("assignment has {0} values but indeterminate id {1} was referenced")]
    MissingIndeterminate(usize, usize),

    #[error("block {block} values sum to {sum}, expected 1")]
    BlockNotNormalized { block: usize, sum: f64 },

    #[error("value {value} for `{label}` outside [0, 1]")]
    ValueOutOfRange { label: String, value: f64 },

    #[error("CPT column {column} of variable `{variable}` sums to {sum}, expected 1")]
    CptColumnSum {
        variable: String,
        column: usize,
        sum: f64,
    },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("merge conflict: {0}")]
    MergeConflict(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value {value} out of range for variable `{variable}` (cardinality {cardinality})")]
    BadVariableValue {
        variable: String,
        value: usize,
        cardinality: usize,
    },

    #[error("horizon must be at least 1, got {0}")]
    BadHorizon(usize),

    #[error("covariation undefined: {0}")]
    UndefinedCovariation(String),

    #[error("variation inadmissible: {0}")]
    InvalidVariation(String),

    #[error("covariation scheme not applicable: {0}")]
    UnsupportedCovariation(String),

    #[error("operation requires a multilinear model")]
    NonMultilinear,

    #[error("variation request invalid: {0}")]
    BadRequest(String),

    #[error("varied blocks share a monomial (atom {0}); single-full-CPT analysis requires block non-co-occurrence")]
    CoOccurringBlocks(usize),

    #[error("distributions have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("observed event has probability {0} at the original assignment")]
    ZeroProbabilityObserved(f64),

    #[error("point {0:?} outside the admissible box")]
    OutsideAdmissibleBox(Vec<f64>),

    #[error("grid of {points} candidate covariations exceeds cap {cap}")]
    GridTooLarge { points: u128, cap: u64 },

    #[error("per-member context masses differ ({0} vs {1}); decomposition constant undefined")]
    DecompositionUndefined(f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
