use alloc::vec::Vec;

/// Errors raised by the measure, transport and graph routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("weight {index} must be strictly positive and finite, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("structure matrix is not symmetric at ({row}, {col})")]
    AsymmetricStructure { row: usize, col: usize },

    #[error("structure matrix has a negative or non-finite entry at ({row}, {col})")]
    NegativeStructureEntry { row: usize, col: usize },

    #[error("structure matrix has a non-zero diagonal entry at {index}")]
    NonZeroDiagonal { index: usize },

    #[error("a measure needs at least one point")]
    EmptyMeasure,

    #[error("feature modes differ (vectors vs label sequences)")]
    MixedFeatureModes,

    #[error("cost entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },

    #[error("exponent q = {0} is not supported (q must be 1 or 2)")]
    UnsupportedExponent(u32),

    #[error("trade-off alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("coupling marginals do not match (max deviation {deviation:e})")]
    MarginalMismatch { deviation: f64 },

    #[error("network simplex exceeded {0} pivots")]
    PivotLimit(usize),

    #[error("edge ({0}, {1}) is invalid (self-loop or endpoint out of range)")]
    InvalidEdge(usize, usize),

    #[error("graph is disconnected ({} components)", components.len())]
    DisconnectedGraph { components: Vec<Vec<usize>> },

    #[error("graph has no discrete node labels")]
    MissingLabels,

    #[error("graph has no node attributes")]
    MissingAttributes,

    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),

    #[error("invalid block-model spec: {0}")]
    SpecInvalid(&'static str),

    #[error("no connected sample after {0} attempts")]
    ConnectivityRetriesExceeded(usize),

    #[error("kernel bandwidth gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),

    #[error("training set is empty")]
    EmptyTrainSet,

    #[error("k = {k} exceeds the number of items ({count})")]
    KTooLarge { k: usize, count: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
