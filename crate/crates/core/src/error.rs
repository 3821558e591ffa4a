use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed complex description: {0}")]
    MalformedDescription(String),

    #[error("vertex `{0}` does not belong to any top simplex")]
    DanglingFace(String),

    #[error("simplex `{id}` has weight {weight} below the lower bound {bound}")]
    WeightBelowBound {
        id: String,
        weight: String,
        bound: String,
    },

    #[error("unknown simplex `{0}`")]
    UnknownSimplex(String),

    #[error("refinement is only defined for 0+1-dimensional complexes (got n_dim = {0})")]
    UnsupportedRefinement(usize),

    #[error("enumeration exceeded the node budget of {budget}; use sampling instead")]
    BudgetExceeded { budget: u64 },

    #[error("entropy of an empty microstate set is undefined")]
    ZeroMicrostates,

    #[error("path count {count} exceeds the cap of {cap}")]
    PathExplosion { count: u128, cap: usize },

    #[error("invalid path endpoints: {0}")]
    InvalidEndpoints(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("path weights must be non-negative")]
    NegativePathWeight,

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("action model kind `{0}` cannot be used here")]
    BadModelKind(String),

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("invalid toy-model parameters: {0}")]
    InvalidSpec(String),

    #[error("bad initial collapse state: {0}")]
    BadInitialState(String),

    #[error("collapse walk did not absorb within {0} steps")]
    NoAbsorption(u64),

    #[error("components are not pairwise orthogonal (|<psi_{a}|psi_{b}>| = {overlap:e})")]
    NonOrthogonalDecomposition { a: usize, b: usize, overlap: f64 },

    #[error("state is not normalized (<psi|psi> = {0})")]
    UnnormalizedState(f64),

    #[error("probability {0} is outside the open interval (0, 1)")]
    DegenerateProbability(f64),

    #[error("u grid must contain the origin u = 0")]
    MissingOrigin,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
