use thiserror::Error;

/// Errors surfaced by sequence generation, linear algebra and attack code.
#[derive(Debug, Error)]
pub enum Error {
    /// All-zero initial state cannot seed a nonzero sequence.
    #[error("initial state must be nonzero")]
    InvalidKey,

    /// Primitivity testing walks the full period and is capped by degree.
    #[error("degree {0} exceeds the supported primitivity-test range (max {1})")]
    UnsupportedDegree(u32, u32),

    /// A matrix inversion over GF(2) met a linearly dependent row set.
    #[error("matrix is singular over GF(2)")]
    Singular,

    /// Too few linearly independent positions to pin down the state.
    #[error("only {found} independent positions available, need {needed}")]
    RankDeficient { found: usize, needed: usize },

    /// Probabilities must stay strictly inside the open unit interval
    /// where the formula in question requires it.
    #[error("probability {0} outside the valid range {1}")]
    InvalidProbability(f64, &'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Per-check fold tables must match the arity of the check they score.
    #[error("check arity {got} does not match table arity {want}")]
    InvalidArity { got: usize, want: usize },

    /// The observed window is too short to support the requested layout.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
