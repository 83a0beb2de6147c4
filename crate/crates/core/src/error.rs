use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("invalid geometry: a={a}, b={b} (both must be positive and finite)")]
    InvalidGeometry { a: f64, b: f64 },

    #[error("separation must be at least 1 lattice spacing, got {0}")]
    SeparationBelowOne(f64),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("tail bound {bound:e} exceeds tolerance {tol:e} at k_max={k_max}; increase k_max")]
    TailBoundExceeded { k_max: usize, bound: f64, tol: f64 },

    #[error("weight table must cover at least one residue")]
    EmptyWeights,

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("configuration covers {found} sites but the lattice has {expected}")]
    LatticeMismatch { expected: usize, found: usize },

    #[error("schedule has no steps")]
    EmptySchedule,

    #[error("step duration must be nonnegative, got {0}")]
    NegativeDuration(String),

    #[error("operation requires a chain lattice")]
    NotAChain,

    #[error("operation requires a grid lattice")]
    NotAGrid,

    #[error("window period m={0} outside the supported range 4..=8")]
    PeriodOutOfRange(usize),

    #[error("nearest-neighbour net coefficient is zero")]
    ZeroNearestCoupling,

    #[error("schedule has no period of at most half the chain length")]
    NotPeriodic,

    #[error("bulk coefficient at separation {0} depends on position")]
    NotTranslationInvariant(usize),

    #[error("qubit count {n} outside 1..={max}")]
    QubitCountOutOfRange { n: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("verification failed at k={k}: expected {expected}, found {actual}")]
    VerificationFailed {
        k: usize,
        expected: String,
        actual: String,
    },

    #[error("invalid target profile: {0}")]
    InvalidTarget(String),

    #[error("invalid pattern family: {0}")]
    InvalidFamily(String),

    #[error("jitter must be finite and nonnegative, got {0}")]
    InvalidJitter(f64),
}
