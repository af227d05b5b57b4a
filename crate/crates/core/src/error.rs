use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: a truncated Fock space needs at least 2 levels")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("safe-subspace cutoff {cutoff} out of range for dimension {dim}")]
    CutoffOutOfRange { cutoff: usize, dim: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("map is numerically singular: sigma_min/sigma_max = {ratio:e}")]
    NotInvertible { ratio: f64 },

    #[error("condition number {cond:e} exceeds the allowed maximum {max_cond:e}")]
    IllConditioned { cond: f64, max_cond: f64 },

    #[error("inverse failed verification: |S S^-1 - I| = {residual:e}")]
    InverseCheckFailed { residual: f64 },

    #[error("ambiguous vacuum: two smallest singular values {first:e} and {second:e} are too close")]
    DegenerateKernel { first: f64, second: f64 },

    #[error("vacua are orthogonal: |<phi_0, psi_0>| = {overlap:e}")]
    OrthogonalVacua { overlap: f64 },

    #[error("level {requested} out of range, at most {max} available")]
    LevelOutOfRange { requested: usize, max: usize },

    #[error("objects were built from different Riesz maps")]
    ProvenanceMismatch,

    #[error("power {requested} exceeds the supported maximum {max}")]
    PowerOutOfRange { requested: usize, max: usize },

    #[error("quadrature under-resolved: {what} = {got}, need at least {need}")]
    UnderResolved {
        what: &'static str,
        got: usize,
        need: usize,
    },

    #[error("vector is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("coordinate {x} outside the supported range |x| <= {limit}")]
    CoordinateOutOfRange { x: f64, limit: f64 },

    #[error("|z|^2 = {norm_sqr} outside the accuracy regime |z|^2 <= {limit}")]
    OutOfRegime { norm_sqr: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("malformed map record: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
