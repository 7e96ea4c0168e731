use thiserror::Error;

/// Errors produced while ingesting definitions or running the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed definition: {0}")]
    Malformed(String),

    #[error("{what} index {index} out of range 1..={max}")]
    OutOfRange {
        what: &'static str,
        index: i64,
        max: usize,
    },

    #[error("level-1 cell graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("gluings identify boundary labels {p} and {q} of cell {cell}")]
    DegenerateCell { cell: usize, p: usize, q: usize },

    #[error("invalid harmonic structure: {0}")]
    InvalidHarmonic(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("eigensolver failed at level {level} (size {size})")]
    Eigen { level: usize, size: usize },

    #[error("insufficient spectrum: need at least {needed} eigenvalues, have {have}")]
    InsufficientSpectrum { needed: usize, have: usize },

    #[error("exponent p = {p} outside ({lo}, {hi}]")]
    ExponentOutOfRange { p: f64, lo: f64, hi: f64 },

    #[error("spectral volume requires the non-lattice case: {0}")]
    LatticeCase(String),

    #[error("{what} of dimension {size} exceeds the dense limit {max}")]
    TooLarge {
        what: &'static str,
        size: usize,
        max: usize,
    },

    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),

    #[error("wrong boundary condition: expected {expected}")]
    BoundaryCondition { expected: &'static str },

    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
