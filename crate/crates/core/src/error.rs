use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index out of range: {what} = {value} (allowed {min}..={max})")]
    IndexOutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("division by zero: entries {0} and {1} coincide")]
    DivisionByZero(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("degenerate spectrum: eigenvalue gap {gap:.3e} below threshold")]
    DegenerateSpectrum { gap: f64 },

    #[error("near collision: separation {separation:.3e}")]
    NearCollision { separation: f64 },

    #[error("collision abort at t = {t}: separation {separation:.3e}")]
    CollisionAbort { t: f64, separation: f64 },

    #[error("step size fell below floor at t = {t} (h = {h:.3e})")]
    StepFloorReached { t: f64, h: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
