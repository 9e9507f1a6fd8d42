use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite: Cholesky pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("index error: mode {mode} out of range for a {n_modes}-mode state")]
    ModeIndex { mode: usize, n_modes: usize },

    #[error("arity error: operation requires {expected} modes, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("sample-size error: need at least {needed} samples, got {got}")]
    SampleSize { needed: usize, got: usize },

    #[error("non-finite value at entry ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// True for failures caused by the input data rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}
