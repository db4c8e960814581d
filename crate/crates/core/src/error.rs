use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, lengths or channel counts of the operands do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A scalar argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Total-variation entry points need at least two spatial dimensions.
    #[error("unsupported dimension d = {0}: total-variation operations require d >= 2")]
    UnsupportedDimension(usize),

    /// Malformed input data (bad side length for Haar, corrupt NDCS payload, ...).
    #[error("format error: {0}")]
    Format(String),

    #[error("exhaustive search needs {required} submatrices but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
