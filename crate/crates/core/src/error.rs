use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: negative trade value {value}")]
    NegativeValue { line: u64, value: f64 },

    #[error("no usable trade records{0}")]
    EmptyData(String),

    #[error("unknown product code {0:?}")]
    UnknownProduct(String),

    #[error("unknown country {0:?}")]
    UnknownCountry(String),

    #[error("label {0:?} collides with an existing country or group")]
    LabelCollision(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("total trade volume is zero")]
    ZeroVolume,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative or direct solver, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
