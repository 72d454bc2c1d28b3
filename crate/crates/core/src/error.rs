use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("not regular by definition: {0}")]
    NotRegular(String),

    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("point {0} is not part of the configuration")]
    PointNotInConfiguration(String),

    #[error("state space too large: {required} states requested, limit is {limit}")]
    StateSpaceOverflow { required: u128, limit: u128 },

    #[error("detailed balance violated: relative error {0:e}")]
    DetailedBalance(f64),

    #[error("integral did not converge: {0}")]
    NonConvergent(String),

    #[error("insufficient mixing or trend: {0}")]
    InsufficientMixing(String),

    #[error("degenerate trial function: variance {0:e}")]
    DegenerateTrialFunction(f64),

    #[error("particle count exceeded {limit} at t = {time}")]
    RateOverflow { limit: usize, time: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
