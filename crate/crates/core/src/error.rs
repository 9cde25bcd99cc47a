use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("asset '{asset}' references unknown bus '{bus}'")]
    UnknownBus { asset: String, bus: String },

    #[error("duplicate {category} id '{id}'")]
    DuplicateId { category: &'static str, id: String },

    #[error("invalid asset '{asset}': {message}")]
    InvalidAsset { asset: String, message: String },

    #[error("{role} series too short: need {need}, got {got}")]
    SeriesTooShort { role: String, need: usize, got: usize },

    #[error("negative value {value} for asset '{asset}' at hour {hour}")]
    NegativeValue { asset: String, hour: usize, value: f64 },

    /// Malformed or inconsistent input data (files, series, scenarios).
    #[error("{0}")]
    Data(String),

    /// A linear program that violates its own structural invariants.
    #[error("invalid linear program: {0}")]
    Model(String),

    /// The solver returned a non-optimal status where optimality was required.
    #[error("solve failed: {0}")]
    Solve(String),

    /// Bad argument or configuration value.
    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
