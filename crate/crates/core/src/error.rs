use thiserror::Error;

/// Configuration problems, always tied to the offending key when one exists.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config file {path}: {reason}")]
    File { path: String, reason: String },

    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

impl ConfigError {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidValue {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

/// Contract violations in the measurement chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("out-of-order sample: got t={got} ms, expected t={expected} ms")]
    OutOfOrder { got: u64, expected: u64 },

    #[error("beam consolidation over an empty beam set")]
    EmptyBeamSet,
}

/// Errors raised while running a simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Measure(#[from] MeasureError),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Measure(_) | SimError::Invariant(_) => 3,
            SimError::Io(_) | SimError::Csv(_) | SimError::Json(_) => 1,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
