//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, RimError>;

/// Errors produced by simulation, processing, training and I/O.
///
/// The CLI maps these onto exit codes: configuration errors exit with 2,
/// data/format errors with 3, numeric failures with 4.
#[derive(Debug, thiserror::Error)]
pub enum RimError {
    /// Invalid configuration or parameter value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Array dimensions do not match what the operation expects.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// Dataset-level problem (missing frames, split violation, bad counts).
    #[error("data error: {0}")]
    Data(String),

    /// Malformed binary file; `offset` is the byte position of the problem.
    #[error("malformed file at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Non-finite values or other numeric breakdown (e.g. diverging training).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl RimError {
    pub fn config(msg: impl Into<String>) -> Self {
        RimError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        RimError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        RimError::Numeric(msg.into())
    }

    pub fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        RimError::Shape {
            expected: expected.into(),
            got: got.into(),
        }
    }

    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RimError::Config(_) | RimError::Shape { .. } => 2,
            RimError::Data(_) | RimError::Format { .. } | RimError::Io(_) => 3,
            RimError::Numeric(_) => 4,
        }
    }
}
