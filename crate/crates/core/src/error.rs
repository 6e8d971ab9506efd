use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid changepoint configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("numerically degenerate system (condition number {condition:.3e}): {context}")]
    NumericalDegeneracy { condition: f64, context: String },

    #[error("singular scale factor: {0}")]
    SingularScale(String),

    #[error("cannot bootstrap: {0}")]
    CannotBootstrap(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn invalid_model(msg: impl Into<String>) -> Self {
        Self::InvalidModel(msg.into())
    }

    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Self::InvalidConfig(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Self::DegenerateSeries(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } => 3,
            Self::InvalidInput(_)
            | Self::InvalidModel(_)
            | Self::InvalidConfig(_)
            | Self::InvalidOrder(_)
            | Self::CannotBootstrap(_) => 4,
            Self::DegenerateSeries(_)
            | Self::NumericalDegeneracy { .. }
            | Self::SingularScale(_) => 5,
            Self::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Self::Io(err.to_string())
    }
}
