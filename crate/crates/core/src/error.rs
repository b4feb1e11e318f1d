use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. `Scenario`-class errors indicate bad input data,
/// everything else is a runtime failure; the CLI maps the two classes to
/// different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },

    #[error("network: {0}")]
    Network(String),

    #[error("demand declared for OD pair {origin} -> {destination} but no path connects it")]
    NoPathForOd { origin: String, destination: String },

    #[error("frequency {value} for line {line} outside bounds [{lower}, {upper}]")]
    FrequencyOutOfBounds {
        line: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("{0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn scenario(line: usize, message: impl Into<String>) -> Self {
        Error::Scenario {
            line,
            message: message.into(),
        }
    }

    pub fn network(message: impl Into<String>) -> Self {
        Error::Network(message.into())
    }

    /// True for errors caused by the scenario description rather than the run.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Scenario { .. } | Error::Network(_) | Error::NoPathForOd { .. }
        )
    }
}
