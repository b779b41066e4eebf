use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ellipsoid coefficients {0:?}: all must be positive and finite")]
    InvalidSurface([f64; 3]),

    #[error("cannot project the zero vector onto the surface")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration step {step} too coarse: halving it moves the endpoint by {shift:.3e}")]
    StepTooLarge { step: f64, shift: f64 },

    #[error("surface {0:?} is outside the near-round regime (max |a_i - 1| <= 0.1)")]
    NotNearRound([f64; 3]),

    #[error("operation requires the round unit sphere, got {0:?}")]
    NotRound([f64; 3]),

    #[error("degenerate polynomial: max |q| on the surface is {0:.3e}")]
    DegeneratePolynomial(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
