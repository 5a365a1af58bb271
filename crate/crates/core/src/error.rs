use thiserror::Error;

/// Every failure the library can report. Each variant maps to a distinct
/// process exit code in the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("step size violates precondition: {0}")]
    StepSize(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular geometry: {0}")]
    SingularGeometry(String),
    #[error("quadrature did not reach requested accuracy: {0}")]
    Accuracy(String),
    #[error("degenerate rate network: {0}")]
    DegenerateNetwork(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Config(_) => 3,
            Error::InvalidParameter(_)
            | Error::StepSize(_)
            | Error::SingularGeometry(_)
            | Error::WindowTooSmall(_) => 4,
            Error::ResourceLimit(_) => 5,
            Error::Accuracy(_) | Error::NotConverged(_) => 6,
            Error::DegenerateNetwork(_) | Error::NoSolution(_) => 7,
            Error::Io(_) | Error::Json(_) => 8,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
