use thiserror::Error;

pub type Result<T, E = ControlError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("time grid mismatch: expected {expected} steps over T = {horizon}, found {found}")]
    GridMismatch {
        expected: usize,
        found: usize,
        horizon: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("singular linear system at propagation step {step}")]
    SingularStep { step: usize },

    #[error("fixed-point map is not contractive at theta = {theta}")]
    ThetaTooSmall { theta: f64 },

    #[error("invalid bracket ({a}, {b}, {c}): middle point must be below both ends")]
    InvalidBracket { a: f64, b: f64, c: f64 },

    #[error("line search could not bracket a minimum within {probes} probes")]
    BracketingFailed { probes: usize },

    #[error("problem construction failed: {0}")]
    Construction(String),

    #[error("scheme {0:?} does not support this operation")]
    Unsupported(crate::problem::Scheme),

    #[error("invalid configuration: {0}")]
    Config(String),
}
