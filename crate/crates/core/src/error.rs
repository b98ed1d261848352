use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph spec: {0}")]
    InvalidSpec(String),

    #[error("generators do not generate the group: element {unreached} is unreachable from the identity")]
    NotGenerating { unreached: usize },

    #[error("generator set is not closed under inverses: inverse of {0} missing")]
    NotSymmetric(usize),

    #[error("graph carries no group structure; translation action unsupported")]
    UnsupportedAction,

    #[error("operation not supported for family {0}")]
    UnsupportedFamily(String),

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degenerate potential: Dirichlet form is zero (constant vector)")]
    DegeneratePotential,

    #[error("degenerate seed: Pf = f")]
    DegenerateSeed,

    #[error("seed rejected: {0}")]
    InvalidSeed(String),

    #[error("measured theta {theta} is not below 1/2")]
    ThetaTooLarge { theta: f64 },

    #[error("measured theta {theta} exceeds cap {cap}")]
    ThetaAboveCap { theta: f64, cap: f64 },

    #[error("dyadic search exhausted at m = {m_max} without meeting the 1/(8 theta) threshold")]
    SearchExhausted { m_max: u32 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("kernel on a single state has no second eigenvalue")]
    NoSecondEigenvalue,

    #[error("value {value} outside admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("t = {t} exceeds validity window {window}")]
    WindowExceeded { t: u64, window: f64 },

    #[error("embedding of {n} x {m} entries exceeds the size guard {limit}")]
    TooLarge { n: usize, m: usize, limit: usize },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for a failed run: 3 for numerical non-convergence,
    /// 2 for everything a user can fix in the configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::SearchExhausted { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
