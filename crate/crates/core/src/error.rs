use thiserror::Error;

/// Errors raised by tableau construction, order analysis, stability sweeps and
/// time integration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resource limit exceeded: {what} = {requested} (cap {cap})")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finding did not converge for node {index} (residual {residual:e})")]
    RootFinding { index: usize, residual: f64 },

    #[error("nodes {i} and {j} are too close (gap {gap:e}); collocation tableau is ill-conditioned")]
    IllConditioned { i: usize, j: usize, gap: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("final update {mode} not applicable: {reason}")]
    FinalUpdate { mode: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("stage {stage} has zero coefficient error; diagonal jump EED undefined")]
    ZeroStageError { stage: usize },

    #[error("pole of the stability function or iteration matrix at z = {re}{im:+}i{}", .context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Pole {
        re: f64,
        im: f64,
        context: Option<String>,
    },

    #[error("Newton iteration failed in stage {stage} after {iterations} iterations (residual {residual:e})")]
    NewtonFailure {
        stage: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("schedule is not lower triangular: sweep {sweep} has entry ({row}, {col}) above the diagonal")]
    UnsupportedSchedule { sweep: usize, row: usize, col: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("insufficient precision: {0}")]
    Precision(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
