use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("map is not a strict contactomorphism: max |phi*lambda - lambda| = {max_residual:.3e}")]
    StrictnessViolation { max_residual: f64 },

    #[error("isometry check failed: max |phi*g - g| = {max_residual:.3e}")]
    NotAnIsometry { max_residual: f64 },

    #[error("contact frame degenerate along orbit: {0}")]
    Frame(String),

    #[error("degenerate orbit {string}: |det(I - P)| = {det:.3e}; perturb the metric or use Morse-Bott aggregation")]
    Degenerate { string: String, det: f64 },

    #[error("unresolved crossing at t = {t:.6}: {reason}; refine the path grid")]
    Precision { t: f64, reason: String },

    #[error("continuation stalled at t = {t:.6} (step {step:.3e})")]
    Stall { t: f64, step: f64 },

    #[error("Fuller invariance not applicable: track {track} ended with status {status}")]
    InvarianceNotApplicable { track: usize, status: String },

    #[error("unsupported component topology: {0}")]
    UnsupportedTopology(String),

    #[error("orbit strings belong to different models: {0} vs {1}")]
    MismatchedModels(String, String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed description: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
