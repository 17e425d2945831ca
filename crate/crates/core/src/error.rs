use thiserror::Error;

/// Errors shared by every numerical module of the crate.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular evaluation in node `{node}` at t={t}: {detail}")]
    SingularEvaluation { node: String, t: f64, detail: String },

    #[error("invalid field definition: {0}")]
    InvalidField(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("missing modulus entry for interval {interval} and radius index {radius_index}")]
    MissingModulus { interval: String, radius_index: u32 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("layered problem is infeasible at layer {layer}")]
    InfeasibleProblem { layer: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("fixed-point iteration exceeded {max_iter} iterations at step {step} (t={t})")]
    StiffStep { step: usize, t: f64, max_iter: usize },

    #[error("requested time {t} outside the trajectory span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("missing derivative data: {0}")]
    MissingDerivative(String),

    #[error("the limit problem blows up at t={b_estimate} before the requested horizon {horizon}; rerun with a smaller horizon")]
    HorizonPastBlowUp { b_estimate: f64, horizon: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
