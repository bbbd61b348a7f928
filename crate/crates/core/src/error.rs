use std::path::PathBuf;

/// Errors produced anywhere in the simulation, training and classification pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gimbal singularity: |theta| = {theta} is within 1e-6 rad of pi/2")]
    GimbalSingularity { theta: f64 },

    #[error("integration diverged at RK4 stage {stage}")]
    IntegrationDiverged { stage: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("scenario {scenario} infeasible for {class}: {rejected} consecutive seeds rejected")]
    ScenarioInfeasible {
        class: String,
        scenario: String,
        rejected: usize,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("forward cache is stale: {0}")]
    StaleCache(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("truncated file {path}: expected {expected} bytes, found {found}")]
    TruncatedFile {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("hash mismatch for {path}")]
    HashMismatch { path: PathBuf },

    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    #[error("parameter file line {line}: {message}")]
    ParamFile { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
