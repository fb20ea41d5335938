use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative stimulus {0}")]
    NegativeStimulus(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("neuron index {index} out of range for {len} neurons")]
    NeuronOutOfRange { index: usize, len: usize },

    #[error("sensor reading {0} outside [0, 1]")]
    ReadingOutOfRange(f64),

    #[error("duplicate report for sensor {0}")]
    DuplicateSensor(usize),

    #[error("unknown light id `{0}`")]
    UnknownLight(String),

    #[error("duplicate light id `{0}`")]
    DuplicateLight(String),

    #[error("invalid flash pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unsupported snapshot version {0}")]
    SnapshotVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
