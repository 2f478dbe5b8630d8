use thiserror::Error;

/// Errors shared across the simulation, training, and I/O layers.
#[derive(Debug, Error)]
pub enum QuadError {
    #[error("degenerate quaternion: norm is zero or non-finite")]
    DegenerateQuaternion,

    #[error("integration produced a non-finite derivative at {context}")]
    NonFiniteDerivative { context: String },

    #[error("simulation diverged: non-finite state after step {step}")]
    DivergedSimulation { step: u64 },

    #[error("observation index {index} out of episode bounds (length {len})")]
    EpisodeBounds { index: usize, len: usize },

    #[error("episode already finished; reset before stepping")]
    EpisodeFinished,

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: String,
        found: String,
        context: String,
    },

    #[error("replay buffer holds {have} transitions, {need} required")]
    InsufficientData { have: usize, need: usize },

    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
