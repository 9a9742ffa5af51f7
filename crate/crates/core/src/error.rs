use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("obstacle {index}: min corner exceeds max corner")]
    InvertedBox { index: usize },
    #[error("obstacle {index}: base station lies inside the box")]
    BsInsideObstacle { index: usize },
    #[error("angle mask {index}: lower bound {lo} exceeds upper bound {hi}")]
    InvertedMask { index: usize, lo: f64, hi: f64 },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("trajectory: {0}")]
    Trajectory(&'static str),
    #[error("trajectory phase {index}: {reason}")]
    Phase { index: usize, reason: &'static str },
    #[error("endpoints coincide")]
    CoincidentPoints,
    #[error("antenna count must be at least 1")]
    ZeroAntennas,
    #[error("path list is empty")]
    NoPaths,
    #[error("invalid channel parameter: {0}")]
    ChannelParam(&'static str),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("magnitude list is empty")]
    EmptyMagnitudes,
    #[error("top-k: k = {k} outside 1..={m}")]
    TopKRange { k: usize, m: usize },
    #[error("scene record: {0}")]
    Inconsistent(&'static str),
    #[error("invalid environment config: {0}")]
    EnvConfig(&'static str),
    #[error("environment must be reset before stepping")]
    NotReset,
    #[error("episode already finished")]
    EpisodeDone,
    #[error("invalid learning config: {0}")]
    LearningConfig(&'static str),
}
