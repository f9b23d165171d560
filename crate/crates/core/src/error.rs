use std::path::PathBuf;

use crate::histograms::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frame is {width}x{height}, both dimensions must be at least 3")]
    DimensionTooSmall { width: usize, height: usize },

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelCount { expected: usize, actual: usize },

    #[error("frame is {actual_width}x{actual_height}, configured for {width}x{height}")]
    FrameSize {
        width: usize,
        height: usize,
        actual_width: usize,
        actual_height: usize,
    },

    #[error("histogram lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("histogram axes differ ({0:?} vs {1:?})")]
    AxisMismatch(Axis, Axis),

    #[error("gradient was computed for {gradient:?}, histogram requested for {requested:?}")]
    GradientAxis { gradient: Axis, requested: Axis },

    #[error("invalid match parameters: {0}")]
    InvalidParams(String),

    #[error("no valid match positions for a histogram of length {0}")]
    EmptyProfile(usize),

    #[error("degenerate profile: least squares needs at least two distinct positions")]
    DegenerateProfile,

    #[error("textureless scene: histogram carries no edge energy")]
    Textureless,

    #[error("disparity {0} does not define a height")]
    NoHeight(i64),

    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("invalid camera pose: {0}")]
    InvalidPose(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("simulation diverged at t={t:.3}s (position {x:.2}, {y:.2} m)")]
    Diverged { t: f64, x: f64, y: f64 },

    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn data(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
