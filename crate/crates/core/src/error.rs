use thiserror::Error;

/// Errors raised by pattern construction, estimators and tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("point {index} at ({x}, {y}) lies outside the window")]
    PointOutsideWindow { index: usize, x: f64, y: f64 },

    #[error("points {first} and {second} share identical coordinates")]
    DuplicatePoint { first: usize, second: usize },

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("{points} points but {marks} marks")]
    LengthMismatch { points: usize, marks: usize },

    #[error("pattern has {n} points, at least {min} required")]
    TooFewPoints { n: usize, min: usize },

    #[error("mark {index} = {value} is not strictly positive")]
    NonPositiveMark { index: usize, value: f64 },

    #[error("point index {index} out of range for a pattern of {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distance grid: {0}")]
    InvalidGrid(String),

    #[error("curves are tabulated on different grids")]
    GridMismatch,

    #[error("reference curve is not strictly positive at r = {r}")]
    NonPositiveReference { r: f64 },

    #[error("sample is empty")]
    EmptySample,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
