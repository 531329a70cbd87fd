use core::fmt;

/// Errors raised by the tracking, imaging and evaluation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate was NaN, infinite or negative.
    InvalidPoint { x: f64, y: f64 },
    /// Matching threshold must be finite and strictly positive.
    InvalidThreshold(f64),
    /// Frame rate must be finite and strictly positive.
    InvalidFrameRate(f64),
    /// Speed/density gradient must be finite and strictly positive.
    InvalidGradient(f64),
    /// Free-flow speed must be finite and non-negative.
    InvalidFreeFlowSpeed(f64),
    /// Matrix row count does not match the number of tracked points.
    DimensionMismatch { expected: usize, found: usize },
    /// Two images that must share a size do not.
    ImageSizeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Pixel buffer length disagrees with `width * height`, or a side is zero.
    InvalidImage { width: usize, height: usize, len: usize },
    /// An empty frame stack was given where at least one frame is needed.
    EmptyStack,
    /// Exhaustive oracle called on an instance over its size limit.
    OracleTooLarge { prev: usize, next: usize, limit: usize },
    /// Slices handed to the tracker skip or repeat an index.
    NonContiguousSlices { expected: usize, found: usize },
    /// Scenario configuration rejected.
    InvalidScenario(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPoint { x, y } => {
                write!(
                    f,
                    "invalid point ({x}, {y}): coordinates must be finite and non-negative"
                )
            }
            Error::InvalidThreshold(t) => write!(f, "threshold must be > 0, got {t}"),
            Error::InvalidFrameRate(v) => write!(f, "frame rate must be > 0, got {v}"),
            Error::InvalidGradient(b) => {
                write!(f, "speed-density gradient must be > 0, got {b}")
            }
            Error::InvalidFreeFlowSpeed(v) => {
                write!(f, "free-flow speed must be finite and >= 0, got {v}")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "distance matrix has {found} rows but the tracker holds {expected} points"
            ),
            Error::ImageSizeMismatch { expected, found } => write!(
                f,
                "image size {}x{} does not match {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Error::InvalidImage { width, height, len } => write!(
                f,
                "pixel buffer of length {len} does not describe a {width}x{height} image"
            ),
            Error::EmptyStack => f.write_str("frame stack is empty"),
            Error::OracleTooLarge { prev, next, limit } => write!(
                f,
                "oracle instance {prev}x{next} exceeds the {limit}x{limit} enumeration limit"
            ),
            Error::NonContiguousSlices { expected, found } => {
                write!(f, "expected slice {expected}, got slice {found}")
            }
            Error::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
        }
    }
}

impl core::error::Error for Error {}
