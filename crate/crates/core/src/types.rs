use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroU64;

use crate::Error;

/// Centroid position in pixel coordinates (x = column, y = row).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Validating constructor: both coordinates finite and non-negative.
    pub fn try_new(x: f64, y: f64) -> Result<Self, Error> {
        if x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 {
            Ok(Point { x, y })
        } else {
            Err(Error::InvalidPoint { x, y })
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::sqrt(self.distance_squared(other))
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// All points detected at one time slice. Point order is significant: the
/// index of a point is its row (or column) in the distance matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSlice {
    pub slice_index: usize,
    pub points: Vec<Point>,
}

impl DetectionSlice {
    pub fn new(slice_index: usize, points: Vec<Point>) -> Self {
        DetectionSlice { slice_index, points }
    }

    pub fn empty(slice_index: usize) -> Self {
        DetectionSlice {
            slice_index,
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Object number. Issued from 1 upwards and never reused within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ObjectId(NonZeroU64);

impl ObjectId {
    /// Returns `None` for zero.
    pub const fn new(id: u64) -> Option<Self> {
        match NonZeroU64::new(id) {
            Some(v) => Some(ObjectId(v)),
            None => None,
        }
    }

    pub const fn get(self) -> u64 {
        self.0.get()
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One observation of a tracked object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub slice_index: usize,
    pub point: Point,
    /// Distance to the next sample (pixels/slice, or pixels/second when a
    /// frame rate is known). `None` on the last sample.
    pub speed: Option<f64>,
}

/// The ordered observations of one object under a stable id. Slice indices
/// are contiguous: an object that leaves the screen never returns under the
/// same id.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub object_id: ObjectId,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn first_slice(&self) -> Option<usize> {
        self.samples.first().map(|s| s.slice_index)
    }

    pub fn last_slice(&self) -> Option<usize> {
        self.samples.last().map(|s| s.slice_index)
    }

    /// True when slices are strictly increasing and gap-free.
    pub fn is_contiguous(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].slice_index == w[0].slice_index + 1)
    }
}

/// What to do with rows of the binary matrix holding several candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AmbiguityPolicy {
    /// Use the matrix as built; every multi-entry row or column is an occlusion.
    FlagOnly,
    /// Keep only the nearest candidate of each row before matching.
    #[default]
    NearestNeighborResolve,
}

/// Tracker parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    threshold: f64,
    fps: Option<f64>,
    policy: AmbiguityPolicy,
}

impl TrackerConfig {
    /// `threshold` is the largest inter-slice distance (pixels) that still
    /// counts as the same object.
    pub fn new(threshold: f64) -> Result<Self, Error> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidThreshold(threshold));
        }
        Ok(TrackerConfig {
            threshold,
            fps: None,
            policy: AmbiguityPolicy::default(),
        })
    }

    pub fn with_fps(mut self, fps: Option<f64>) -> Result<Self, Error> {
        if let Some(v) = fps {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidFrameRate(v));
            }
        }
        self.fps = fps;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: AmbiguityPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn fps(&self) -> Option<f64> {
        self.fps
    }

    pub fn policy(&self) -> AmbiguityPolicy {
        self.policy
    }
}
