//! Multi-object centroid tracking from per-frame point detections.
//!
//! Points detected in consecutive slices are related through a thresholded
//! (binary) distance matrix. Unique row/column matches inherit object numbers,
//! empty columns are newcomers, empty rows are objects leaving the screen, and
//! rows or columns with several candidates are reported as occlusions.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the
//! command-line front-end live in the `centrack` crate.
#![no_std]

extern crate alloc;

mod error;
pub mod eval;
pub mod imaging;
pub mod matching;
pub mod simulate;
mod types;

pub use error::Error;
pub use types::{AmbiguityPolicy, DetectionSlice, ObjectId, Point, Sample, TrackerConfig, Trajectory};
