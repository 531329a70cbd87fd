//! Slice-to-slice point matching.
//!
//! [`BinaryDistanceMatrix`] thresholds every pairwise distance between two
//! consecutive slices. [`step`] turns one matrix into the next id assignment:
//!
//! * a row and column that each hold exactly one entry pass the id across,
//! * an all-zero column is a newcomer and gets a fresh id,
//! * an all-zero row is an object that left the screen,
//! * a row or column with several entries is an occlusion. The involved ids
//!   are retired and the involved next-slice points restart with fresh ids.
//!
//! [`Tracker`] drives `step` over a stream of slices and collects
//! trajectories.

mod frame_rate;
mod matrix;
mod speed;
mod tracker;

pub use frame_rate::{min_frames_per_second, FrameRateParams};
pub use matrix::BinaryDistanceMatrix;
pub use speed::annotate_speed;
pub use tracker::{step, track, OcclusionEvent, OcclusionKind, TrackOutput, Tracker, TrackerState};
