//! File formats and command-line front-end for [`centrack_core`].
//!
//! * detections CSV `slice,x,y`, ground truth CSV `slice,x,y,true_id`,
//!   trajectories CSV `object_id,slice,x,y,speed`
//! * PGM (P2/P5, maxval <= 255) frames
//! * occlusion events as JSON lines
//! * run manifests as JSON

pub mod cli;
pub mod csv_io;
mod error;
pub mod events;
pub mod frames;
pub mod manifest;
pub mod pgm;

pub use error::Error;
