//! Simulator and evaluation harness for collaborative satellite object
//! detection: clustered-satellite scene generation with ground-truth
//! geometry, distance-based viewpoint selection, multi-view fusion
//! baselines, mAP50 / mAP50:95 scoring, and communication-cost accounting
//! against the LEO reaction-time budget.

pub mod camera;
pub mod cluster;
pub mod detect;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geom;
pub mod io;
pub mod orbital;
pub mod par;
pub mod rng;
pub mod select;
pub mod stats;

pub use error::{Result, ScsError};
