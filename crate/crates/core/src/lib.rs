//! Algorithmic core for multi-camera indoor people monitoring.
//!
//! This crate contains the full processing chain for turning per-camera 2D
//! pose detections into site-frame trajectories with body orientations, plus
//! the evaluation machinery to score those trajectories against ground truth:
//!
//! - [`geometry`]: planar homography calibration (pixel -> floor), foot-point
//!   extraction, camera-to-world orientation rotation, and camera-installation
//!   geometry factors.
//! - [`assignment`]: minimum-cost bipartite matching (Hungarian method) with
//!   distance gating.
//! - [`filtering`]: linear constant-velocity Kalman filter and
//!   Rauch-Tung-Striebel smoother, generic over the number of tracked axes.
//! - [`pose_preproc`]: per-camera detection cleaning (stationary ghost
//!   removal, pixel-space pose tracking with left/right flip correction and
//!   smoothing) and the face-keypoint orientation heuristic.
//! - [`fusion`]: cross-camera duplicate merging via a proximity graph and
//!   inverse-squared-distance weighting.
//! - [`tracker`]: world-space multi-person tracking with orientation fusion,
//!   plus a frame-by-frame Hungarian baseline.
//! - [`metrics`]: CLEAR-MOT accumulation, identity metrics, orientation
//!   error metrics, and Pearson correlation of geometry factors vs. errors.
//! - [`simulator`]: synthetic scenario generation (trajectories, pinhole
//!   ground-plane cameras, noise injection) used as the test oracle.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats and the
//! command-line pipeline live in the companion `sitetrack-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod assignment;
pub mod filtering;
pub mod fusion;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod pose_preproc;
pub mod simulator;
pub mod tracker;

pub use model::{
    BoundingBox, GroundTruthRecord, Keypoint, Pose2D, PoseDetection, Track, TrackState,
    TrackStatus, WorldObservation,
};
