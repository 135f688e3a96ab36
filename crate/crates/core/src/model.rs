//! Core domain types shared by all pipeline stages.
//!
//! Conventions used throughout the crate:
//!
//! - Timestamps are integer seconds (frame indices at 1 Hz).
//! - Site coordinates are meters, `x` pointing east and `y` pointing north.
//! - Orientations are stored as unit 2-vectors in the site frame; at file
//!   boundaries they are degrees clockwise from north, so 0 deg = north =
//!   `(0, 1)` and 90 deg = east = `(1, 0)`.
//! - Image coordinates are pixels, `u` rightward and `v` downward.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix4, Unit, Vector2};
#[allow(unused_imports)]
use num_traits::Float;

/// Frame index in seconds (the pipeline runs at 1 Hz).
pub type FrameTime = u64;

/// Camera identifier as it appears in calibration and detection files.
pub type CameraId = String;

/// Ground-truth person identifier.
pub type PersonId = String;

/// 2D point or direction, used for both site-frame meters and image pixels.
pub type Vec2 = Vector2<f64>;

/// Unit-norm direction in the site frame.
pub type UnitVec2 = Unit<Vector2<f64>>;

/// Number of keypoints in a COCO-format 2D pose.
pub const NUM_KEYPOINTS: usize = 17;

/// COCO keypoint order, fixed for every [`Pose2D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum KeypointIndex {
    Nose = 0,
    LeftEye = 1,
    RightEye = 2,
    LeftEar = 3,
    RightEar = 4,
    LeftShoulder = 5,
    RightShoulder = 6,
    LeftElbow = 7,
    RightElbow = 8,
    LeftWrist = 9,
    RightWrist = 10,
    LeftHip = 11,
    RightHip = 12,
    LeftKnee = 13,
    RightKnee = 14,
    LeftAnkle = 15,
    RightAnkle = 16,
}

/// Left/right keypoint pairs, used when a detector flips body sides.
pub const LR_PAIRS: [(usize, usize); 8] = [
    (1, 2),   // eyes
    (3, 4),   // ears
    (5, 6),   // shoulders
    (7, 8),   // elbows
    (9, 10),  // wrists
    (11, 12), // hips
    (13, 14), // knees
    (15, 16), // ankles
];

/// One 2D keypoint in image coordinates.
///
/// When `visible` is false, `u` and `v` carry no meaning and are ignored by
/// every consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub u: f64,
    pub v: f64,
    /// Detector confidence in `[0, 1]`.
    pub confidence: f64,
    pub visible: bool,
}

impl Keypoint {
    pub fn new(u: f64, v: f64, confidence: f64, visible: bool) -> Self {
        Self {
            u,
            v,
            confidence,
            visible,
        }
    }

    /// A keypoint marked invisible; coordinates are placeholders.
    pub fn hidden() -> Self {
        Self {
            u: 0.0,
            v: 0.0,
            confidence: 0.0,
            visible: false,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }
}

/// A 17-keypoint 2D pose in fixed COCO order.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose2D {
    pub keypoints: [Keypoint; NUM_KEYPOINTS],
}

impl Pose2D {
    pub fn new(keypoints: [Keypoint; NUM_KEYPOINTS]) -> Self {
        Self { keypoints }
    }

    pub fn keypoint(&self, index: KeypointIndex) -> &Keypoint {
        &self.keypoints[index as usize]
    }

    /// True iff all confidences lie in `[0, 1]`.
    pub fn is_valid(&self) -> bool {
        validate_pose(&self.keypoints)
    }

    /// The pose with every left/right keypoint pair exchanged.
    pub fn swapped_lr(&self) -> Self {
        let mut keypoints = self.keypoints.clone();
        for (l, r) in LR_PAIRS {
            keypoints.swap(l, r);
        }
        Self { keypoints }
    }

    /// Mean L2 distance over keypoints visible in both poses, or `None`
    /// when fewer than `min_shared` keypoints are shared.
    pub fn mean_distance(&self, other: &Pose2D, min_shared: usize) -> Option<f64> {
        let mut sum = 0.0;
        let mut shared = 0usize;
        for (a, b) in self.keypoints.iter().zip(other.keypoints.iter()) {
            if a.visible && b.visible {
                sum += (a.position() - b.position()).norm();
                shared += 1;
            }
        }
        if shared >= min_shared && shared > 0 {
            Some(sum / shared as f64)
        } else {
            None
        }
    }

    /// Tight square over visible keypoints, inflated by `inflate` (fraction
    /// of the side). `None` when no keypoint is visible.
    pub fn tight_square_bbox(&self, inflate: f64) -> Option<BoundingBox> {
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        let mut min_v = f64::INFINITY;
        let mut max_v = f64::NEG_INFINITY;
        let mut any = false;
        for k in &self.keypoints {
            if k.visible {
                min_u = min_u.min(k.u);
                max_u = max_u.max(k.u);
                min_v = min_v.min(k.v);
                max_v = max_v.max(k.v);
                any = true;
            }
        }
        if !any {
            return None;
        }
        let side = (max_u - min_u).max(max_v - min_v) * (1.0 + inflate);
        let cu = 0.5 * (min_u + max_u);
        let cv = 0.5 * (min_v + max_v);
        Some(BoundingBox {
            u_min: cu - 0.5 * side,
            v_min: cv - 0.5 * side,
            side,
        })
    }
}

/// True iff `keypoints` has exactly 17 entries with confidences in `[0, 1]`.
pub fn validate_pose(keypoints: &[Keypoint]) -> bool {
    keypoints.len() == NUM_KEYPOINTS
        && keypoints
            .iter()
            .all(|k| k.confidence >= 0.0 && k.confidence <= 1.0 && k.confidence.is_finite())
}

/// Tight square region containing a detected pose, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub u_min: f64,
    pub v_min: f64,
    pub side: f64,
}

impl BoundingBox {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_min + self.side && v >= self.v_min && v <= self.v_min + self.side
    }
}

/// One person's detection in one camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseDetection {
    pub camera_id: CameraId,
    pub t: FrameTime,
    pub pose: Pose2D,
    pub bbox: BoundingBox,
    /// Chest facing direction relative to the camera viewpoint, degrees in
    /// `[0, 360)`. This is the interface where a learned orientation model
    /// plugs in; the simulator supplies it.
    pub orientation_cam_deg: Option<f64>,
}

/// A fused (location, orientation) sample in site coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldObservation {
    pub t: FrameTime,
    /// Location in meters, site frame.
    pub location: Vec2,
    /// Unit facing direction in the site frame, when any contributing view
    /// carried one.
    pub orientation: Option<UnitVec2>,
    pub source_cameras: BTreeSet<CameraId>,
    /// Sum of the merge weights (1 / clamped squared camera distance).
    pub weight_mass: f64,
}

/// Lifecycle of a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    /// Updated by an observation at its latest step.
    Active,
    /// Advanced by prediction only at its latest step.
    Coasting,
    /// Terminated; its state sequence is final (and smoothed).
    Finished,
}

/// Per-timestep state of a track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub t: FrameTime,
    /// Position in meters, site frame.
    pub position: Vec2,
    /// Velocity in m/s.
    pub velocity: Vec2,
    /// Unit chest facing direction.
    pub orientation: UnitVec2,
    /// Per-second change of the orientation vector.
    pub angular_velocity: Vec2,
    /// Position/velocity covariance, `[x, y, vx, vy]` ordering.
    pub covariance: Matrix4<f64>,
    /// False when this step was coasted (no observation consumed).
    pub observed: bool,
}

/// A persistent identity with a contiguous per-second state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub track_id: u64,
    pub states: Vec<TrackState>,
    pub status: TrackStatus,
}

impl Track {
    pub fn first_t(&self) -> Option<FrameTime> {
        self.states.first().map(|s| s.t)
    }

    pub fn last_t(&self) -> Option<FrameTime> {
        self.states.last().map(|s| s.t)
    }

    pub fn state_at(&self, t: FrameTime) -> Option<&TrackState> {
        let first = self.first_t()?;
        if t < first {
            return None;
        }
        self.states.get((t - first) as usize)
    }
}

/// One annotated ground-truth sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub t: FrameTime,
    pub person_id: PersonId,
    /// Location in meters, site frame.
    pub location: Vec2,
    /// Facing direction, degrees clockwise from north in `[0, 360)`.
    pub orientation_deg: f64,
    pub area_id: Option<String>,
}

/// Converts degrees clockwise from north into a site-frame unit vector.
pub fn deg_to_unit(deg: f64) -> UnitVec2 {
    let rad = deg.to_radians();
    Unit::new_normalize(Vec2::new(rad.sin(), rad.cos()))
}

/// Converts a site-frame direction into degrees clockwise from north,
/// normalized to `[0, 360)`.
pub fn vec_to_deg(v: &Vec2) -> f64 {
    let deg = v.x.atan2(v.y).to_degrees();
    deg.rem_euclid(360.0)
}

/// Normalizes an angle in degrees to `[0, 360)`.
pub fn wrap_deg(deg: f64) -> f64 {
    deg.rem_euclid(360.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kp(u: f64, v: f64) -> Keypoint {
        Keypoint::new(u, v, 0.5, true)
    }

    fn uniform_pose(conf: f64) -> Pose2D {
        Pose2D::new(core::array::from_fn(|i| {
            Keypoint::new(i as f64, i as f64, conf, true)
        }))
    }

    #[test]
    fn validate_pose_well_formed() {
        let pose = uniform_pose(0.5);
        assert!(validate_pose(&pose.keypoints));
        assert!(pose.is_valid());
    }

    #[test]
    fn validate_pose_wrong_length() {
        let pose = uniform_pose(0.5);
        assert!(!validate_pose(&pose.keypoints[..16]));
    }

    #[test]
    fn validate_pose_confidence_out_of_range() {
        let mut pose = uniform_pose(0.5);
        pose.keypoints[4].confidence = 1.2;
        assert!(!validate_pose(&pose.keypoints));
    }

    #[test]
    fn degree_vector_round_trip() {
        for deg in [0.0, 45.0, 90.0, 180.0, 270.0, 359.5] {
            let v = deg_to_unit(deg);
            assert_relative_eq!(vec_to_deg(&v), deg, epsilon = 1e-9);
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn north_is_plus_y_east_is_plus_x() {
        let north = deg_to_unit(0.0);
        assert_relative_eq!(north.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(north.y, 1.0, epsilon = 1e-12);
        let east = deg_to_unit(90.0);
        assert_relative_eq!(east.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(east.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn swapped_lr_exchanges_pairs() {
        let mut pose = uniform_pose(1.0);
        pose.keypoints[KeypointIndex::LeftAnkle as usize] = kp(10.0, 20.0);
        pose.keypoints[KeypointIndex::RightAnkle as usize] = kp(14.0, 20.0);
        let swapped = pose.swapped_lr();
        assert_eq!(swapped.keypoint(KeypointIndex::LeftAnkle).u, 14.0);
        assert_eq!(swapped.keypoint(KeypointIndex::RightAnkle).u, 10.0);
        assert_eq!(swapped.swapped_lr(), pose);
    }

    #[test]
    fn mean_distance_uses_shared_visible() {
        let mut a = uniform_pose(1.0);
        let mut b = uniform_pose(1.0);
        for i in 0..NUM_KEYPOINTS {
            a.keypoints[i] = kp(0.0, 0.0);
            b.keypoints[i] = kp(3.0, 4.0);
        }
        b.keypoints[0].visible = false;
        assert_relative_eq!(a.mean_distance(&b, 3).unwrap(), 5.0);
        for i in 0..NUM_KEYPOINTS - 2 {
            a.keypoints[i].visible = false;
        }
        // only 2 shared visible keypoints remain (index 0 hidden in b)
        assert!(a.mean_distance(&b, 3).is_none());
    }

    #[test]
    fn tight_square_contains_visible_keypoints() {
        let mut pose = uniform_pose(1.0);
        pose.keypoints[3] = kp(100.0, 50.0);
        let bbox = pose.tight_square_bbox(0.1).unwrap();
        for k in pose.keypoints.iter().filter(|k| k.visible) {
            assert!(bbox.contains(k.u, k.v));
        }
        assert!(bbox.side >= 100.0);
    }
}
