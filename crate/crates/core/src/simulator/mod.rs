//! Synthetic scenario generation: ground-truth trajectories, pinhole
//! ground-plane camera projection, and noise injection.
//!
//! Every acceptance property is checked against this module, so it aims at
//! exactness where the pipeline needs it (foot-point geometry, calibration
//! homographies, orientation bookkeeping) and minimal realism elsewhere.
//! All randomness flows from the scenario seed through one ChaCha stream;
//! identical inputs produce byte-identical outputs.

pub mod scenarios;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{CameraModel, GeometryError, Homography};
use crate::model::{
    deg_to_unit, vec_to_deg, wrap_deg, CameraId, FrameTime, GroundTruthRecord, Keypoint, PersonId,
    Pose2D, PoseDetection, Vec2, NUM_KEYPOINTS,
};

/// People rarely walk faster than this, m/s.
pub const MAX_WALKING_SPEED: f64 = 1.42;

/// Height of the synthetic skeleton, meters.
pub const PERSON_HEIGHT_M: f64 = 1.7;

/// Canonical standing skeleton in COCO order: (lateral offset, height)
/// as fractions of the person height, feet at zero. The ankle midpoint is
/// exactly the anchor, so foot-point localization is exact on clean data.
pub const SKELETON_TEMPLATE: [(f64, f64); NUM_KEYPOINTS] = [
    (0.00, 0.93),  // nose
    (0.03, 0.95),  // left eye
    (-0.03, 0.95), // right eye
    (0.05, 0.93),  // left ear
    (-0.05, 0.93), // right ear
    (0.11, 0.80),  // left shoulder
    (-0.11, 0.80), // right shoulder
    (0.13, 0.65),  // left elbow
    (-0.13, 0.65), // right elbow
    (0.14, 0.50),  // left wrist
    (-0.14, 0.50), // right wrist
    (0.07, 0.52),  // left hip
    (-0.07, 0.52), // right hip
    (0.07, 0.28),  // left knee
    (-0.07, 0.28), // right knee
    (0.06, 0.00),  // left ankle
    (-0.06, 0.00), // right ankle
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("person '{person}' waypoint ({x}, {y}) lies outside the site")]
    WaypointOutsideSite { person: PersonId, x: f64, y: f64 },
    #[error("person '{person}' speed {speed} outside (0, {MAX_WALKING_SPEED}]")]
    InvalidSpeed { person: PersonId, speed: f64 },
    #[error("camera '{camera}': {source}")]
    CameraSynthesis {
        camera: CameraId,
        source: GeometryError,
    },
}

/// Scripted motion of one simulated person.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonScript {
    pub person_id: PersonId,
    /// Piecewise-linear path, walked at constant speed. A single waypoint
    /// (with an orientation script) stands in place.
    pub waypoints: Vec<Vec2>,
    /// Walking speed, m/s.
    pub speed: f64,
    pub start_t: FrameTime,
    /// Orientation per second while standing in place, degrees clockwise
    /// from north. Only used when the path has no extent.
    pub stationary_orientations_deg: Option<Vec<f64>>,
}

/// Pinhole parameters a synthetic camera is built from. The field of view
/// follows from the focal length and image size.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraSynthParams {
    pub camera_id: CameraId,
    /// Ground position, meters.
    pub position: Vec2,
    pub mount_height: f64,
    /// Viewing direction, degrees clockwise from north.
    pub yaw_deg: f64,
    /// Downward tilt from horizontal, degrees.
    pub pitch_deg: f64,
    pub focal_px: f64,
    pub image_size: (f64, f64),
    pub max_range: f64,
}

/// Noise injected into clean projections.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Gaussian jitter on every keypoint coordinate, pixels.
    pub keypoint_sigma_px: f64,
    /// Base probability of dropping a detection.
    pub fn_base_prob: f64,
    /// Additional drop probability per meter of camera distance.
    pub fn_distance_slope: f64,
    /// Probability of swapping all left/right keypoints in a frame.
    pub flip_prob: f64,
    /// Stationary fake tracks per camera, alive for the full duration.
    pub ghost_count: usize,
    /// Wrapped Gaussian perturbation of the camera-frame orientation,
    /// degrees.
    pub orientation_sigma_deg: f64,
    /// Per-camera world-frame localization bias, applied at projection.
    pub localization_bias: BTreeMap<CameraId, Vec2>,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            keypoint_sigma_px: 0.0,
            fn_base_prob: 0.0,
            fn_distance_slope: 0.0,
            flip_prob: 0.0,
            ghost_count: 0,
            orientation_sigma_deg: 0.0,
            localization_bias: BTreeMap::new(),
        }
    }

    pub fn is_none(&self) -> bool {
        self.keypoint_sigma_px == 0.0
            && self.fn_base_prob == 0.0
            && self.fn_distance_slope == 0.0
            && self.flip_prob == 0.0
            && self.ghost_count == 0
            && self.orientation_sigma_deg == 0.0
            && self.localization_bias.is_empty()
    }
}

/// A complete synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Site rectangle (width, height), meters; the origin is a corner.
    pub site: (f64, f64),
    pub persons: Vec<PersonScript>,
    pub cameras: Vec<CameraSynthParams>,
    pub noise: NoiseSpec,
    /// Last frame index, inclusive.
    pub duration: FrameTime,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        for person in &self.persons {
            if person.speed <= 0.0 || person.speed > MAX_WALKING_SPEED {
                return Err(SimError::InvalidSpeed {
                    person: person.person_id.clone(),
                    speed: person.speed,
                });
            }
            for w in &person.waypoints {
                if w.x < 0.0 || w.x > self.site.0 || w.y < 0.0 || w.y > self.site.1 {
                    return Err(SimError::WaypointOutsideSite {
                        person: person.person_id.clone(),
                        x: w.x,
                        y: w.y,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Samples 1 Hz ground-truth records for every scripted person.
///
/// Walking persons move along their waypoint chain at constant speed with
/// the heading as orientation; a person with no path extent follows their
/// orientation script in place. Records stop at path completion (or script
/// end) and never exceed the scenario duration.
pub fn synthesize_trajectories(scenario: &Scenario) -> Result<Vec<GroundTruthRecord>, SimError> {
    scenario.validate()?;
    let mut records = Vec::new();
    for person in &scenario.persons {
        // collapse zero-length segments
        let mut points: Vec<Vec2> = Vec::new();
        for w in &person.waypoints {
            if points.last().map_or(true, |p| (p - w).norm() > 1e-12) {
                points.push(*w);
            }
        }
        if points.len() <= 1 {
            let location = points.first().copied().unwrap_or(Vec2::zeros());
            let script = person
                .stationary_orientations_deg
                .clone()
                .unwrap_or_else(|| alloc::vec![0.0]);
            for (k, &deg) in script.iter().enumerate() {
                let t = person.start_t + k as FrameTime;
                if t > scenario.duration {
                    break;
                }
                records.push(GroundTruthRecord {
                    t,
                    person_id: person.person_id.clone(),
                    location,
                    orientation_deg: wrap_deg(deg),
                    area_id: None,
                });
            }
            continue;
        }

        let seg_lengths: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = seg_lengths.iter().sum();
        let steps = ((total / person.speed) + 1e-9).floor() as u64;
        for k in 0..=steps {
            let t = person.start_t + k;
            if t > scenario.duration {
                break;
            }
            let arc = (person.speed * k as f64).min(total);
            let (location, heading) = point_at_arc(&points, &seg_lengths, arc);
            records.push(GroundTruthRecord {
                t,
                person_id: person.person_id.clone(),
                location,
                orientation_deg: vec_to_deg(&heading),
                area_id: None,
            });
        }
    }
    records.sort_by(|a, b| (a.t, &a.person_id).cmp(&(b.t, &b.person_id)));
    Ok(records)
}

/// Position and heading at arc length `s` along a polyline. At interior
/// joints the outgoing segment's heading wins; the final point keeps the
/// incoming heading.
fn point_at_arc(points: &[Vec2], seg_lengths: &[f64], s: f64) -> (Vec2, Vec2) {
    let mut remaining = s;
    for (i, &len) in seg_lengths.iter().enumerate() {
        let dir = (points[i + 1] - points[i]) / len;
        if remaining < len || i == seg_lengths.len() - 1 {
            let clamped = remaining.min(len);
            return (points[i] + clamped * dir, dir);
        }
        remaining -= len;
    }
    unreachable!("arc length clamped to total");
}

/// A synthesized camera: pinhole parameters plus the derived homographies
/// and the exported calibration model.
#[derive(Debug, Clone)]
pub struct SynthCamera {
    pub params: CameraSynthParams,
    /// Exported calibration ground truth (pixel -> world homography).
    pub model: CameraModel,
    world_to_pixel: Homography,
    right: Vector3<f64>,
    up: Vector3<f64>,
    forward: Vector3<f64>,
    center: Vector3<f64>,
}

impl SynthCamera {
    pub fn new(params: CameraSynthParams) -> Result<Self, SimError> {
        let wrap = |source: GeometryError| SimError::CameraSynthesis {
            camera: params.camera_id.clone(),
            source,
        };
        let yaw = params.yaw_deg.to_radians();
        let pitch = params.pitch_deg.to_radians();
        let (sy, cy) = (yaw.sin(), yaw.cos());
        let (sp, cp) = (pitch.sin(), pitch.cos());
        // site frame: x east, y north, z up; yaw clockwise from north
        let forward = Vector3::new(sy * cp, cy * cp, -sp);
        let right = Vector3::new(cy, -sy, 0.0);
        let up = right.cross(&forward);
        let center = Vector3::new(params.position.x, params.position.y, params.mount_height);

        let (w, h) = params.image_size;
        let (cx, cv) = (w * 0.5, h * 0.5);
        let f = params.focal_px;
        // ground plane (z = 0) restriction of the pinhole projection
        let extrinsic = Matrix3::new(
            right.x,
            right.y,
            -right.dot(&center),
            up.x,
            up.y,
            -up.dot(&center),
            forward.x,
            forward.y,
            -forward.dot(&center),
        );
        let intrinsic = Matrix3::new(f, 0.0, cx, 0.0, -f, cv, 0.0, 0.0, 1.0);
        let world_to_pixel = Homography::from_matrix(intrinsic * extrinsic).map_err(wrap)?;
        let pixel_to_world = world_to_pixel.inverse().map_err(wrap)?;

        let hfov_deg = 2.0 * ((w * 0.5) / f).atan().to_degrees();
        let vfov_deg = 2.0 * ((h * 0.5) / f).atan().to_degrees();
        let model = CameraModel {
            camera_id: params.camera_id.clone(),
            position: params.position,
            mount_height: params.mount_height,
            yaw_deg: params.yaw_deg,
            hfov_deg,
            vfov_deg,
            homography: pixel_to_world,
            image_size: params.image_size,
            max_range: params.max_range,
        };
        Ok(Self {
            params,
            model,
            world_to_pixel,
            right,
            up,
            forward,
            center,
        })
    }

    /// Camera-frame coordinates (right, up, depth) of a ground point.
    fn camera_coords(&self, ground: Vec2) -> Vector3<f64> {
        let d = Vector3::new(ground.x, ground.y, 0.0) - self.center;
        Vector3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    /// True when a ground anchor is inside the viewing cone and range.
    pub fn sees(&self, ground: Vec2) -> bool {
        let c = self.camera_coords(ground);
        if c.z <= 0.0 {
            return false;
        }
        let (w, h) = self.params.image_size;
        let half_h = ((w * 0.5) / self.params.focal_px).atan();
        let half_v = ((h * 0.5) / self.params.focal_px).atan();
        let theta_h = c.x.atan2(c.z);
        let theta_v = c.y.atan2(c.z);
        theta_h.abs() <= half_h
            && theta_v.abs() <= half_v
            && (ground - self.params.position).norm() <= self.params.max_range
    }
}

/// A simulated detection plus the oracle identity that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDetection {
    pub detection: PoseDetection,
    pub person_id: PersonId,
    /// Ground distance between person and camera at projection time, m.
    pub camera_distance: f64,
}

/// Projects one ground-truth record into one camera, noiselessly.
///
/// The anchor (optionally shifted by a world-frame `bias`) maps through the
/// synthesized world -> pixel homography; the skeleton template hangs from
/// that foot pixel, scaled inversely with depth. Returns `None` when the
/// anchor is behind the camera, outside the field of view, or out of range.
pub fn project_to_camera(
    cam: &SynthCamera,
    record: &GroundTruthRecord,
    bias: Vec2,
) -> Option<SimDetection> {
    let anchor = record.location + bias;
    if !cam.sees(anchor) {
        return None;
    }
    let coords = cam.camera_coords(anchor);
    let foot = crate::geometry::apply_homography(
        &cam.world_to_pixel,
        Vec2::new(anchor.x, anchor.y),
    )
    .ok()?;

    let orientation_cam_deg = wrap_deg(record.orientation_deg - cam.params.yaw_deg);
    let scale = cam.params.focal_px * PERSON_HEIGHT_M / coords.z;
    let facing_shift = 0.04 * scale * orientation_cam_deg.to_radians().sin();

    let keypoints: [Keypoint; NUM_KEYPOINTS] = core::array::from_fn(|i| {
        let (lateral, height) = SKELETON_TEMPLATE[i];
        let mut u = foot.x + lateral * scale;
        if i == 0 {
            u += facing_shift;
        }
        let v = foot.y - height * scale;
        Keypoint::new(u, v, 1.0, true)
    });
    let pose = Pose2D::new(keypoints);
    let bbox = pose
        .tight_square_bbox(0.0)
        .expect("template keypoints are visible");
    Some(SimDetection {
        detection: PoseDetection {
            camera_id: cam.params.camera_id.clone(),
            t: record.t,
            pose,
            bbox,
            orientation_cam_deg: Some(orientation_cam_deg),
        },
        person_id: record.person_id.clone(),
        camera_distance: (record.location - cam.params.position).norm(),
    })
}

/// One discrete noise event, recorded for oracle-based tests.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseEvent {
    Dropped {
        t: FrameTime,
        camera_id: CameraId,
        person_id: PersonId,
    },
    Flipped {
        t: FrameTime,
        camera_id: CameraId,
        person_id: PersonId,
    },
    GhostSpawned {
        camera_id: CameraId,
        ghost_id: PersonId,
    },
}

/// Applies the noise model to clean detections.
///
/// Gaussian keypoint jitter, distance-dependent drops, left/right flips,
/// per-camera stationary ghosts, and wrapped-Gaussian orientation noise.
/// The returned ledger records every discrete event (drop, flip, ghost).
/// The random stream consumes a fixed number of draws per detection, so
/// identical `(input, spec, seed)` produce identical output.
pub fn inject_noise(
    detections: &[SimDetection],
    spec: &NoiseSpec,
    seed: u64,
    cameras: &[SynthCamera],
    duration: FrameTime,
) -> (Vec<SimDetection>, Vec<NoiseEvent>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut ledger = Vec::new();

    // ghosts first: placement draws are independent of the detections
    for cam in cameras {
        let (w, h) = cam.params.image_size;
        for k in 0..spec.ghost_count {
            let ghost_id: PersonId = format!("ghost:{}:{k}", cam.params.camera_id);
            let anchor_u = rng.random_range(w * 0.2..w * 0.8);
            let anchor_v = rng.random_range(h * 0.4..h * 0.9);
            let scale = rng.random_range(60.0..160.0);
            let keypoints: [Keypoint; NUM_KEYPOINTS] = core::array::from_fn(|i| {
                let (lateral, height) = SKELETON_TEMPLATE[i];
                Keypoint::new(anchor_u + lateral * scale, anchor_v - height * scale, 1.0, true)
            });
            let pose = Pose2D::new(keypoints);
            let bbox = pose.tight_square_bbox(0.0).expect("visible keypoints");
            ledger.push(NoiseEvent::GhostSpawned {
                camera_id: cam.params.camera_id.clone(),
                ghost_id: ghost_id.clone(),
            });
            for t in 0..=duration {
                out.push(SimDetection {
                    detection: PoseDetection {
                        camera_id: cam.params.camera_id.clone(),
                        t,
                        pose: pose.clone(),
                        bbox,
                        orientation_cam_deg: None,
                    },
                    person_id: ghost_id.clone(),
                    camera_distance: 0.0,
                });
            }
        }
    }

    let jitter = Normal::new(0.0, spec.keypoint_sigma_px.max(1e-300)).unwrap();
    let ori_noise = Normal::new(0.0, spec.orientation_sigma_deg.max(1e-300)).unwrap();
    for sim in detections {
        // fixed draw schedule per detection
        let u_drop: f64 = rng.random();
        let u_flip: f64 = rng.random();
        let mut offsets = [0.0f64; 2 * NUM_KEYPOINTS];
        for slot in offsets.iter_mut() {
            *slot = jitter.sample(&mut rng);
        }
        let ori_offset = ori_noise.sample(&mut rng);

        let drop_prob =
            (spec.fn_base_prob + spec.fn_distance_slope * sim.camera_distance).clamp(0.0, 1.0);
        if u_drop < drop_prob {
            ledger.push(NoiseEvent::Dropped {
                t: sim.detection.t,
                camera_id: sim.detection.camera_id.clone(),
                person_id: sim.person_id.clone(),
            });
            continue;
        }

        let mut det = sim.detection.clone();
        if spec.keypoint_sigma_px > 0.0 {
            for (i, k) in det.pose.keypoints.iter_mut().enumerate() {
                k.u += offsets[2 * i];
                k.v += offsets[2 * i + 1];
            }
        }
        if u_flip < spec.flip_prob {
            det.pose = det.pose.swapped_lr();
            ledger.push(NoiseEvent::Flipped {
                t: det.t,
                camera_id: det.camera_id.clone(),
                person_id: sim.person_id.clone(),
            });
        }
        if spec.orientation_sigma_deg > 0.0 {
            if let Some(deg) = det.orientation_cam_deg.as_mut() {
                *deg = wrap_deg(*deg + ori_offset);
            }
        }
        if let Some(bbox) = det.pose.tight_square_bbox(0.0) {
            det.bbox = bbox;
        }
        out.push(det_with(sim, det));
    }

    out.sort_by(|a, b| {
        (a.detection.t, &a.detection.camera_id, &a.person_id).cmp(&(
            b.detection.t,
            &b.detection.camera_id,
            &b.person_id,
        ))
    });
    (out, ledger)
}

fn det_with(sim: &SimDetection, detection: PoseDetection) -> SimDetection {
    SimDetection {
        detection,
        person_id: sim.person_id.clone(),
        camera_distance: sim.camera_distance,
    }
}

/// Everything one simulation run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub ground_truth: Vec<GroundTruthRecord>,
    /// Exported calibration ground truth per camera.
    pub cameras: Vec<CameraModel>,
    /// Noisy detections (equals `clean_detections` under a no-op spec).
    pub detections: Vec<SimDetection>,
    /// Pre-noise projections, for oracle tests.
    pub clean_detections: Vec<SimDetection>,
    pub ledger: Vec<NoiseEvent>,
}

/// Runs the full simulation: trajectories, projection, noise.
pub fn simulate(scenario: &Scenario) -> Result<SimOutput, SimError> {
    let ground_truth = synthesize_trajectories(scenario)?;
    let cameras: Vec<SynthCamera> = scenario
        .cameras
        .iter()
        .map(|p| SynthCamera::new(p.clone()))
        .collect::<Result<_, _>>()?;

    let mut clean: Vec<SimDetection> = Vec::new();
    for record in &ground_truth {
        for cam in &cameras {
            let bias = scenario
                .noise
                .localization_bias
                .get(&cam.params.camera_id)
                .copied()
                .unwrap_or_else(Vec2::zeros);
            if let Some(det) = project_to_camera(cam, record, bias) {
                clean.push(det);
            }
        }
    }
    clean.sort_by(|a, b| {
        (a.detection.t, &a.detection.camera_id, &a.person_id).cmp(&(
            b.detection.t,
            &b.detection.camera_id,
            &b.person_id,
        ))
    });

    let (detections, ledger) = if scenario.noise.is_none() {
        (clean.clone(), Vec::new())
    } else {
        inject_noise(&clean, &scenario.noise, scenario.seed, &cameras, scenario.duration)
    };

    Ok(SimOutput {
        ground_truth,
        cameras: cameras.into_iter().map(|c| c.model).collect(),
        detections,
        clean_detections: clean,
        ledger,
    })
}

/// Builds world observations straight from ground truth with Gaussian
/// position noise and independent drops: the tracker-level test harness,
/// bypassing cameras entirely.
pub fn noisy_world_observations(
    ground_truth: &[GroundTruthRecord],
    sigma_m: f64,
    drop_prob: f64,
    seed: u64,
) -> Vec<crate::model::WorldObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma_m.max(1e-300)).unwrap();
    let mut out = Vec::new();
    for record in ground_truth {
        let u: f64 = rng.random();
        let dx = noise.sample(&mut rng);
        let dy = noise.sample(&mut rng);
        if u < drop_prob {
            continue;
        }
        let mut cameras = alloc::collections::BTreeSet::new();
        cameras.insert(String::from("synthetic"));
        out.push(crate::model::WorldObservation {
            t: record.t,
            location: record.location + Vec2::new(if sigma_m > 0.0 { dx } else { 0.0 }, if sigma_m > 0.0 { dy } else { 0.0 }),
            orientation: Some(deg_to_unit(record.orientation_deg)),
            source_cameras: cameras,
            weight_mass: 1.0,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn overhead_camera() -> SynthCamera {
        SynthCamera::new(CameraSynthParams {
            camera_id: "cam0".into(),
            position: Vec2::new(0.0, 0.0),
            mount_height: 3.0,
            yaw_deg: 0.0,
            pitch_deg: 25.0,
            focal_px: 300.0,
            image_size: (640.0, 480.0),
            max_range: 30.0,
        })
        .unwrap()
    }

    fn walk_scenario() -> Scenario {
        Scenario {
            site: (20.0, 20.0),
            persons: vec![PersonScript {
                person_id: "p0".into(),
                waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)],
                speed: 1.0,
                start_t: 0,
                stationary_orientations_deg: None,
            }],
            cameras: vec![],
            noise: NoiseSpec::none(),
            duration: 60,
            seed: 1,
        }
    }

    #[test]
    fn straight_line_trajectory() {
        let records = synthesize_trajectories(&walk_scenario()).unwrap();
        assert_eq!(records.len(), 11);
        for (k, r) in records.iter().enumerate() {
            assert_eq!(r.t, k as FrameTime);
            assert_relative_eq!(r.location.x, k as f64, epsilon = 1e-12);
            assert_relative_eq!(r.location.y, 0.0, epsilon = 1e-12);
            // walking east: 90 degrees clockwise from north
            assert_relative_eq!(r.orientation_deg, 90.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn max_speed_traversal_steps() {
        let mut scenario = walk_scenario();
        scenario.persons[0].speed = 1.42;
        scenario.persons[0].waypoints = vec![Vec2::new(0.0, 0.0), Vec2::new(14.2, 0.0)];
        let records = synthesize_trajectories(&scenario).unwrap();
        // 14.2 m at 1.42 m/s: 10 steps to traverse, 11 records
        assert_eq!(records.len(), 11);
        assert_relative_eq!(records.last().unwrap().location.x, 14.2, epsilon = 1e-9);
    }

    #[test]
    fn stationary_script() {
        let mut scenario = walk_scenario();
        scenario.persons[0].waypoints = vec![Vec2::new(3.0, 4.0)];
        scenario.persons[0].stationary_orientations_deg = Some(vec![0.0, 45.0, 90.0]);
        let records = synthesize_trajectories(&scenario).unwrap();
        assert_eq!(records.len(), 3);
        for (r, deg) in records.iter().zip([0.0, 45.0, 90.0]) {
            assert_relative_eq!(r.location, Vec2::new(3.0, 4.0));
            assert_relative_eq!(r.orientation_deg, deg);
        }
    }

    #[test]
    fn waypoint_outside_site_rejected() {
        let mut scenario = walk_scenario();
        scenario.persons[0].waypoints = vec![Vec2::new(-1.0, 0.0), Vec2::new(5.0, 0.0)];
        assert!(matches!(
            synthesize_trajectories(&scenario),
            Err(SimError::WaypointOutsideSite { .. })
        ));
    }

    #[test]
    fn speed_out_of_bounds_rejected() {
        let mut scenario = walk_scenario();
        scenario.persons[0].speed = 1.5;
        assert!(matches!(
            synthesize_trajectories(&scenario),
            Err(SimError::InvalidSpeed { .. })
        ));
    }

    fn record_at(x: f64, y: f64, deg: f64) -> GroundTruthRecord {
        GroundTruthRecord {
            t: 0,
            person_id: "p0".into(),
            location: Vec2::new(x, y),
            orientation_deg: deg,
            area_id: None,
        }
    }

    #[test]
    fn on_axis_person_centered_horizontally() {
        let cam = overhead_camera();
        // camera looks north: a person straight ahead sits on the optical axis
        let det = project_to_camera(&cam, &record_at(0.0, 8.0, 180.0), Vec2::zeros()).unwrap();
        let foot = geometry::foot_point(&det.detection.pose).unwrap();
        assert_relative_eq!(foot.x, 320.0, epsilon = 1e-9);
        let factors = geometry::geometry_factors(
            &cam.model,
            Vec2::new(0.0, 8.0),
            deg_to_unit(180.0),
            foot,
        );
        assert!(factors.h_norm < 1e-9);
        assert_relative_eq!(factors.facing_angle_deg, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn person_behind_camera_absent() {
        let cam = overhead_camera();
        assert!(project_to_camera(&cam, &record_at(0.0, -5.0, 0.0), Vec2::zeros()).is_none());
    }

    #[test]
    fn person_beyond_range_absent() {
        let mut params = overhead_camera().params;
        params.max_range = 6.0;
        params.pitch_deg = 10.0;
        let cam = SynthCamera::new(params).unwrap();
        assert!(project_to_camera(&cam, &record_at(0.0, 8.0, 0.0), Vec2::zeros()).is_none());
    }

    #[test]
    fn foot_pixel_round_trips_through_exported_calibration() {
        let cam = overhead_camera();
        for (x, y) in [(0.0, 6.0), (1.5, 9.0), (-2.0, 12.0), (0.7, 4.5)] {
            let Some(det) = project_to_camera(&cam, &record_at(x, y, 45.0), Vec2::zeros()) else {
                continue;
            };
            let foot = geometry::foot_point(&det.detection.pose).unwrap();
            let world = cam.model.localize(foot).unwrap();
            assert!(
                (world - Vec2::new(x, y)).norm() < 1e-6,
                "({x}, {y}) -> {world:?}"
            );
        }
    }

    #[test]
    fn orientation_cam_relative_to_yaw() {
        let mut params = overhead_camera().params;
        params.yaw_deg = 90.0;
        let cam = SynthCamera::new(params).unwrap();
        let det = project_to_camera(&cam, &record_at(8.0, 0.0, 120.0), Vec2::zeros()).unwrap();
        assert_relative_eq!(det.detection.orientation_cam_deg.unwrap(), 30.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_scale_shrinks_with_distance() {
        let cam = overhead_camera();
        let near = project_to_camera(&cam, &record_at(0.0, 5.0, 0.0), Vec2::zeros()).unwrap();
        let far = project_to_camera(&cam, &record_at(0.0, 15.0, 0.0), Vec2::zeros()).unwrap();
        assert!(near.detection.bbox.side > far.detection.bbox.side);
    }

    /// Walks straight up the overhead camera's optical axis.
    fn camera_walk_scenario() -> Scenario {
        let mut scenario = walk_scenario();
        scenario.persons[0].waypoints = vec![Vec2::new(0.0, 5.0), Vec2::new(0.0, 15.0)];
        scenario.cameras = vec![overhead_camera().params];
        scenario
    }

    #[test]
    fn noop_noise_is_identity() {
        let scenario = camera_walk_scenario();
        let out = simulate(&scenario).unwrap();
        assert_eq!(out.detections, out.clean_detections);
        assert!(out.ledger.is_empty());
        assert!(!out.detections.is_empty());
    }

    #[test]
    fn full_drop_rate_removes_everything() {
        let mut scenario = camera_walk_scenario();
        scenario.noise.fn_base_prob = 1.0;
        let out = simulate(&scenario).unwrap();
        assert!(out.detections.is_empty());
        assert_eq!(out.ledger.len(), out.clean_detections.len());
    }

    #[test]
    fn flip_count_concentrates_and_ledger_exact() {
        // 1000 frames of a stationary-ish subject in view
        let scenario = Scenario {
            site: (20.0, 20.0),
            persons: vec![PersonScript {
                person_id: "p0".into(),
                waypoints: vec![Vec2::new(0.0, 8.0)],
                speed: 1.0,
                start_t: 0,
                stationary_orientations_deg: Some(vec![180.0; 1000]),
            }],
            cameras: vec![overhead_camera().params],
            noise: NoiseSpec {
                flip_prob: 0.3,
                ..NoiseSpec::none()
            },
            duration: 999,
            seed: 42,
        };
        let out = simulate(&scenario).unwrap();
        assert_eq!(out.clean_detections.len(), 1000);
        let flips = out
            .ledger
            .iter()
            .filter(|e| matches!(e, NoiseEvent::Flipped { .. }))
            .count();
        // Binomial(1000, 0.3): 3 sigma ~ 43.5
        assert!((256..=344).contains(&flips), "flips = {flips}");
        // ledger identifies exactly the flipped frames
        for (sim, clean) in out.detections.iter().zip(out.clean_detections.iter()) {
            let was_flipped = out.ledger.iter().any(|e| {
                matches!(e, NoiseEvent::Flipped { t, person_id, .. }
                    if *t == sim.detection.t && *person_id == sim.person_id)
            });
            let differs = sim.detection.pose != clean.detection.pose;
            assert_eq!(was_flipped, differs);
        }
    }

    #[test]
    fn ghosts_alive_full_duration() {
        let mut scenario = camera_walk_scenario();
        scenario.noise.ghost_count = 2;
        scenario.duration = 30;
        let out = simulate(&scenario).unwrap();
        let ghost_frames = out
            .detections
            .iter()
            .filter(|d| d.person_id.starts_with("ghost:"))
            .count();
        assert_eq!(ghost_frames, 2 * 31);
        // ghosts are perfectly stationary
        let mut by_ghost: BTreeMap<&str, Vec<&SimDetection>> = BTreeMap::new();
        for d in &out.detections {
            if d.person_id.starts_with("ghost:") {
                by_ghost.entry(&d.person_id).or_default().push(d);
            }
        }
        for frames in by_ghost.values() {
            for pair in frames.windows(2) {
                assert_eq!(pair[0].detection.pose, pair[1].detection.pose);
            }
        }
    }

    #[test]
    fn deterministic_for_identical_seeds() {
        let mut scenario = camera_walk_scenario();
        scenario.noise = NoiseSpec {
            keypoint_sigma_px: 2.0,
            fn_base_prob: 0.1,
            fn_distance_slope: 0.005,
            flip_prob: 0.2,
            ghost_count: 1,
            orientation_sigma_deg: 10.0,
            localization_bias: BTreeMap::new(),
        };
        let a = simulate(&scenario).unwrap();
        let b = simulate(&scenario).unwrap();
        assert_eq!(a.detections, b.detections);
        assert_eq!(a.ledger, b.ledger);

        scenario.seed = 43;
        let c = simulate(&scenario).unwrap();
        assert_ne!(a.detections, c.detections);
    }

    #[test]
    fn localization_bias_shifts_world_anchor() {
        let cam = overhead_camera();
        let unbiased = project_to_camera(&cam, &record_at(0.0, 8.0, 0.0), Vec2::zeros()).unwrap();
        let biased =
            project_to_camera(&cam, &record_at(0.0, 8.0, 0.0), Vec2::new(0.5, 0.0)).unwrap();
        let w0 = cam
            .model
            .localize(geometry::foot_point(&unbiased.detection.pose).unwrap())
            .unwrap();
        let w1 = cam
            .model
            .localize(geometry::foot_point(&biased.detection.pose).unwrap())
            .unwrap();
        assert_relative_eq!((w1 - w0).norm(), 0.5, epsilon = 1e-6);
    }
}
