//! Multi-view integration: merging duplicate cross-camera samples into
//! single world observations.
//!
//! Overlapping cameras report the same person at slightly different
//! locations. Samples at one timestep form a graph whose edges join
//! nearby samples from *different* cameras; each connected component is one
//! person, integrated by weighting every sample with the inverse of its
//! (clamped) squared camera distance so that far views count less.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::geometry::{self, CameraModel, GeometryError};
use crate::model::{deg_to_unit, CameraId, FrameTime, PoseDetection, UnitVec2, Vec2, WorldObservation};
use crate::pose_preproc;

/// Default merge radius in meters, matched to the localization error
/// margin (people rarely walk faster than 1.42 m/s at 1 Hz).
pub const DEFAULT_MERGE_RADIUS_M: f64 = 1.5;

/// Default clamp for the squared camera distance, m^2. Bounds the weight
/// of a person standing directly under a camera.
pub const DEFAULT_DISTANCE_SQ_CLAMP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("cannot integrate an empty component")]
    EmptyComponent,
}

/// One localized sample from one camera at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSample {
    pub camera_id: CameraId,
    pub t: FrameTime,
    /// Site-frame location from the homography, meters.
    pub location: Vec2,
    /// Site-frame facing direction, when the view carried one.
    pub orientation: Option<UnitVec2>,
    /// Squared ground distance between the sample and its camera, m^2.
    pub camera_distance_sq: f64,
}

/// Undirected proximity graph over the samples of a single timestep.
#[derive(Debug, Clone)]
pub struct ProximityGraph {
    n: usize,
    /// Edges as (lower index, higher index); never joins samples that
    /// share a camera.
    pub edges: Vec<(usize, usize)>,
}

impl ProximityGraph {
    /// Builds a graph directly from an edge list (vertex indices must be
    /// below `vertex_count`).
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(a, b)| a < vertex_count && b < vertex_count));
        Self {
            n: vertex_count,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// Builds the duplicate-detection graph: an edge joins two samples iff
/// their cameras differ and their locations are within `radius` meters.
pub fn build_graph(samples: &[ViewSample], radius: f64) -> ProximityGraph {
    let mut edges = Vec::new();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if samples[i].camera_id == samples[j].camera_id {
                continue;
            }
            if (samples[i].location - samples[j].location).norm() <= radius {
                edges.push((i, j));
            }
        }
    }
    ProximityGraph {
        n: samples.len(),
        edges,
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn unite(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Partitions the graph vertices into connected components.
///
/// Components are ordered by their smallest vertex index, and indices
/// within a component are ascending, so the output is deterministic.
pub fn connected_components(g: &ProximityGraph) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(g.n);
    for &(a, b) in &g.edges {
        uf.unite(a, b);
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    for v in 0..g.n {
        let root = uf.find(v);
        by_root[root].push(v);
    }
    by_root.retain(|c| !c.is_empty());
    by_root.sort_by_key(|c| c[0]);
    by_root
}

/// Integrates one connected component into a single world observation.
///
/// Sample weights are `1 / max(camera_distance_sq, clamp)`. The location is
/// the weighted mean; the orientation is the renormalized weighted vector
/// sum over samples that carry one, falling back to the closest camera's
/// orientation when the sum nearly cancels.
pub fn integrate(cc: &[&ViewSample], distance_sq_clamp: f64) -> Result<WorldObservation, FusionError> {
    if cc.is_empty() {
        return Err(FusionError::EmptyComponent);
    }
    let t = cc[0].t;
    debug_assert!(cc.iter().all(|s| s.t == t), "component spans timesteps");

    let weight = |s: &ViewSample| 1.0 / s.camera_distance_sq.max(distance_sq_clamp);

    let mut weight_mass = 0.0;
    let mut location = Vec2::zeros();
    for s in cc {
        let w = weight(s);
        weight_mass += w;
        location += w * s.location;
    }
    location /= weight_mass;

    let mut orientation_sum = Vec2::zeros();
    let mut any_orientation = false;
    for s in cc {
        if let Some(o) = s.orientation {
            orientation_sum += weight(s) * o.into_inner();
            any_orientation = true;
        }
    }
    let orientation = if !any_orientation {
        None
    } else if orientation_sum.norm() < 1e-6 {
        // opposing views cancel; trust the closest camera
        cc.iter()
            .filter(|s| s.orientation.is_some())
            .min_by(|a, b| {
                a.camera_distance_sq
                    .partial_cmp(&b.camera_distance_sq)
                    .unwrap()
            })
            .and_then(|s| s.orientation)
    } else {
        Some(UnitVec2::new_normalize(orientation_sum))
    };

    let source_cameras: BTreeSet<CameraId> =
        cc.iter().map(|s| s.camera_id.clone()).collect();
    Ok(WorldObservation {
        t,
        location,
        orientation,
        source_cameras,
        weight_mass,
    })
}

/// Where a view's orientation estimate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationSource {
    /// Use the per-detection `orientation_cam_deg` (the learned-model
    /// interface), rotated into the site frame by the camera yaw.
    ModelInterface,
    /// Derive it from face keypoints and project the anchor points through
    /// the homography.
    Heuristic,
}

/// Localizes one cleaned detection into a world-frame view sample.
///
/// The foot point maps through the camera's pixel -> world homography;
/// the orientation source decides how (and whether) a facing direction is
/// attached.
pub fn localize_detection(
    det: &PoseDetection,
    cam: &CameraModel,
    source: OrientationSource,
) -> Result<ViewSample, GeometryError> {
    let foot = geometry::foot_point(&det.pose)?;
    let location = cam.localize(foot)?;
    let orientation = match source {
        OrientationSource::ModelInterface => det
            .orientation_cam_deg
            .map(|deg| geometry::rotate_to_world(cam, deg_to_unit(deg))),
        OrientationSource::Heuristic => pose_preproc::heuristic_orientation_anchors(&det.pose)
            .and_then(|(refs_mean, nose)| {
                let w_refs = cam.localize(refs_mean).ok()?;
                let w_nose = cam.localize(nose).ok()?;
                let v = w_nose - w_refs;
                (v.norm() > 1e-9).then(|| UnitVec2::new_normalize(v))
            }),
    };
    Ok(ViewSample {
        camera_id: det.camera_id.clone(),
        t: det.t,
        location,
        orientation,
        camera_distance_sq: (location - cam.position).norm_squared(),
    })
}

/// Fuses all samples of one timestep: graph, components, integration.
pub fn fuse_frame(
    samples: &[ViewSample],
    radius: f64,
    distance_sq_clamp: f64,
) -> Vec<WorldObservation> {
    let graph = build_graph(samples, radius);
    connected_components(&graph)
        .into_iter()
        .map(|component| {
            let refs: Vec<&ViewSample> = component.iter().map(|&i| &samples[i]).collect();
            integrate(&refs, distance_sq_clamp).expect("components are non-empty")
        })
        .collect()
}
