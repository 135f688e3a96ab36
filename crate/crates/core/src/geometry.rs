//! Planar homography calibration and application, camera-to-world
//! orientation rotation, and camera-installation geometry factors.
//!
//! The localization model assumes every person stands on one flat floor
//! plane, so a single 3x3 perspective matrix per camera maps a foot pixel
//! `[u, v, 1]` to its site-frame floor location `[x, y, 1]` (up to the
//! homogeneous scale).

use alloc::string::String;
use nalgebra::{Matrix2, Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::model::{KeypointIndex, Pose2D, UnitVec2, Vec2};

/// Denominator magnitude below which a pixel is treated as mapping to the
/// horizon (the plane at infinity).
pub const HORIZON_EPS: f64 = 1e-12;

/// Relative pivot tolerance for declaring the calibration system singular.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// The four point correspondences are degenerate (three collinear
    /// points on either side), so the 8x8 calibration system is singular.
    #[error("degenerate calibration configuration: {0}")]
    DegenerateConfiguration(String),
    /// The pixel maps to infinity under this homography.
    #[error("pixel ({u}, {v}) maps to the horizon")]
    HorizonPoint { u: f64, v: f64 },
    /// Both ankles are invisible, so no foot location can be derived.
    #[error("no visible ankle keypoint")]
    NoFeetVisible,
}

/// A 3x3 plane-to-plane perspective map, normalized so `m33 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    /// Wraps an explicit matrix, renormalizing so `m33 = 1`.
    ///
    /// Fails with [`GeometryError::DegenerateConfiguration`] when the matrix
    /// is singular or `m33` vanishes.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, GeometryError> {
        let m33 = m[(2, 2)];
        if m33.abs() < HORIZON_EPS {
            return Err(GeometryError::DegenerateConfiguration(
                "m33 is zero; cannot normalize".into(),
            ));
        }
        let m = m / m33;
        // det checked after row scaling so the tolerance is scale-free
        let scaled = scale_rows_to_unit(&m);
        if scaled.determinant().abs() < PIVOT_TOL {
            return Err(GeometryError::DegenerateConfiguration(
                "matrix is singular".into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// The inverse map (world -> pixel for a pixel -> world homography).
    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let inv = self
            .m
            .try_inverse()
            .ok_or_else(|| GeometryError::DegenerateConfiguration("matrix is singular".into()))?;
        Self::from_matrix(inv)
    }
}

fn scale_rows_to_unit(m: &Matrix3<f64>) -> Matrix3<f64> {
    let mut out = *m;
    for r in 0..3 {
        let norm = out.row(r).norm();
        if norm > 0.0 {
            for c in 0..3 {
                out[(r, c)] /= norm;
            }
        }
    }
    out
}

/// Fits the pixel -> world homography from exactly four correspondences.
///
/// Solves the 8-unknown linear system with `m33` pinned to 1, using Gaussian
/// elimination with partial pivoting. Collinear configurations surface as
/// [`GeometryError::DegenerateConfiguration`].
pub fn fit_homography(
    pixel_points: &[Vec2; 4],
    world_points: &[Vec2; 4],
) -> Result<Homography, GeometryError> {
    // Rows: x = (m11 u + m12 v + m13) - x (m31 u + m32 v), same for y.
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (u, v) = (pixel_points[i].x, pixel_points[i].y);
        let (x, y) = (world_points[i].x, world_points[i].y);
        a[2 * i] = [u, v, 1.0, 0.0, 0.0, 0.0, -x * u, -x * v, x];
        a[2 * i + 1] = [0.0, 0.0, 0.0, u, v, 1.0, -y * u, -y * v, y];
    }
    let m = solve_8x8(&mut a)?;
    let matrix = Matrix3::new(m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], 1.0);
    Homography::from_matrix(matrix)
}

/// Gaussian elimination with partial pivoting on an augmented 8x9 system.
fn solve_8x8(a: &mut [[f64; 9]; 8]) -> Result<[f64; 8], GeometryError> {
    // Scale-free singularity test: compare pivots against each row's norm.
    let mut row_scale = [0.0f64; 8];
    for (r, row) in a.iter().enumerate() {
        row_scale[r] = row[..8].iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    let max_scale = row_scale.iter().fold(0.0f64, |acc, &x| acc.max(x)).max(1.0);

    for col in 0..8 {
        let pivot_row = (col..8)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < PIVOT_TOL * max_scale {
            return Err(GeometryError::DegenerateConfiguration(
                "collinear calibration points".into(),
            ));
        }
        a.swap(col, pivot_row);
        for row in col + 1..8 {
            let factor = a[row][col] / a[col][col];
            for k in col..9 {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    let mut x = [0.0f64; 8];
    for row in (0..8).rev() {
        let mut sum = a[row][8];
        for k in row + 1..8 {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}

/// Applies the homography to a pixel, returning the site-frame location.
pub fn apply_homography(h: &Homography, p: Vec2) -> Result<Vec2, GeometryError> {
    let hp = h.m * Vector3::new(p.x, p.y, 1.0);
    if hp.z.abs() <= HORIZON_EPS {
        return Err(GeometryError::HorizonPoint { u: p.x, v: p.y });
    }
    Ok(Vec2::new(hp.x / hp.z, hp.y / hp.z))
}

/// Foot pixel of a pose: the midpoint of the visible ankles, or the single
/// visible ankle under partial occlusion.
pub fn foot_point(pose: &Pose2D) -> Result<Vec2, GeometryError> {
    let left = pose.keypoint(KeypointIndex::LeftAnkle);
    let right = pose.keypoint(KeypointIndex::RightAnkle);
    match (left.visible, right.visible) {
        (true, true) => Ok(0.5 * (left.position() + right.position())),
        (true, false) => Ok(left.position()),
        (false, true) => Ok(right.position()),
        (false, false) => Err(GeometryError::NoFeetVisible),
    }
}

/// A camera's world pose, field of view, and pixel -> world homography.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub camera_id: String,
    /// Ground-plane position of the camera, meters.
    pub position: Vec2,
    pub mount_height: f64,
    /// Viewpoint direction in the site frame, degrees clockwise from north.
    pub yaw_deg: f64,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    /// Pixel -> world map for the floor plane.
    pub homography: Homography,
    /// (width, height) in pixels.
    pub image_size: (f64, f64),
    /// Beyond this ground distance the camera reports nothing.
    pub max_range: f64,
}

impl CameraModel {
    /// Localizes a foot pixel onto the site floor.
    pub fn localize(&self, foot_pixel: Vec2) -> Result<Vec2, GeometryError> {
        apply_homography(&self.homography, foot_pixel)
    }
}

/// Rotates a camera-frame direction into the site frame.
///
/// The camera frame measures angles clockwise from the camera's optical
/// axis, so a person facing straight into a camera has camera-frame angle
/// 180 deg. Rotating by the camera yaw places that direction opposite the
/// camera viewpoint in the site frame.
pub fn rotate_to_world(cam: &CameraModel, v_cam: UnitVec2) -> UnitVec2 {
    rotate_cw(v_cam, cam.yaw_deg)
}

/// Rotates a unit vector clockwise by `deg` in the north-reference frame.
pub fn rotate_cw(v: UnitVec2, deg: f64) -> UnitVec2 {
    let rad = deg.to_radians();
    let (s, c) = (rad.sin(), rad.cos());
    // clockwise rotation: angle(result) = angle(v) + deg in the
    // clockwise-from-north convention
    let rot = Matrix2::new(c, s, -s, c);
    UnitVec2::new_normalize(rot * v.into_inner())
}

/// Camera-installation factors for one localized sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryFactors {
    /// Ground distance between camera and person, meters.
    pub distance: f64,
    /// Angle between the person's facing direction and the person-to-camera
    /// direction, folded to `[0, 180]` degrees.
    pub facing_angle_deg: f64,
    /// Horizontal angular offset of the foot pixel from the image center,
    /// normalized by the half field of view: 0 at center, 1 at the frame
    /// edge.
    pub h_norm: f64,
    /// Vertical counterpart of `h_norm`.
    pub v_norm: f64,
}

/// Computes installation factors for a localized person.
///
/// `world_pos` is the person's site-frame location, `facing` their facing
/// direction, and `pixel_foot` the foot pixel the localization used.
pub fn geometry_factors(
    cam: &CameraModel,
    world_pos: Vec2,
    facing: UnitVec2,
    pixel_foot: Vec2,
) -> GeometryFactors {
    let distance = (world_pos - cam.position).norm();

    let to_camera = cam.position - world_pos;
    let facing_angle_deg = if to_camera.norm() > 0.0 {
        let cos = (facing.dot(&to_camera) / to_camera.norm()).clamp(-1.0, 1.0);
        cos.acos().to_degrees()
    } else {
        0.0
    };

    let (w, h) = cam.image_size;
    let half_h_rad = (cam.hfov_deg * 0.5).to_radians();
    let half_v_rad = (cam.vfov_deg * 0.5).to_radians();
    // per-axis focal lengths consistent with the declared FOV
    let focal_u = (w * 0.5) / half_h_rad.tan();
    let focal_v = (h * 0.5) / half_v_rad.tan();
    let theta_h = ((pixel_foot.x - w * 0.5) / focal_u).atan();
    let theta_v = ((pixel_foot.y - h * 0.5) / focal_v).atan();
    GeometryFactors {
        distance,
        facing_angle_deg,
        h_norm: theta_h.abs() / half_h_rad,
        v_norm: theta_v.abs() / half_v_rad,
    }
}
