//! Orbit camera, its world-space pose, and the matrices derived from it.
//!
//! Right-handed coordinates with +Y up. View space looks down -Z.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::SceneError;

pub const WORLD_UP: Vector3<f64> = Vector3::new(0.0, 1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitCamera {
    pub target: [f64; 3],
    /// Rotation about +Y, radians. Zero looks from +Z toward the target.
    pub azimuth: f64,
    /// Radians, strictly inside (-pi/2, pi/2).
    pub elevation: f64,
    pub distance: f64,
    pub vertical_fov: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for OrbitCamera {
    fn default() -> Self {
        Self {
            target: [0.0; 3],
            azimuth: 30f64.to_radians(),
            elevation: 20f64.to_radians(),
            distance: 3.2,
            vertical_fov: 50f64.to_radians(),
            near: 0.1,
            far: 100.0,
        }
    }
}

/// Eye position and orthonormal basis of an [`OrbitCamera`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub eye: Vector3<f64>,
    pub forward: Vector3<f64>,
    pub right: Vector3<f64>,
    pub up: Vector3<f64>,
}

impl OrbitCamera {
    pub fn target_vector(&self) -> Vector3<f64> {
        Vector3::from(self.target)
    }

    /// Field-by-field invariant check, reporting the first violation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub(crate) fn check(&self) -> Result<(), (&'static str, String)> {
        if !self.target.iter().all(|c| c.is_finite()) {
            return Err(("target", "components must be finite".into()));
        }
        if !self.azimuth.is_finite() {
            return Err(("azimuth", "must be finite".into()));
        }
        if !(self.elevation.abs() < FRAC_PI_2) {
            return Err(("elevation", "must lie strictly inside (-pi/2, pi/2)".into()));
        }
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return Err(("distance", "must be positive".into()));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(("vertical_fov", "must lie in (0, pi)".into()));
        }
        if !(self.near > 0.0 && self.near.is_finite()) {
            return Err(("near", "must be positive".into()));
        }
        if !(self.far > self.near && self.far.is_finite()) {
            return Err(("far", "must exceed near".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        self.check()
            .map_err(|(field, reason)| SceneError::InvariantViolation {
                field: format!("camera.{field}"),
                reason,
            })
    }
}

/// Place the camera on its orbit sphere and build its basis.
///
/// `eye = target + distance * (cos e sin a, sin e, cos e cos a)`; `right`
/// is `forward x world_up` normalized and `up` is `right x forward`.
pub fn camera_pose(camera: &OrbitCamera) -> Result<CameraPose, SceneError> {
    if camera.elevation.abs() >= FRAC_PI_2 || camera.elevation.is_nan() {
        return Err(SceneError::GimbalDegenerate {
            elevation: camera.elevation,
        });
    }
    let (sin_a, cos_a) = camera.azimuth.sin_cos();
    let (sin_e, cos_e) = camera.elevation.sin_cos();
    let target = camera.target_vector();
    let eye = target + camera.distance * Vector3::new(cos_e * sin_a, sin_e, cos_e * cos_a);
    let forward = (target - eye).normalize();
    let right = forward.cross(&WORLD_UP).normalize();
    let up = right.cross(&forward);
    Ok(CameraPose {
        eye,
        forward,
        right,
        up,
    })
}

/// World-to-view transform for a pose.
pub fn look_at(pose: &CameraPose) -> Matrix4<f64> {
    let (r, u, f, e) = (pose.right, pose.up, pose.forward, pose.eye);
    #[rustfmt::skip]
    let m = Matrix4::new(
        r.x,  r.y,  r.z,  -r.dot(&e),
        u.x,  u.y,  u.z,  -u.dot(&e),
        -f.x, -f.y, -f.z, f.dot(&e),
        0.0,  0.0,  0.0,  1.0,
    );
    m
}

/// OpenGL-style perspective projection onto clip space, depth in [-1, 1].
pub fn perspective(vertical_fov: f64, aspect: f64, near: f64, far: f64) -> Matrix4<f64> {
    let f = 1.0 / (vertical_fov / 2.0).tan();
    let depth = near - far;
    #[rustfmt::skip]
    let m = Matrix4::new(
        f / aspect, 0.0, 0.0,                  0.0,
        0.0,        f,   0.0,                  0.0,
        0.0,        0.0, (far + near) / depth, 2.0 * far * near / depth,
        0.0,        0.0, -1.0,                 0.0,
    );
    m
}
