//! Multi-view camera rig for quilt capture.
//!
//! Views are spread linearly in angle across the view cone. Each view's
//! camera slides along the base camera's right axis and its frustum is
//! sheared so the focal plane lands on the same pixels in every view:
//! nearer geometry drifts one way across the quilt, farther geometry the
//! other.

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{camera_pose, look_at, perspective, OrbitCamera, SceneError};

/// Upper bound on views in one quilt.
pub const MAX_VIEWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiltConfig {
    pub view_count: usize,
    /// Full horizontal width of the view cone, radians.
    pub cone_angle: f64,
    pub columns: usize,
    pub rows: usize,
    pub tile_width: u32,
    pub tile_height: u32,
    /// Distance from the base eye to the zero-parallax plane. Defaults to
    /// the orbit distance, which puts the orbit target on the focal plane.
    #[serde(default)]
    pub focal_distance: Option<f64>,
}

impl Default for QuiltConfig {
    fn default() -> Self {
        Self {
            view_count: 45,
            cone_angle: 40f64.to_radians(),
            columns: 9,
            rows: 5,
            tile_width: 384,
            tile_height: 512,
            focal_distance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuiltError {
    #[error("view count {0} outside 1..={MAX_VIEWS}")]
    ViewCount(usize),
    #[error("cone angle {0} must lie in (0, pi)")]
    ConeAngle(f64),
    #[error("{columns}x{rows} grid cannot hold {views} views")]
    GridTooSmall {
        columns: usize,
        rows: usize,
        views: usize,
    },
    #[error("tile dimensions {0}x{1} must be positive")]
    TileSize(u32, u32),
    #[error("focal distance {0} must be positive")]
    FocalDistance(f64),
    #[error(transparent)]
    Camera(#[from] SceneError),
}

impl QuiltConfig {
    pub fn validate(&self) -> Result<(), QuiltError> {
        if !(1..=MAX_VIEWS).contains(&self.view_count) {
            return Err(QuiltError::ViewCount(self.view_count));
        }
        if !(self.cone_angle > 0.0 && self.cone_angle < std::f64::consts::PI) {
            return Err(QuiltError::ConeAngle(self.cone_angle));
        }
        if self
            .columns
            .checked_mul(self.rows)
            .is_none_or(|cells| cells < self.view_count)
        {
            return Err(QuiltError::GridTooSmall {
                columns: self.columns,
                rows: self.rows,
                views: self.view_count,
            });
        }
        if self.tile_width == 0 || self.tile_height == 0 {
            return Err(QuiltError::TileSize(self.tile_width, self.tile_height));
        }
        if let Some(d) = self.focal_distance {
            if !(d > 0.0 && d.is_finite()) {
                return Err(QuiltError::FocalDistance(d));
            }
        }
        Ok(())
    }

    pub fn aspect(&self) -> f64 {
        self.tile_width as f64 / self.tile_height as f64
    }

    /// `name_qs{columns}x{rows}a{aspect}.png`, the layout-in-filename
    /// convention quilt viewers read.
    pub fn file_name(&self, stem: &str) -> String {
        let aspect = format!("{:.4}", self.aspect());
        let aspect = aspect.trim_end_matches('0').trim_end_matches('.');
        format!("{stem}_qs{}x{}a{aspect}.png", self.columns, self.rows)
    }
}

/// One camera of the rig.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewCamera {
    pub view_index: usize,
    pub angle: f64,
    /// Displacement along the base camera's right axis, scene units.
    pub eye_offset: f64,
    pub eye: Vector3<f64>,
    pub view_transform: Matrix4<f64>,
    pub projection: Matrix4<f64>,
}

/// View angles spaced evenly across the cone, endpoints included.
pub fn view_angles(config: &QuiltConfig) -> Vec<f64> {
    let n = config.view_count;
    if n <= 1 {
        return vec![0.0; n];
    }
    // Integer numerator keeps theta_i == -theta_{n-1-i} exact.
    let span = 2.0 * (n - 1) as f64;
    (0..n)
        .map(|i| config.cone_angle * ((2 * i) as f64 - (n - 1) as f64) / span)
        .collect()
}

/// Base camera for an orbit camera rendered at `aspect`.
pub fn base_view(camera: &OrbitCamera, aspect: f64) -> Result<ViewCamera, QuiltError> {
    let pose = camera_pose(camera)?;
    Ok(ViewCamera {
        view_index: 0,
        angle: 0.0,
        eye_offset: 0.0,
        eye: pose.eye,
        view_transform: look_at(&pose),
        projection: perspective(camera.vertical_fov, aspect, camera.near, camera.far),
    })
}

/// Build one sheared camera per view angle.
pub fn rig_views(
    camera: &OrbitCamera,
    config: &QuiltConfig,
) -> Result<Vec<ViewCamera>, QuiltError> {
    config.validate()?;
    let pose = camera_pose(camera)?;
    let aspect = config.aspect();
    let focal = config.focal_distance.unwrap_or(camera.distance);
    let base_view = look_at(&pose);
    let base_projection = perspective(camera.vertical_fov, aspect, camera.near, camera.far);
    let half_width = focal * (camera.vertical_fov / 2.0).tan() * aspect;

    Ok(view_angles(config)
        .into_iter()
        .enumerate()
        .map(|(view_index, angle)| {
            let offset = focal * angle.tan();
            // Moving the eye by +offset along right shifts view-space x by -offset.
            let mut view_transform = base_view;
            view_transform[(0, 3)] -= offset;
            // Shear so that depth == focal maps back onto the base ndc.x.
            let mut projection = base_projection;
            projection[(0, 2)] -= offset / half_width;
            ViewCamera {
                view_index,
                angle,
                eye_offset: offset,
                eye: pose.eye + offset * pose.right,
                view_transform,
                projection,
            }
        })
        .collect())
}

/// A world point after projection and perspective divide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub ndc: [f64; 2],
    /// NDC depth, -1 at the near plane and 1 at the far plane.
    pub depth: f64,
}

/// Project a world point through a view. `None` when the point lies behind
/// the near plane or at the eye.
pub fn project_point(view: &ViewCamera, p: [f64; 3]) -> Option<ProjectedPoint> {
    let clip = view.projection * (view.view_transform * Vector3::from(p).push(1.0));
    let w = clip.w;
    if w.abs() < 1e-12 || clip.z < -w {
        return None;
    }
    Some(ProjectedPoint {
        ndc: [clip.x / w, clip.y / w],
        depth: clip.z / w,
    })
}
