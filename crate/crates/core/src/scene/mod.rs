//! Renderable scene description and its canonical JSON form.
//!
//! The canonical document is compact JSON with every object's keys sorted,
//! reals in shortest round-trip form and a top-level `"schema_version": 1`.
//! Serializing the same scene always yields the same bytes.

mod camera;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use camera::{camera_pose, look_at, perspective, CameraPose, OrbitCamera, WORLD_UP};

use crate::color::Rgb;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere,
    Cube,
    Cylinder,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Sphere, Shape::Cube, Shape::Cylinder];
}

/// One plotted mark. `radius` is the sphere radius, the cube half-extent,
/// or the cylinder radius (cylinders are `2 * radius` tall along +Y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneNode {
    pub shape: Shape,
    pub position: [f64; 3],
    pub radius: f64,
    pub color: Rgb,
}

/// Single directional light with an ambient term. `direction` is the
/// direction light travels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lighting {
    pub ambient: f64,
    pub diffuse: f64,
    pub direction: [f64; 3],
}

impl Lighting {
    /// Default intensities, lit along the camera's line of sight.
    pub fn headlight(camera: &OrbitCamera) -> Self {
        let forward = camera_pose(camera).map(|p| p.forward).unwrap_or(-WORLD_UP);
        Self {
            ambient: 0.2,
            diffuse: 0.8,
            direction: forward.into(),
        }
    }
}

impl Default for Lighting {
    fn default() -> Self {
        Self::headlight(&OrbitCamera::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub id: String,
    pub nodes: Vec<SceneNode>,
    pub camera: OrbitCamera,
    pub lighting: Lighting,
    pub background: Rgb,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("malformed scene document at {path:?}: {message}")]
    MalformedDocument { path: String, message: String },
    #[error("invalid {field}: {reason}")]
    InvariantViolation { field: String, reason: String },
    #[error("camera elevation {elevation} is at or beyond vertical")]
    GimbalDegenerate { elevation: f64 },
}

fn violation(field: impl Into<String>, reason: impl Into<String>) -> SceneError {
    SceneError::InvariantViolation {
        field: field.into(),
        reason: reason.into(),
    }
}

impl Scene {
    /// A scene with the default camera, headlight and black background.
    pub fn new(id: impl Into<String>, nodes: Vec<SceneNode>) -> Self {
        let camera = OrbitCamera::default();
        Self {
            id: id.into(),
            nodes,
            lighting: Lighting::headlight(&camera),
            camera,
            background: Rgb::BLACK,
        }
    }

    /// Swap in `camera` and re-aim the headlight along it.
    pub fn with_camera(mut self, camera: OrbitCamera) -> Self {
        self.lighting = Lighting::headlight(&camera);
        self.camera = camera;
        self
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.id.is_empty() {
            return Err(violation("id", "must not be empty"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.position.iter().all(|c| c.is_finite()) {
                return Err(violation(format!("nodes[{i}].position"), "must be finite"));
            }
            if !(node.radius > 0.0 && node.radius.is_finite()) {
                return Err(violation(format!("nodes[{i}].radius"), "must be positive"));
            }
            if !node.color.is_valid() {
                return Err(violation(
                    format!("nodes[{i}].color"),
                    "components must lie in [0, 1]",
                ));
            }
        }
        self.camera.validate()?;

        let light = &self.lighting;
        for (name, v) in [("ambient", light.ambient), ("diffuse", light.diffuse)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(violation(format!("lighting.{name}"), "must lie in [0, 1]"));
            }
        }
        if light.ambient + light.diffuse > 1.2 {
            return Err(violation(
                "lighting",
                "ambient + diffuse must not exceed 1.2",
            ));
        }
        let norm = light.direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-9) {
            return Err(violation("lighting.direction", "must be a unit vector"));
        }
        if !self.background.is_valid() {
            return Err(violation("background", "components must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Canonical JSON bytes for `scene`.
pub fn serialize_scene(scene: &Scene) -> Vec<u8> {
    let mut doc = serde_json::to_value(scene).expect("scene fields are JSON-representable");
    doc.as_object_mut()
        .expect("scene serializes as an object")
        .insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    doc.sort_all_objects();
    serde_json::to_vec(&doc).expect("JSON values always serialize")
}

/// Parse and validate a scene document.
pub fn deserialize_scene(bytes: &[u8]) -> Result<Scene, SceneError> {
    let mut doc: Value =
        serde_json::from_slice(bytes).map_err(|e| SceneError::MalformedDocument {
            path: String::new(),
            message: e.to_string(),
        })?;
    let Some(object) = doc.as_object_mut() else {
        return Err(SceneError::MalformedDocument {
            path: String::new(),
            message: "expected a JSON object".into(),
        });
    };
    match object
        .remove("schema_version")
        .as_ref()
        .and_then(Value::as_u64)
    {
        Some(SCHEMA_VERSION) => {}
        _ => {
            return Err(SceneError::MalformedDocument {
                path: "schema_version".into(),
                message: format!("expected schema_version {SCHEMA_VERSION}"),
            })
        }
    }
    let scene: Scene =
        serde_path_to_error::deserialize(doc).map_err(|e| SceneError::MalformedDocument {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    scene.validate()?;
    Ok(scene)
}
