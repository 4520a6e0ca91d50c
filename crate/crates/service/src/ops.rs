//! Pipeline operations against the store, shared by the HTTP API and the
//! command line.

use chrono::{DateTime, Utc};
use holoviz_core::ingest::{ColumnSchema, ColumnStats, CsvOptions, Dataset, ParseError};
use holoviz_core::mapping::{
    build_scene, default_mapping, validate_mapping, ChannelMapping, MappingError, MappingReport,
};
use holoviz_core::multiview::{QuiltConfig, QuiltError, MAX_VIEWS};
use holoviz_core::render::{ImageError, Parallelism, QuiltImage, RenderError, Renderer};
use holoviz_core::scene::{deserialize_scene, serialize_scene, OrbitCamera, Scene};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{fresh_id, Kind, Namespace, Store, StoreError};

/// Largest accepted tile edge, pixels.
pub const MAX_TILE_DIM: u32 = 4096;
/// Largest accepted quilt, pixels.
pub const MAX_QUILT_PIXELS: u64 = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("missing or unknown bearer token")]
    Unauthorized,
    #[error("{} {id:?} not found", kind.label())]
    NotFound { kind: Kind, id: String },
    #[error("request body exceeds {limit} bytes")]
    TooLarge { limit: usize },
    #[error("mapping rejected: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Mapping(Vec<MappingError>),
    #[error("{0}")]
    Invalid(String),
    #[error("stored {} {id:?} is unreadable: {reason}", kind.label())]
    Corrupt {
        kind: Kind,
        id: String,
        reason: String,
    },
    #[error(transparent)]
    Store(StoreError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidId(id) => ServiceError::Invalid(format!("invalid id {id:?}")),
            e => ServiceError::Store(e),
        }
    }
}

impl From<QuiltError> for ServiceError {
    fn from(e: QuiltError) -> Self {
        ServiceError::Invalid(e.to_string())
    }
}

impl From<RenderError> for ServiceError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Quilt(q) => q.into(),
            RenderError::ThreadPool(p) => ServiceError::Invalid(p.to_string()),
        }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
    pub row_count: usize,
    pub schema: Vec<ColumnSchema>,
    pub stats: Vec<ColumnStats>,
}

impl From<&Dataset> for DatasetSummary {
    fn from(d: &Dataset) -> Self {
        Self {
            id: d.id.clone(),
            row_count: d.row_count(),
            schema: d.schemas.clone(),
            stats: d.stats.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRequest {
    pub dataset_id: String,
    #[serde(default)]
    pub mapping: Option<ChannelMapping>,
    /// Replaces the default camera; the headlight follows it.
    #[serde(default)]
    pub camera: Option<OrbitCamera>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneCreated {
    pub scene_id: String,
    pub report: MappingReport,
}

/// Body of a visualization PUT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisualizationInput {
    pub dataset_id: String,
    pub mapping: ChannelMapping,
    pub camera: OrbitCamera,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredVisualization {
    pub id: String,
    pub dataset_id: String,
    pub mapping: ChannelMapping,
    pub camera: OrbitCamera,
    pub created_at: DateTime<Utc>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualizationEntry {
    pub id: String,
    pub name: String,
    pub created_at: DateTime<Utc>,
}

/// Quilt query parameters; anything left out takes the default layout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiltParams {
    pub views: Option<usize>,
    pub cone_deg: Option<f64>,
    pub columns: Option<usize>,
    pub rows: Option<usize>,
    pub tile_w: Option<u32>,
    pub tile_h: Option<u32>,
}

impl QuiltParams {
    /// Resolve to a validated config. With neither `columns` nor `rows`
    /// the grid is up to 9 columns wide with as many rows as needed; with
    /// one of them the other is derived.
    pub fn to_config(self) -> Result<QuiltConfig> {
        let defaults = QuiltConfig::default();
        let views = self.views.unwrap_or(defaults.view_count);
        if views == 0 || views > MAX_VIEWS {
            return Err(QuiltError::ViewCount(views).into());
        }
        let (columns, rows) = match (self.columns, self.rows) {
            (Some(c), Some(r)) => (c, r),
            (Some(c), None) => (c, views.div_ceil(c.max(1))),
            (None, Some(r)) => (views.div_ceil(r.max(1)), r),
            (None, None) => {
                let c = views.min(9);
                (c, views.div_ceil(c))
            }
        };
        let config = QuiltConfig {
            view_count: views,
            cone_angle: self.cone_deg.map_or(defaults.cone_angle, f64::to_radians),
            columns,
            rows,
            tile_width: self.tile_w.unwrap_or(defaults.tile_width),
            tile_height: self.tile_h.unwrap_or(defaults.tile_height),
            focal_distance: None,
        };
        config.validate()?;
        if config.tile_width > MAX_TILE_DIM || config.tile_height > MAX_TILE_DIM {
            return Err(ServiceError::Invalid(format!(
                "tile {}x{} exceeds {MAX_TILE_DIM} pixels per side",
                config.tile_width, config.tile_height
            )));
        }
        let pixels = (config.tile_width as u64 * config.columns as u64)
            .saturating_mul(config.tile_height as u64 * config.rows as u64);
        if pixels > MAX_QUILT_PIXELS {
            return Err(ServiceError::Invalid(format!(
                "quilt of {pixels} pixels exceeds {MAX_QUILT_PIXELS}"
            )));
        }
        Ok(config)
    }
}

fn not_found(kind: Kind, id: &str) -> ServiceError {
    ServiceError::NotFound {
        kind,
        id: id.to_owned(),
    }
}

fn corrupt(kind: Kind, id: &str, reason: impl ToString) -> ServiceError {
    ServiceError::Corrupt {
        kind,
        id: id.to_owned(),
        reason: reason.to_string(),
    }
}

fn fetch(store: &Store, ns: &Namespace, kind: Kind, id: &str) -> Result<Vec<u8>> {
    store.get(ns, kind, id)?.ok_or_else(|| not_found(kind, id))
}

pub fn ingest(
    store: &Store,
    ns: &Namespace,
    csv: &[u8],
    options: &CsvOptions,
) -> Result<DatasetSummary> {
    let dataset = Dataset::from_csv(csv, options)?;
    let bytes = serde_json::to_vec(&dataset).expect("datasets serialize");
    store.put(ns, Kind::Dataset, &dataset.id, &bytes)?;
    Ok(DatasetSummary::from(&dataset))
}

pub fn load_dataset(store: &Store, ns: &Namespace, id: &str) -> Result<Dataset> {
    let bytes = fetch(store, ns, Kind::Dataset, id)?;
    serde_json::from_slice(&bytes).map_err(|e| corrupt(Kind::Dataset, id, e))
}

pub fn create_scene(store: &Store, ns: &Namespace, request: SceneRequest) -> Result<SceneCreated> {
    let dataset = load_dataset(store, ns, &request.dataset_id)?;
    let mapping = match request.mapping {
        Some(m) => m,
        None => default_mapping(&dataset).map_err(|e| ServiceError::Mapping(vec![e]))?,
    };
    let problems = validate_mapping(&dataset, &mapping);
    if !problems.is_empty() {
        return Err(ServiceError::Mapping(problems));
    }
    let id = fresh_id();
    let (mut scene, report) =
        build_scene(&id, &dataset, &mapping).map_err(|e| ServiceError::Mapping(vec![e]))?;
    if let Some(camera) = request.camera {
        scene = scene.with_camera(camera);
    }
    scene
        .validate()
        .map_err(|e| ServiceError::Invalid(e.to_string()))?;
    store.put(ns, Kind::Scene, &id, &serialize_scene(&scene))?;
    Ok(SceneCreated {
        scene_id: id,
        report,
    })
}

/// The stored canonical document, byte for byte.
pub fn scene_bytes(store: &Store, ns: &Namespace, id: &str) -> Result<Vec<u8>> {
    fetch(store, ns, Kind::Scene, id)
}

pub fn load_scene(store: &Store, ns: &Namespace, id: &str) -> Result<Scene> {
    let bytes = scene_bytes(store, ns, id)?;
    deserialize_scene(&bytes).map_err(|e| corrupt(Kind::Scene, id, e))
}

pub fn render(scene: &Scene, config: &QuiltConfig, parallelism: Parallelism) -> Result<QuiltImage> {
    static RENDERER: std::sync::OnceLock<Renderer> = std::sync::OnceLock::new();
    Ok(RENDERER
        .get_or_init(Renderer::default)
        .render_quilt(scene, config, parallelism)?)
}

/// Save under `id`, keeping the original creation time on overwrite.
/// Returns the stored bytes and whether the document is new.
pub fn save_visualization(
    store: &Store,
    ns: &Namespace,
    id: &str,
    input: VisualizationInput,
) -> Result<(Vec<u8>, bool)> {
    let dataset = match load_dataset(store, ns, &input.dataset_id) {
        Err(ServiceError::NotFound { .. }) => {
            return Err(ServiceError::Invalid(format!(
                "dataset {:?} does not exist",
                input.dataset_id
            )))
        }
        other => other?,
    };
    let problems = validate_mapping(&dataset, &input.mapping);
    if !problems.is_empty() {
        return Err(ServiceError::Mapping(problems));
    }
    input
        .camera
        .validate()
        .map_err(|e| ServiceError::Invalid(e.to_string()))?;

    store.update(ns, Kind::Visualization, id, |previous| {
        let created_at = match &previous {
            Some(bytes) => {
                serde_json::from_slice::<StoredVisualization>(bytes)
                    .map_err(|e| corrupt(Kind::Visualization, id, e))?
                    .created_at
            }
            None => Utc::now(),
        };
        let doc = StoredVisualization {
            id: id.to_owned(),
            dataset_id: input.dataset_id,
            mapping: input.mapping,
            camera: input.camera,
            created_at,
            name: input.name,
        };
        let bytes = serde_json::to_vec(&doc).expect("visualizations serialize");
        Ok((bytes.clone(), (bytes, previous.is_none())))
    })
}

pub fn visualization_bytes(store: &Store, ns: &Namespace, id: &str) -> Result<Vec<u8>> {
    fetch(store, ns, Kind::Visualization, id)
}

/// Saved visualizations, oldest first.
pub fn list_visualizations(store: &Store, ns: &Namespace) -> Result<Vec<VisualizationEntry>> {
    let mut entries = Vec::new();
    for id in store.list(ns, Kind::Visualization)? {
        // Deleted between listing and reading: skip it.
        let Some(bytes) = store.get(ns, Kind::Visualization, &id)? else {
            continue;
        };
        let doc: StoredVisualization =
            serde_json::from_slice(&bytes).map_err(|e| corrupt(Kind::Visualization, &id, e))?;
        entries.push(VisualizationEntry {
            id: doc.id,
            name: doc.name,
            created_at: doc.created_at,
        });
    }
    entries.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(entries)
}
