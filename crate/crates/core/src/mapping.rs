//! Channel mapping: dataset columns to node position, size, color and shape.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{self, Rgb};
use crate::ingest::{
    normalize, normalize_unit, parse_number, ColumnKind, ColumnStats, Dataset, NumericStats,
};
use crate::scene::{Scene, SceneNode, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    X,
    Y,
    Z,
    Size,
    Color,
    Shape,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Z => "z",
            Channel::Size => "size",
            Channel::Color => "color",
            Channel::Shape => "shape",
        })
    }
}

fn default_size_range() -> (f64, f64) {
    (0.02, 0.08)
}

/// Red, yellow and blue first, then five further distinct hues.
pub fn default_palette() -> Vec<Rgb> {
    [
        "#FF0000", "#FFFF00", "#0000FF", "#00C000", "#FF8000", "#8000FF", "#00FFFF", "#FF00FF",
    ]
    .iter()
    .map(|h| Rgb::from_hex(h).expect("static palette"))
    .collect()
}

fn default_gradient() -> (Rgb, Rgb) {
    (
        Rgb::from_hex("#ADD8E6").expect("light blue"),
        Rgb::from_hex("#00008B").expect("dark blue"),
    )
}

fn default_shape() -> Shape {
    Shape::Sphere
}

fn default_color() -> Rgb {
    Rgb::RED
}

fn default_radius() -> f64 {
    0.04
}

/// Which column drives which visual channel, plus the value ranges the
/// channels are mapped onto. Columns are referenced by header name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelMapping {
    pub x: String,
    pub y: String,
    pub z: String,
    #[serde(default)]
    pub size: Option<String>,
    #[serde(default)]
    pub color: Option<String>,
    #[serde(default)]
    pub shape: Option<String>,
    #[serde(default = "default_size_range")]
    pub size_range: (f64, f64),
    #[serde(default = "default_palette", with = "color::hex::list")]
    pub palette: Vec<Rgb>,
    #[serde(default = "default_gradient", with = "color::hex::pair")]
    pub gradient: (Rgb, Rgb),
    #[serde(default = "default_shape")]
    pub default_shape: Shape,
    #[serde(default = "default_color", with = "color::hex")]
    pub default_color: Rgb,
    #[serde(default = "default_radius")]
    pub default_radius: f64,
}

impl ChannelMapping {
    /// Position-only mapping with default ranges and colors.
    pub fn new(x: impl Into<String>, y: impl Into<String>, z: impl Into<String>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            z: z.into(),
            size: None,
            color: None,
            shape: None,
            size_range: default_size_range(),
            palette: default_palette(),
            gradient: default_gradient(),
            default_shape: default_shape(),
            default_color: default_color(),
            default_radius: default_radius(),
        }
    }

    fn bindings(&self) -> impl Iterator<Item = (Channel, &str)> {
        [
            (Channel::X, Some(&self.x)),
            (Channel::Y, Some(&self.y)),
            (Channel::Z, Some(&self.z)),
            (Channel::Size, self.size.as_ref()),
            (Channel::Color, self.color.as_ref()),
            (Channel::Shape, self.shape.as_ref()),
        ]
        .into_iter()
        .filter_map(|(ch, col)| col.map(|c| (ch, c.as_str())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum MappingError {
    #[error("{channel}: unknown column {column:?}")]
    UnknownColumn { channel: Channel, column: String },
    #[error("{channel}: expected a {expected} column, got {got}")]
    TypeMismatch {
        channel: Channel,
        expected: ColumnKind,
        got: ColumnKind,
    },
    #[error("{field}: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("the first three columns must be numeric")]
    InsufficientNumericColumns,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MappingReport {
    pub nodes_emitted: usize,
    pub rows_dropped: usize,
    pub dropped_row_indices: Vec<usize>,
}

/// First three columns to x, y, z; a numeric fourth column to size; a fifth
/// column to color. Anything after that stays unmapped.
pub fn default_mapping(dataset: &Dataset) -> Result<ChannelMapping, MappingError> {
    let schemas = &dataset.schemas;
    if schemas.len() < 3 || schemas[..3].iter().any(|s| s.kind != ColumnKind::Numeric) {
        return Err(MappingError::InsufficientNumericColumns);
    }
    let mut mapping = ChannelMapping::new(&schemas[0].name, &schemas[1].name, &schemas[2].name);
    mapping.size = schemas
        .get(3)
        .filter(|s| s.kind == ColumnKind::Numeric)
        .map(|s| s.name.clone());
    mapping.color = schemas.get(4).map(|s| s.name.clone());
    Ok(mapping)
}

fn expected_kind(channel: Channel) -> Option<ColumnKind> {
    match channel {
        Channel::X | Channel::Y | Channel::Z | Channel::Size => Some(ColumnKind::Numeric),
        Channel::Shape => Some(ColumnKind::Categorical),
        Channel::Color => None,
    }
}

/// Every reason `apply_mapping` would refuse this mapping; empty when it
/// will succeed.
pub fn validate_mapping(dataset: &Dataset, mapping: &ChannelMapping) -> Vec<MappingError> {
    let mut problems = Vec::new();
    for (channel, column) in mapping.bindings() {
        let Some(index) = dataset.column_index(column) else {
            problems.push(MappingError::UnknownColumn {
                channel,
                column: column.to_owned(),
            });
            continue;
        };
        let got = dataset.schemas[index].kind;
        if let Some(expected) = expected_kind(channel) {
            if got != expected {
                problems.push(MappingError::TypeMismatch {
                    channel,
                    expected,
                    got,
                });
            }
        }
    }

    let mut param = |field: &str, reason: &str| {
        problems.push(MappingError::InvalidParameter {
            field: field.to_owned(),
            reason: reason.to_owned(),
        })
    };
    let (lo, hi) = mapping.size_range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        param("size_range", "need 0 < min_radius <= max_radius");
    }
    if mapping.palette.is_empty() {
        param("palette", "must not be empty");
    }
    if !(mapping.default_radius > 0.0 && mapping.default_radius.is_finite()) {
        param("default_radius", "must be positive");
    }
    problems
}

enum ColorSource<'a> {
    Fixed,
    Categories(usize, HashMap<&'a str, usize>),
    Gradient(usize, &'a NumericStats),
}

struct Resolved<'a> {
    axes: [(usize, &'a NumericStats); 3],
    size: Option<(usize, &'a NumericStats)>,
    color: ColorSource<'a>,
    shape: Option<(usize, HashMap<&'a str, usize>)>,
}

fn category_lookup(stats: &ColumnStats) -> HashMap<&str, usize> {
    stats
        .as_categorical()
        .map(|c| {
            c.categories
                .iter()
                .enumerate()
                .map(|(i, name)| (name.as_str(), i))
                .collect()
        })
        .unwrap_or_default()
}

fn resolve<'a>(dataset: &'a Dataset, mapping: &ChannelMapping) -> Resolved<'a> {
    // Only called after validation, so lookups and kinds are known good.
    let index = |name: &str| dataset.column_index(name).expect("validated column");
    let numeric = |name: &str| {
        let i = index(name);
        (i, dataset.stats[i].as_numeric().expect("validated numeric"))
    };
    let color = match &mapping.color {
        None => ColorSource::Fixed,
        Some(name) => {
            let i = index(name);
            match &dataset.stats[i] {
                ColumnStats::Numeric(s) => ColorSource::Gradient(i, s),
                stats @ ColumnStats::Categorical(_) => {
                    ColorSource::Categories(i, category_lookup(stats))
                }
            }
        }
    };
    Resolved {
        axes: [
            numeric(&mapping.x),
            numeric(&mapping.y),
            numeric(&mapping.z),
        ],
        size: mapping.size.as_deref().map(numeric),
        color,
        shape: mapping.shape.as_deref().map(|name| {
            let i = index(name);
            (i, category_lookup(&dataset.stats[i]))
        }),
    }
}

fn numeric_cell(row: &[String], column: usize) -> Option<f64> {
    parse_number(&row[column])
}

fn build_node(row: &[String], r: &Resolved<'_>, mapping: &ChannelMapping) -> Option<SceneNode> {
    let mut position = [0.0; 3];
    for (slot, (column, stats)) in position.iter_mut().zip(&r.axes) {
        *slot = normalize(numeric_cell(row, *column)?, stats);
    }

    let radius = match r.size {
        None => mapping.default_radius,
        Some((column, stats)) => {
            let t = normalize_unit(numeric_cell(row, column)?, stats);
            let (lo, hi) = mapping.size_range;
            (lo * (1.0 - t) + hi * t).clamp(lo, hi)
        }
    };

    let color = match &r.color {
        ColorSource::Fixed => mapping.default_color,
        ColorSource::Categories(column, lookup) => {
            let index = *lookup.get(row[*column].as_str())?;
            mapping.palette[index % mapping.palette.len()]
        }
        ColorSource::Gradient(column, stats) => {
            let t = normalize_unit(numeric_cell(row, *column)?, stats);
            mapping.gradient.0.lerp(mapping.gradient.1, t)
        }
    };

    let shape = match &r.shape {
        None => mapping.default_shape,
        Some((column, lookup)) => {
            let index = *lookup.get(row[*column].as_str())?;
            Shape::ALL[index % Shape::ALL.len()]
        }
    };

    Some(SceneNode {
        shape,
        position,
        radius,
        color,
    })
}

/// Emit one node per row. Rows with an empty (or otherwise unusable) cell in
/// any mapped column are dropped and listed in the report.
pub fn apply_mapping(
    dataset: &Dataset,
    mapping: &ChannelMapping,
) -> Result<(Vec<SceneNode>, MappingReport), MappingError> {
    if let Some(first) = validate_mapping(dataset, mapping).into_iter().next() {
        return Err(first);
    }
    let resolved = resolve(dataset, mapping);
    let mut nodes = Vec::with_capacity(dataset.row_count());
    let mut report = MappingReport::default();
    for (i, row) in dataset.table.rows.iter().enumerate() {
        match build_node(row, &resolved, mapping) {
            Some(node) => nodes.push(node),
            None => report.dropped_row_indices.push(i),
        }
    }
    report.nodes_emitted = nodes.len();
    report.rows_dropped = report.dropped_row_indices.len();
    Ok((nodes, report))
}

/// Map `dataset` and wrap the nodes in a default scene.
pub fn build_scene(
    id: impl Into<String>,
    dataset: &Dataset,
    mapping: &ChannelMapping,
) -> Result<(Scene, MappingReport), MappingError> {
    let (nodes, report) = apply_mapping(dataset, mapping)?;
    Ok((Scene::new(id, nodes), report))
}
