//! Tabular data to 3D glyph scenes and multi-view quilt images.

pub mod color;
pub mod ids;
pub mod ingest;
pub mod mapping;
pub mod multiview;
pub mod render;
pub mod scene;
