//! Software rendering: meshes, rasterization, quilts and image encoding.

pub mod image;
pub mod mesh;
pub mod quilt;
pub mod raster;

pub use image::{decode_png, encode_image, ImageError, ImageFormat, PixelGrid};
pub use mesh::{tessellate, MeshError, TriangleMesh, Vertex};
pub use quilt::{render_quilt, tile_origin, Parallelism, QuiltImage, RenderError};
pub use raster::{render_view, Framebuffer, Renderer, Tessellation};
