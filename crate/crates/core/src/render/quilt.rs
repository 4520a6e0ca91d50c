//! Render every rig view and pack the tiles into one quilt image.
//!
//! View 0 sits in the bottom-left cell; indices run left to right, then
//! upward row by row. Cells past the last view keep the background.

use rayon::prelude::*;
use thiserror::Error;

use super::image::PixelGrid;
use super::raster::{rgba8, Renderer};
use crate::multiview::{rig_views, QuiltConfig, QuiltError};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq)]
pub struct QuiltImage {
    pub config: QuiltConfig,
    pub pixels: PixelGrid,
}

/// How views are distributed over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// All views on the calling thread.
    Sequential,
    /// The global rayon pool.
    #[default]
    Global,
    /// A dedicated pool of this many threads.
    Threads(usize),
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Quilt(#[from] QuiltError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Top-left pixel of the tile holding `view_index`.
pub fn tile_origin(config: &QuiltConfig, view_index: usize) -> (u32, u32) {
    let column = view_index % config.columns;
    let row_from_bottom = view_index / config.columns;
    let row_from_top = config.rows - 1 - row_from_bottom;
    (
        column as u32 * config.tile_width,
        row_from_top as u32 * config.tile_height,
    )
}

impl QuiltImage {
    pub fn width(&self) -> u32 {
        self.pixels.width()
    }

    pub fn height(&self) -> u32 {
        self.pixels.height()
    }

    /// Copy out the tile for one view.
    pub fn tile(&self, view_index: usize) -> PixelGrid {
        let (x0, y0) = tile_origin(&self.config, view_index);
        let (w, h) = (self.config.tile_width, self.config.tile_height);
        let mut data = Vec::with_capacity(w as usize * h as usize * 4);
        for y in y0..y0 + h {
            let row = self.pixels.row(y);
            data.extend_from_slice(&row[x0 as usize * 4..(x0 + w) as usize * 4]);
        }
        PixelGrid::from_raw(w, h, data).expect("tile size")
    }
}

impl Renderer {
    pub fn render_quilt(
        &self,
        scene: &Scene,
        config: &QuiltConfig,
        parallelism: Parallelism,
    ) -> Result<QuiltImage, RenderError> {
        let views = rig_views(&scene.camera, config)?;
        let (w, h) = (config.tile_width, config.tile_height);
        let render = |v| self.render_view(scene, v, w, h).color;
        let tiles: Vec<PixelGrid> = match parallelism {
            Parallelism::Sequential => views.iter().map(render).collect(),
            Parallelism::Global => views.par_iter().map(render).collect(),
            Parallelism::Threads(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()?
                .install(|| views.par_iter().map(render).collect()),
        };

        let mut pixels = PixelGrid::filled(
            w * config.columns as u32,
            h * config.rows as u32,
            rgba8(scene.background),
        );
        for (i, tile) in tiles.iter().enumerate() {
            let (x, y) = tile_origin(config, i);
            pixels.blit(tile, x, y);
        }
        Ok(QuiltImage {
            config: config.clone(),
            pixels,
        })
    }
}

/// Render a quilt with the default renderer on the global pool.
pub fn render_quilt(scene: &Scene, config: &QuiltConfig) -> Result<QuiltImage, RenderError> {
    super::raster::default_renderer().render_quilt(scene, config, Parallelism::Global)
}
