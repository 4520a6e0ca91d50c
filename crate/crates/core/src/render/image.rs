//! RGBA8 pixel grids and their PNG / PPM encodings.

use std::io::Cursor;

use thiserror::Error;

/// Row-major RGBA8 pixels, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl PixelGrid {
    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Self {
        let count = width as usize * height as usize;
        Self {
            width,
            height,
            data: rgba.repeat(count),
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Option<Self> {
        (data.len() == width as usize * height as usize * 4).then_some(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 4
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 4] {
        let i = self.offset(x, y);
        self.data[i..i + 4].try_into().expect("4 channels")
    }

    pub fn set(&mut self, x: u32, y: u32, rgba: [u8; 4]) {
        let i = self.offset(x, y);
        self.data[i..i + 4].copy_from_slice(&rgba);
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let start = self.offset(0, y);
        &self.data[start..start + self.width as usize * 4]
    }

    /// Copy all of `src` into `self` with its top-left corner at `(x, y)`.
    pub fn blit(&mut self, src: &PixelGrid, x: u32, y: u32) {
        assert!(x + src.width <= self.width && y + src.height <= self.height);
        let span = src.width as usize * 4;
        for row in 0..src.height {
            let dst = self.offset(x, y + row);
            self.data[dst..dst + span].copy_from_slice(src.row(row));
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 4]> + '_ {
        self.data.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Png,
    /// Binary `P6`; alpha is dropped.
    Ppm,
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot encode an empty {0}x{1} image")]
    Empty(u32, u32),
    #[error("png: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("png: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("unsupported image layout: {0}")]
    Unsupported(String),
}

pub fn encode_image(grid: &PixelGrid, format: ImageFormat) -> Result<Vec<u8>, ImageError> {
    if grid.width == 0 || grid.height == 0 {
        return Err(ImageError::Empty(grid.width, grid.height));
    }
    match format {
        ImageFormat::Png => encode_png(grid),
        ImageFormat::Ppm => Ok(encode_ppm(grid)),
    }
}

fn encode_png(grid: &PixelGrid) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, grid.width, grid.height);
    encoder.set_color(png::ColorType::Rgba);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&grid.data)?;
    writer.finish()?;
    Ok(out)
}

fn encode_ppm(grid: &PixelGrid) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    out.reserve(grid.data.len() / 4 * 3);
    for px in grid.data.chunks_exact(4) {
        out.extend_from_slice(&px[..3]);
    }
    out
}

/// Decode an 8-bit RGB or RGBA PNG.
pub fn decode_png(bytes: &[u8]) -> Result<PixelGrid, ImageError> {
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Unsupported("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    let data = match (info.color_type, info.bit_depth) {
        (png::ColorType::Rgba, png::BitDepth::Eight) => buf,
        (png::ColorType::Rgb, png::BitDepth::Eight) => buf
            .chunks_exact(3)
            .flat_map(|c| [c[0], c[1], c[2], 255])
            .collect(),
        (color, depth) => {
            return Err(ImageError::Unsupported(format!("{color:?} at {depth:?}")));
        }
    };
    PixelGrid::from_raw(info.width, info.height, data)
        .ok_or_else(|| ImageError::Unsupported("row padding".into()))
}
