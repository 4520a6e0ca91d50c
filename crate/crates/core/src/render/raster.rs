//! Z-buffered triangle rasterizer with Gouraud-interpolated Lambert shading.
//!
//! Triangles are clipped in homogeneous space, snapped to a 1/256 pixel
//! grid and scanned with integer edge functions under the top-left fill
//! rule, sampling at pixel centers. Depth is view-space distance,
//! interpolated perspective-correctly; a fragment is kept only when it is
//! strictly nearer than what the depth buffer holds.

use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector3, Vector4};

use super::image::PixelGrid;
use super::mesh::{tessellate, MeshError, TriangleMesh};
use crate::color::Rgb;
use crate::multiview::ViewCamera;
use crate::scene::{Scene, Shape};

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: f64 = (1 << SUBPIXEL_BITS) as f64;
const HALF_PIXEL: i64 = 1 << (SUBPIXEL_BITS - 1);

/// Color plus depth buffer for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct Framebuffer {
    pub color: PixelGrid,
    /// View-space depth per pixel; `+inf` where nothing was drawn.
    pub depth: Vec<f64>,
}

pub fn rgba8(color: Rgb) -> [u8; 4] {
    let [r, g, b] = color.to_rgb8();
    [r, g, b, 255]
}

impl Framebuffer {
    pub fn new(width: u32, height: u32, background: Rgb) -> Self {
        Self {
            color: PixelGrid::filled(width, height, rgba8(background)),
            depth: vec![f64::INFINITY; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.color.width()
    }

    pub fn height(&self) -> u32 {
        self.color.height()
    }

    pub fn depth_at(&self, x: u32, y: u32) -> f64 {
        self.depth[y as usize * self.width() as usize + x as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tessellation {
    pub sphere_lat: u32,
    pub sphere_radial: u32,
    pub cylinder_radial: u32,
}

impl Default for Tessellation {
    fn default() -> Self {
        Self {
            sphere_lat: 16,
            sphere_radial: 32,
            cylinder_radial: 32,
        }
    }
}

/// Holds unit-radius meshes for each shape; nodes scale them.
#[derive(Debug, Clone)]
pub struct Renderer {
    meshes: [TriangleMesh; 3],
}

impl Default for Renderer {
    fn default() -> Self {
        Self::new(Tessellation::default()).expect("default tessellation is valid")
    }
}

#[derive(Debug, Clone, Copy)]
struct ClipVertex {
    pos: Vector4<f64>,
    color: [f64; 3],
}

impl ClipVertex {
    fn lerp(&self, other: &ClipVertex, t: f64) -> ClipVertex {
        let c = |i: usize| self.color[i] + (other.color[i] - self.color[i]) * t;
        ClipVertex {
            pos: self.pos + (other.pos - self.pos) * t,
            color: [c(0), c(1), c(2)],
        }
    }
}

/// Signed distances to the six frustum planes; inside when all >= 0.
fn plane_distances(p: &Vector4<f64>) -> [f64; 6] {
    [
        p.w + p.x,
        p.w - p.x,
        p.w + p.y,
        p.w - p.y,
        p.w + p.z,
        p.w - p.z,
    ]
}

fn outcode(p: &Vector4<f64>) -> u8 {
    plane_distances(p).iter().enumerate().fold(
        0,
        |code, (i, d)| if *d < 0.0 { code | 1 << i } else { code },
    )
}

fn clip_polygon(poly: &mut Vec<ClipVertex>, scratch: &mut Vec<ClipVertex>, planes: u8) {
    for plane in 0..6 {
        if planes & (1 << plane) == 0 {
            continue;
        }
        scratch.clear();
        for i in 0..poly.len() {
            let a = &poly[i];
            let b = &poly[(i + 1) % poly.len()];
            let da = plane_distances(&a.pos)[plane];
            let db = plane_distances(&b.pos)[plane];
            if da >= 0.0 {
                scratch.push(*a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                scratch.push(a.lerp(b, da / (da - db)));
            }
        }
        std::mem::swap(poly, scratch);
        if poly.len() < 3 {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ScreenVertex {
    x: i64,
    y: i64,
    inv_w: f64,
    /// Color premultiplied by `inv_w` for perspective-correct interpolation.
    color_w: [f64; 3],
}

fn orient(a: &ScreenVertex, b: &ScreenVertex, px: i64, py: i64) -> i64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Pixels exactly on an edge belong to the triangle only for top and left
/// edges (y grows downward; interior on the positive side).
fn is_top_left(a: &ScreenVertex, b: &ScreenVertex) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    (dy == 0 && dx > 0) || dy < 0
}

struct Target<'a> {
    fb: &'a mut Framebuffer,
    width: i64,
    height: i64,
}

impl Target<'_> {
    fn to_screen(&self, v: &ClipVertex) -> ScreenVertex {
        let inv_w = 1.0 / v.pos.w;
        let sx = (v.pos.x * inv_w + 1.0) * 0.5 * self.width as f64;
        let sy = (1.0 - v.pos.y * inv_w) * 0.5 * self.height as f64;
        ScreenVertex {
            x: (sx * SUBPIXEL).round() as i64,
            y: (sy * SUBPIXEL).round() as i64,
            inv_w,
            color_w: v.color.map(|c| c * inv_w),
        }
    }

    fn triangle(
        &mut self,
        tri: [ClipVertex; 3],
        poly: &mut Vec<ClipVertex>,
        scratch: &mut Vec<ClipVertex>,
    ) {
        let codes = tri.map(|v| outcode(&v.pos));
        if codes[0] & codes[1] & codes[2] != 0 {
            return;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &tri {
            for i in 0..3 {
                lo[i] = lo[i].min(v.color[i]);
                hi[i] = hi[i].max(v.color[i]);
            }
        }
        let crossing = codes[0] | codes[1] | codes[2];
        if crossing == 0 {
            let s = tri.map(|v| self.to_screen(&v));
            self.raster(s[0], s[1], s[2], lo, hi);
            return;
        }
        poly.clear();
        poly.extend_from_slice(&tri);
        clip_polygon(poly, scratch, crossing);
        if poly.len() < 3 {
            return;
        }
        let s: Vec<ScreenVertex> = poly.iter().map(|v| self.to_screen(v)).collect();
        for i in 1..s.len() - 1 {
            self.raster(s[0], s[i], s[i + 1], lo, hi);
        }
    }

    fn raster(
        &mut self,
        v0: ScreenVertex,
        v1: ScreenVertex,
        v2: ScreenVertex,
        lo: [f64; 3],
        hi: [f64; 3],
    ) {
        // Counter-clockwise in NDC is clockwise once y points down, which
        // gives a negative area here. Everything else is culled.
        let area = orient(&v0, &v1, v2.x, v2.y);
        if area >= 0 {
            return;
        }
        let (v1, v2) = (v2, v1);
        let area = -area;

        let min_x = v0.x.min(v1.x).min(v2.x);
        let max_x = v0.x.max(v1.x).max(v2.x);
        let min_y = v0.y.min(v1.y).min(v2.y);
        let max_y = v0.y.max(v1.y).max(v2.y);
        let unit = 1i64 << SUBPIXEL_BITS;
        let first_px = ((min_x - HALF_PIXEL + unit - 1).div_euclid(unit)).max(0);
        let last_px = ((max_x - HALF_PIXEL).div_euclid(unit)).min(self.width - 1);
        let first_py = ((min_y - HALF_PIXEL + unit - 1).div_euclid(unit)).max(0);
        let last_py = ((max_y - HALF_PIXEL).div_euclid(unit)).min(self.height - 1);
        if first_px > last_px || first_py > last_py {
            return;
        }

        let edges = [(v1, v2), (v2, v0), (v0, v1)];
        let bias = edges.map(|(a, b)| if is_top_left(&a, &b) { 0 } else { -1 });
        let step_x = edges.map(|(a, b)| -(b.y - a.y) * unit);
        let step_y = edges.map(|(a, b)| (b.x - a.x) * unit);
        let origin_x = first_px * unit + HALF_PIXEL;
        let origin_y = first_py * unit + HALF_PIXEL;
        let mut row = [0usize, 1, 2].map(|i| orient(&edges[i].0, &edges[i].1, origin_x, origin_y));

        let inv_area = 1.0 / area as f64;
        let verts = [v0, v1, v2];
        let width = self.width as usize;

        for py in first_py..=last_py {
            let mut e = row;
            for px in first_px..=last_px {
                if e[0] + bias[0] >= 0 && e[1] + bias[1] >= 0 && e[2] + bias[2] >= 0 {
                    let b = e.map(|w| w as f64 * inv_area);
                    let inv_w =
                        b[0] * verts[0].inv_w + b[1] * verts[1].inv_w + b[2] * verts[2].inv_w;
                    let depth = 1.0 / inv_w;
                    let idx = py as usize * width + px as usize;
                    if depth < self.fb.depth[idx] {
                        self.fb.depth[idx] = depth;
                        let mut rgba = [0u8, 0, 0, 255];
                        for c in 0..3 {
                            let v = (b[0] * verts[0].color_w[c]
                                + b[1] * verts[1].color_w[c]
                                + b[2] * verts[2].color_w[c])
                                * depth;
                            rgba[c] = (v.clamp(lo[c], hi[c]).clamp(0.0, 1.0) * 255.0).round() as u8;
                        }
                        self.fb.color.set(px as u32, py as u32, rgba);
                    }
                }
                for i in 0..3 {
                    e[i] += step_x[i];
                }
            }
            for i in 0..3 {
                row[i] += step_y[i];
            }
        }
    }
}

impl Renderer {
    pub fn new(tessellation: Tessellation) -> Result<Self, MeshError> {
        let t = tessellation;
        Ok(Self {
            meshes: [
                tessellate(Shape::Sphere, 1.0, t.sphere_lat, t.sphere_radial)?,
                tessellate(Shape::Cube, 1.0, 0, 0)?,
                tessellate(Shape::Cylinder, 1.0, 0, t.cylinder_radial)?,
            ],
        })
    }

    pub fn mesh(&self, shape: Shape) -> &TriangleMesh {
        match shape {
            Shape::Sphere => &self.meshes[0],
            Shape::Cube => &self.meshes[1],
            Shape::Cylinder => &self.meshes[2],
        }
    }

    /// Render `scene` through one view into a fresh framebuffer.
    pub fn render_view(
        &self,
        scene: &Scene,
        view: &ViewCamera,
        width: u32,
        height: u32,
    ) -> Framebuffer {
        let mut fb = Framebuffer::new(width, height, scene.background);
        let mvp: Matrix4<f64> = view.projection * view.view_transform;
        let light = &scene.lighting;
        let toward_light = -Vector3::from(light.direction).normalize();

        let mut target = Target {
            fb: &mut fb,
            width: width as i64,
            height: height as i64,
        };
        let mut clip = Vec::new();
        let mut poly = Vec::with_capacity(12);
        let mut scratch = Vec::with_capacity(12);

        for node in &scene.nodes {
            let mesh = self.mesh(node.shape);
            let center = Vector3::from(node.position);
            let base = node.color.components();
            clip.clear();
            clip.extend(mesh.vertices.iter().map(|v| {
                let world = center + v.position * node.radius;
                let lambert = v.normal.dot(&toward_light).max(0.0);
                let k = (light.ambient + light.diffuse * lambert).min(1.0);
                ClipVertex {
                    pos: mvp * world.push(1.0),
                    color: base.map(|c| c * k),
                }
            }));
            for t in &mesh.triangles {
                let tri = t.map(|i| clip[i as usize]);
                target.triangle(tri, &mut poly, &mut scratch);
            }
        }
        fb
    }
}

pub(crate) fn default_renderer() -> &'static Renderer {
    static DEFAULT: OnceLock<Renderer> = OnceLock::new();
    DEFAULT.get_or_init(Renderer::default)
}

/// Render with the default tessellation.
pub fn render_view(scene: &Scene, view: &ViewCamera, width: u32, height: u32) -> Framebuffer {
    default_renderer().render_view(scene, view, width, height)
}
