//! Independent oracles shared by the core tests and the acceptance suite.
//! Nothing in here calls into the library's math; it recomputes from the
//! plain definitions.
#![allow(dead_code)]

pub mod csv_cases;

use holoviz_core::color::Rgb;
use holoviz_core::multiview::QuiltConfig;
use holoviz_core::scene::{OrbitCamera, Scene, SceneNode, Shape};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Per-column (name, min, max, mean) of the Iris file, computed once with a
/// stand-alone script over the raw text and frozen here.
pub const IRIS_COLUMNS: [(&str, f64, f64, f64); 4] = [
    ("sepal.length", 4.3, 7.9, 5.843333333333335),
    ("sepal.width", 2.0, 4.4, 3.057333333333334),
    ("petal.length", 1.0, 6.9, 3.7580000000000027),
    ("petal.width", 0.1, 2.5, 1.199333333333334),
];

pub const IRIS_VARIETIES: [&str; 3] = ["Setosa", "Versicolor", "Virginica"];

pub type V3 = [f64; 3];

pub fn dot(u: V3, v: V3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub fn sub(u: V3, v: V3) -> V3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

pub fn add_scaled(u: V3, v: V3, k: f64) -> V3 {
    [u[0] + v[0] * k, u[1] + v[1] * k, u[2] + v[2] * k]
}

pub fn unit(u: V3) -> V3 {
    let n = dot(u, u).sqrt();
    [u[0] / n, u[1] / n, u[2] / n]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Eye and (forward, right, up) basis of an orbit camera.
pub struct Basis {
    pub eye: V3,
    pub forward: V3,
    pub right: V3,
    pub up: V3,
}

pub fn basis(cam: &OrbitCamera) -> Basis {
    let (ce, se) = (cam.elevation.cos(), cam.elevation.sin());
    let (ca, sa) = (cam.azimuth.cos(), cam.azimuth.sin());
    let t = cam.target;
    let d = cam.distance;
    let eye = [t[0] + d * ce * sa, t[1] + d * se, t[2] + d * ce * ca];
    let forward = unit(sub(t, eye));
    let right = unit(cross(forward, [0.0, 1.0, 0.0]));
    let up = cross(right, forward);
    Basis {
        eye,
        forward,
        right,
        up,
    }
}

/// Glfrustum-style projection of `p` for a camera slid `offset` along its
/// right axis, with the near-plane window shifted so the focal-plane
/// rectangle matches the unshifted camera.
pub fn off_axis_ndc(cam: &OrbitCamera, cfg: &QuiltConfig, offset: f64, p: V3) -> [f64; 2] {
    let b = basis(cam);
    let eye = add_scaled(b.eye, b.right, offset);
    let rel = sub(p, eye);
    let (xe, ye, depth) = (dot(rel, b.right), dot(rel, b.up), dot(rel, b.forward));
    let n = cam.near;
    let f = cfg.focal_distance.unwrap_or(cam.distance);
    let half_h = n * (cam.vertical_fov / 2.0).tan();
    let half_w = half_h * cfg.aspect();
    let shift = -offset * n / f;
    let (l, r) = (shift - half_w, shift + half_w);
    let xn = xe * n / depth;
    let yn = ye * n / depth;
    [(2.0 * xn - (r + l)) / (r - l), yn / half_h]
}

/// World-space ray through the center of pixel `(px, py)`; row 0 on top.
pub fn pixel_ray(cam: &OrbitCamera, width: u32, height: u32, px: u32, py: u32) -> (V3, V3) {
    let b = basis(cam);
    let aspect = width as f64 / height as f64;
    let half_h = (cam.vertical_fov / 2.0).tan();
    let nx = (px as f64 + 0.5) / width as f64 * 2.0 - 1.0;
    let ny = 1.0 - (py as f64 + 0.5) / height as f64 * 2.0;
    let dir = add_scaled(
        add_scaled(b.forward, b.right, nx * half_h * aspect),
        b.up,
        ny * half_h,
    );
    (b.eye, unit(dir))
}

/// Nearest positive hit distance of a ray against a sphere.
pub fn ray_sphere(origin: V3, dir: V3, center: V3, radius: f64) -> Option<f64> {
    let oc = sub(origin, center);
    let b = dot(oc, dir);
    let c = dot(oc, oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t > 0.0).then_some(t)
}

/// Exact silhouette mask of one sphere, row-major.
pub fn sphere_mask(
    cam: &OrbitCamera,
    width: u32,
    height: u32,
    center: V3,
    radius: f64,
) -> Vec<bool> {
    let mut mask = Vec::with_capacity(width as usize * height as usize);
    for py in 0..height {
        for px in 0..width {
            let (o, d) = pixel_ray(cam, width, height, px, py);
            mask.push(ray_sphere(o, d, center, radius).is_some());
        }
    }
    mask
}

/// `(|rendered xor analytic|, |analytic|)` in pixels.
pub fn mask_discrepancy(rendered: &[bool], analytic: &[bool]) -> (usize, usize) {
    let diff = rendered
        .iter()
        .zip(analytic)
        .filter(|(a, b)| a != b)
        .count();
    (diff, analytic.iter().filter(|&&b| b).count())
}

/// A head-on camera looking down -z from `(0, 0, distance)`.
pub fn head_on(distance: f64) -> OrbitCamera {
    OrbitCamera {
        azimuth: 0.0,
        elevation: 0.0,
        distance,
        ..OrbitCamera::default()
    }
}

fn bounding_factor(shape: Shape) -> f64 {
    match shape {
        Shape::Sphere => 1.0,
        Shape::Cube => 3f64.sqrt(),
        Shape::Cylinder => 2f64.sqrt(),
    }
}

/// `count` scenes of two nodes whose depth ranges along the view axis do not
/// overlap, from a fixed seed.
pub fn disjoint_pairs(count: usize, seed: u64) -> Vec<Scene> {
    let mut rng = StdRng::seed_from_u64(seed);
    let cam = OrbitCamera::default();
    let b = basis(&cam);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let node = |rng: &mut StdRng| {
            let shape = Shape::ALL[rng.random_range(0..3)];
            SceneNode {
                shape,
                position: [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ],
                radius: rng.random_range(0.05..0.5),
                color: Rgb::new(rng.random(), rng.random(), rng.random()),
            }
        };
        let (a, c) = (node(&mut rng), node(&mut rng));
        let depth = |n: &SceneNode| dot(sub(n.position, b.eye), b.forward);
        let reach = |n: &SceneNode| n.radius * bounding_factor(n.shape);
        if (depth(&a) - depth(&c)).abs() <= reach(&a) + reach(&c) + 1e-3 {
            continue;
        }
        out.push(Scene::new(format!("pair{}", out.len()), vec![a, c]));
    }
    out
}

/// The Iris file through the default pipeline.
pub fn iris_scene() -> Scene {
    use holoviz_core::ingest::{CsvOptions, Dataset};
    use holoviz_core::mapping::{build_scene, default_mapping};
    let table =
        holoviz_core::ingest::parse_csv(IRIS_CSV.as_bytes(), &CsvOptions::default()).unwrap();
    let dataset = Dataset::with_id("iris", table);
    let mapping = default_mapping(&dataset).unwrap();
    build_scene("iris", &dataset, &mapping).unwrap().0
}
