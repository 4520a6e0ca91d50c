//! Triangle meshes for the three node shapes, centered at the origin.
//! Triangles wind counter-clockwise seen from outside.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use thiserror::Error;

use crate::scene::Shape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vertex>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("need at least 3 segments, got lat={lat} radial={radial}")]
    InvalidSegmentCount { lat: u32, radial: u32 },
    #[error("radius {0} must be positive")]
    InvalidRadius(f64),
}

impl TriangleMesh {
    fn push(&mut self, position: Vector3<f64>, normal: Vector3<f64>) -> u32 {
        self.vertices.push(Vertex { position, normal });
        (self.vertices.len() - 1) as u32
    }
}

/// Build a mesh for `shape`. Spheres use a latitude/longitude grid; cylinders
/// use `radial_segments` wall quads plus two fan caps and stand `2 * radius`
/// tall; cubes have 24 vertices so each face keeps its own normal. Segment
/// counts are ignored where a shape does not use them.
pub fn tessellate(
    shape: Shape,
    radius: f64,
    lat_segments: u32,
    radial_segments: u32,
) -> Result<TriangleMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::InvalidRadius(radius));
    }
    let bad_segments = match shape {
        Shape::Sphere => lat_segments < 3 || radial_segments < 3,
        Shape::Cylinder => radial_segments < 3,
        Shape::Cube => false,
    };
    if bad_segments {
        return Err(MeshError::InvalidSegmentCount {
            lat: lat_segments,
            radial: radial_segments,
        });
    }
    Ok(match shape {
        Shape::Sphere => sphere(radius, lat_segments, radial_segments),
        Shape::Cube => cube(radius),
        Shape::Cylinder => cylinder(radius, radial_segments),
    })
}

fn around(j: u32, segments: u32) -> (f64, f64) {
    // Wrap so the seam column reuses column 0's exact coordinates.
    (TAU * (j % segments) as f64 / segments as f64).sin_cos()
}

fn sphere(radius: f64, lat: u32, radial: u32) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    for i in 0..=lat {
        let (sin_p, cos_p) = (PI * i as f64 / lat as f64).sin_cos();
        for j in 0..=radial {
            let (sin_t, cos_t) = around(j, radial);
            let n = Vector3::new(sin_p * sin_t, cos_p, sin_p * cos_t);
            mesh.push(n * radius, n);
        }
    }
    let stride = radial + 1;
    for i in 0..lat {
        for j in 0..radial {
            let a = i * stride + j;
            let b = a + stride;
            let c = b + 1;
            let d = a + 1;
            // Pole rows collapse one triangle of each quad.
            if i != lat - 1 {
                mesh.triangles.push([a, b, c]);
            }
            if i != 0 {
                mesh.triangles.push([a, c, d]);
            }
        }
    }
    mesh
}

fn cube(radius: f64) -> TriangleMesh {
    let x = Vector3::x();
    let y = Vector3::y();
    let z = Vector3::z();
    // (normal, u, v) with u x v == normal.
    let faces = [
        (x, y, z),
        (-x, z, y),
        (y, z, x),
        (-y, x, z),
        (z, x, y),
        (-z, y, x),
    ];
    let mut mesh = TriangleMesh::default();
    for (n, u, v) in faces {
        let corners = [-u - v, u - v, u + v, -u + v];
        let base = mesh.vertices.len() as u32;
        for c in corners {
            mesh.push((n + c) * radius, n);
        }
        mesh.triangles.push([base, base + 1, base + 2]);
        mesh.triangles.push([base, base + 2, base + 3]);
    }
    mesh
}

fn cylinder(radius: f64, radial: u32) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    let ring: Vec<(f64, f64)> = (0..radial).map(|j| around(j, radial)).collect();

    let wall = mesh.vertices.len() as u32;
    for &(s, c) in &ring {
        let n = Vector3::new(s, 0.0, c);
        mesh.push(Vector3::new(s * radius, -radius, c * radius), n);
        mesh.push(Vector3::new(s * radius, radius, c * radius), n);
    }
    for j in 0..radial {
        let k = (j + 1) % radial;
        let (b0, t0) = (wall + 2 * j, wall + 2 * j + 1);
        let (b1, t1) = (wall + 2 * k, wall + 2 * k + 1);
        mesh.triangles.push([b0, b1, t1]);
        mesh.triangles.push([b0, t1, t0]);
    }

    for (y, up) in [(radius, true), (-radius, false)] {
        let n = Vector3::new(0.0, if up { 1.0 } else { -1.0 }, 0.0);
        let center = mesh.push(Vector3::new(0.0, y, 0.0), n);
        let first = mesh.vertices.len() as u32;
        for &(s, c) in &ring {
            mesh.push(Vector3::new(s * radius, y, c * radius), n);
        }
        for j in 0..radial {
            let a = first + j;
            let b = first + (j + 1) % radial;
            mesh.triangles
                .push(if up { [center, a, b] } else { [center, b, a] });
        }
    }
    mesh
}
