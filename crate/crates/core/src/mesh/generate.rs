//! Deterministic built-in mesh families.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{refine_mesh, Mesh};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::linalg::Point;

fn refine_times(mut mesh: Mesh, level: usize, geometry: &DomainGeometry) -> Result<Mesh> {
    for _ in 0..level {
        mesh = refine_mesh(&mesh, geometry)?;
    }
    Ok(mesh)
}

/// Disc mesh: level 0 has a center vertex, an inner hexagon at half radius and
/// twelve vertices on the circle (24 triangles); each level red-refines once.
pub fn generate_disc_mesh(level: usize, geometry: &DomainGeometry) -> Result<Mesh> {
    let DomainGeometry::Circle { center, radius } = *geometry else {
        return Err(Error::InvalidInput("disc mesh needs a circle geometry".into()));
    };
    let at = |r: f64, theta: f64| -> Point {
        [center[0] + r * theta.cos(), center[1] + r * theta.sin(), 0.0]
    };
    let mut vertices = vec![[center[0], center[1], 0.0]];
    for i in 0..6 {
        vertices.push(at(0.5 * radius, i as f64 * PI / 3.0));
    }
    for j in 0..12 {
        vertices.push(at(radius, j as f64 * PI / 6.0));
    }
    let inner = |i: usize| 1 + i % 6;
    let outer = |j: usize| 7 + j % 12;
    let mut elements = Vec::with_capacity(24);
    for i in 0..6 {
        elements.push(vec![0, inner(i), inner(i + 1)]);
        elements.push(vec![inner(i), outer(2 * i), outer(2 * i + 1)]);
        elements.push(vec![inner(i), outer(2 * i + 1), inner(i + 1)]);
        elements.push(vec![inner(i + 1), outer(2 * i + 1), outer(2 * i + 2)]);
    }
    refine_times(Mesh::new(2, vertices, elements)?, level, geometry)
}

/// Coarse ball: the cube surface split into 48 triangles (face centers,
/// corners and edge midpoints pushed radially onto the sphere), each joined
/// to the center.
pub fn ball_coarse_mesh(geometry: &DomainGeometry) -> Result<Mesh> {
    let DomainGeometry::Sphere { center, radius } = *geometry else {
        return Err(Error::InvalidInput("ball mesh needs a sphere geometry".into()));
    };
    let mut ids: HashMap<[i32; 3], usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut id = |v: [i32; 3], vertices: &mut Vec<Point>| -> usize {
        *ids.entry(v).or_insert_with(|| {
            let n = ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
            let s = if n > 0.0 { radius / n } else { 0.0 };
            vertices.push([
                center[0] + s * v[0] as f64,
                center[1] + s * v[1] as f64,
                center[2] + s * v[2] as f64,
            ]);
            vertices.len() - 1
        })
    };
    let origin = id([0, 0, 0], &mut vertices);
    let cycle = [(1, 1), (-1, 1), (-1, -1), (1, -1)];
    let mut elements = Vec::with_capacity(48);
    for axis in 0..3 {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        for sign in [1, -1] {
            let mut fc = [0; 3];
            fc[axis] = sign;
            let face_center = id(fc, &mut vertices);
            for i in 0..4 {
                let corner = |k: usize| {
                    let mut p = [0; 3];
                    p[axis] = sign;
                    p[b] = cycle[k % 4].0;
                    p[c] = cycle[k % 4].1;
                    p
                };
                let (p, q) = (corner(i), corner(i + 1));
                let m = [(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2];
                let (ci, cj, mi) = (
                    id(p, &mut vertices),
                    id(q, &mut vertices),
                    id(m, &mut vertices),
                );
                elements.push(vec![origin, face_center, ci, mi]);
                elements.push(vec![origin, face_center, mi, cj]);
            }
        }
    }
    Mesh::new(3, vertices, elements)
}

/// Ball mesh: 48 tetrahedra at level 0, 8x more per level.
pub fn generate_ball_mesh(level: usize, geometry: &DomainGeometry) -> Result<Mesh> {
    refine_times(ball_coarse_mesh(geometry)?, level, geometry)
}

/// Polyhedral domain spanned by the coarse ball mesh, refined without
/// boundary projection.
pub fn generate_polyhedron_mesh(level: usize, sphere: &DomainGeometry) -> Result<Mesh> {
    refine_times(ball_coarse_mesh(sphere)?, level, &DomainGeometry::Polygonal)
}

/// Unit square split into `n x n` cells of two triangles each.
pub fn unit_square_grid(n: usize) -> Mesh {
    assert!(n >= 1);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            elements.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            elements.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    Mesh::new(2, vertices, elements).expect("grid is valid")
}

/// Unit square: two triangles at level 0, red-refined `level` times.
pub fn generate_square_mesh(level: usize) -> Result<Mesh> {
    refine_times(unit_square_grid(1), level, &DomainGeometry::Polygonal)
}
