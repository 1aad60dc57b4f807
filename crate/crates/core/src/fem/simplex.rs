//! Reference simplex geometry.
//!
//! Vertex 0 is the origin and vertex `i > 0` is the unit vector `e_{i-1}`.
//! Local face `f` is the facet opposite vertex `f`; its vertices are the
//! remaining local vertices in increasing order.

use crate::linalg::{Point, ORIGIN};

pub fn vertex(_dim: usize, i: usize) -> Point {
    let mut p = ORIGIN;
    if i > 0 {
        p[i - 1] = 1.0;
    }
    p
}

pub fn vertices(dim: usize) -> Vec<Point> {
    (0..=dim).map(|i| vertex(dim, i)).collect()
}

/// Local vertex indices of face `face`.
pub fn face_vertices(dim: usize, face: usize) -> Vec<usize> {
    (0..=dim).filter(|&v| v != face).collect()
}

/// Measure of the reference face (length in 2D, area in 3D).
pub fn face_measure(dim: usize, face: usize) -> f64 {
    match (dim, face) {
        (2, 0) => std::f64::consts::SQRT_2,
        (2, _) => 1.0,
        (3, 0) => 3f64.sqrt() / 2.0,
        (3, _) => 0.5,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Measure of the reference simplex.
pub fn volume(dim: usize) -> f64 {
    match dim {
        2 => 0.5,
        3 => 1.0 / 6.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Outward unit normal of a reference face.
pub fn reference_normal(dim: usize, face: usize) -> Point {
    let mut n = ORIGIN;
    if face == 0 {
        let c = 1.0 / (dim as f64).sqrt();
        n[..dim].fill(c);
    } else {
        n[face - 1] = -1.0;
    }
    n
}

/// Barycentric coordinates `(1 - sum x, x_1, ..., x_d)`.
pub fn barycentric(dim: usize, x: &Point) -> [f64; 4] {
    let mut lam = [0.0; 4];
    lam[0] = 1.0 - x[..dim].iter().sum::<f64>();
    lam[1..=dim].copy_from_slice(&x[..dim]);
    lam
}

/// Point on the reference simplex with barycentric weights `bary` attached to
/// the local vertices `verts`.
pub fn face_point(dim: usize, verts: &[usize], bary: &[f64; 3]) -> Point {
    let mut p = ORIGIN;
    for (&v, &b) in verts.iter().zip(bary.iter()) {
        let q = vertex(dim, v);
        for c in 0..dim {
            p[c] += b * q[c];
        }
    }
    p
}

/// Number of Lagrange nodes of degree `k` on a `dim`-simplex, `C(k+d, d)`.
pub fn num_nodes(dim: usize, k: usize) -> usize {
    (1..=dim).fold(1, |acc, i| acc * (k + i) / i)
}
