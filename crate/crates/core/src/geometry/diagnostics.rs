//! Computable proxies for the distance between `F_h` and the exact geometry.

use super::GeometricMap;
use crate::error::Result;
use crate::fem::{self, simplex};
use crate::linalg::{self, dist, Point};
use crate::mesh::Mesh;

/// Total measure of the computational domain, `Σ_K ∫ det J`.
pub fn mapped_measure(map: &GeometricMap, mesh: &Mesh, order: usize) -> Result<f64> {
    let rule = fem::volume_quadrature(mesh.dim(), order)?;
    let tab = map.tabulate(&rule.points);
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        for (g, w) in tab.grads.iter().zip(&rule.weights) {
            total += w * linalg::det(&map.jacobian_from(e, g), mesh.dim());
        }
    }
    Ok(total)
}

/// Measure of the computational boundary `Γ_h`.
pub fn boundary_measure(map: &GeometricMap, mesh: &Mesh, order: usize) -> Result<f64> {
    let mut total = 0.0;
    for &f in mesh.boundary_faces() {
        let inc = mesh.face(f).left;
        let rule = fem::face_quadrature(mesh.dim(), order, inc.local_face)?;
        for (x, w) in rule.iter() {
            total += w * map.surface_frame(inc.element, inc.local_face, x)?.scale;
        }
    }
    Ok(total)
}

/// Largest `|φ(F_h(x̂))|` over boundary face quadrature points.
pub fn boundary_distance(map: &GeometricMap, mesh: &Mesh, order: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &f in mesh.boundary_faces() {
        let inc = mesh.face(f).left;
        let rule = fem::face_quadrature(mesh.dim(), order, inc.local_face)?;
        for x in &rule.points {
            let p = map.map_point(inc.element, x);
            worst = worst.max(map.geometry().phi(&p).abs());
        }
    }
    Ok(worst)
}

/// Largest `|F_h(x̂) - F_straight(x̂)|` over volume quadrature points.
pub fn straight_deviation(map: &GeometricMap, mesh: &Mesh, order: usize) -> Result<f64> {
    let dim = mesh.dim();
    let rule = fem::volume_quadrature(dim, order)?;
    let tab = map.tabulate(&rule.points);
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_elements() {
        if map.is_affine(e) {
            continue;
        }
        let pts = mesh.element_points(e);
        for (x, vals) in rule.points.iter().zip(&tab.values) {
            let lam = simplex::barycentric(dim, x);
            let mut s: Point = [0.0; 3];
            for (l, p) in lam.iter().zip(&pts) {
                s = linalg::add(&s, &linalg::scale(p, *l));
            }
            worst = worst.max(dist(&map.combine(e, vals), &s));
        }
    }
    Ok(worst)
}

/// Largest `‖J_{F_h} J_straight^{-1} - I‖_max` over volume quadrature points.
pub fn jacobian_deviation(map: &GeometricMap, mesh: &Mesh, order: usize) -> Result<f64> {
    let dim = mesh.dim();
    let rule = fem::volume_quadrature(dim, order)?;
    let tab = map.tabulate(&rule.points);
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_elements() {
        let a = mesh.affine_jacobian(e);
        let ainv = linalg::inverse(&a, linalg::det(&a, dim), dim);
        for g in &tab.grads {
            let j = map.jacobian_from(e, g);
            for r in 0..dim {
                for c in 0..dim {
                    let v: f64 = (0..dim).map(|l| j[r][l] * ainv[l][c]).sum();
                    let id = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((v - id).abs());
                }
            }
        }
    }
    Ok(worst)
}
