//! Uniform red refinement with projection of new boundary vertices.

use std::collections::HashMap;

use super::Mesh;
use crate::error::Result;
use crate::geometry::DomainGeometry;
use crate::linalg::{dist, Point};

/// Split every triangle into 4 and every tetrahedron into 8. Midpoints of
/// edges lying on boundary faces are projected onto `Γ`.
pub fn refine_mesh(mesh: &Mesh, geometry: &DomainGeometry) -> Result<Mesh> {
    let dim = mesh.dim();
    let boundary_edges = mesh.boundary_edges();
    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();

    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> Result<usize> {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = midpoint.get(&key) {
            return Ok(v);
        }
        let (p, q) = (vertices[key.0], vertices[key.1]);
        let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
        if boundary_edges.contains(&key) {
            m = geometry.project(&m)?;
        }
        let id = vertices.len();
        vertices.push(m);
        midpoint.insert(key, id);
        Ok(id)
    };

    let mut elements = Vec::with_capacity(mesh.num_elements() * if dim == 2 { 4 } else { 8 });
    for conn in mesh.elements() {
        if dim == 2 {
            let (a, b, c) = (conn[0], conn[1], conn[2]);
            let ab = mid(a, b, &mut vertices)?;
            let bc = mid(b, c, &mut vertices)?;
            let ca = mid(c, a, &mut vertices)?;
            elements.push(vec![a, ab, ca]);
            elements.push(vec![ab, b, bc]);
            elements.push(vec![ca, bc, c]);
            elements.push(vec![ab, bc, ca]);
        } else {
            let v = [conn[0], conn[1], conn[2], conn[3]];
            let mut m = [[0usize; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    let id = mid(v[i], v[j], &mut vertices)?;
                    m[i][j] = id;
                    m[j][i] = id;
                }
            }
            elements.push(vec![v[0], m[0][1], m[0][2], m[0][3]]);
            elements.push(vec![m[0][1], v[1], m[1][2], m[1][3]]);
            elements.push(vec![m[0][2], m[1][2], v[2], m[2][3]]);
            elements.push(vec![m[0][3], m[1][3], m[2][3], v[3]]);
            // inner octahedron: split along its shortest diagonal
            let diagonals = [
                (m[0][1], m[2][3], [m[0][2], m[0][3], m[1][3], m[1][2]]),
                (m[0][2], m[1][3], [m[0][1], m[0][3], m[2][3], m[1][2]]),
                (m[0][3], m[1][2], [m[0][1], m[0][2], m[2][3], m[1][3]]),
            ];
            let (p, q, ring) = diagonals
                .iter()
                .min_by(|x, y| {
                    dist(&vertices[x.0], &vertices[x.1])
                        .total_cmp(&dist(&vertices[y.0], &vertices[y.1]))
                })
                .copied()
                .unwrap();
            for i in 0..4 {
                elements.push(vec![p, q, ring[i], ring[(i + 1) % 4]]);
            }
        }
    }
    Mesh::new(dim, vertices, elements)
}
