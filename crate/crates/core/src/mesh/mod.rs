//! Straight simplicial meshes with face connectivity.

mod generate;
pub mod gmsh;
mod refine;

use std::collections::{BTreeSet, HashMap};

pub use generate::{
    ball_coarse_mesh, generate_ball_mesh, generate_disc_mesh, generate_polyhedron_mesh,
    generate_square_mesh, unit_square_grid,
};
pub use gmsh::{load_gmsh, parse_gmsh, write_gmsh};
pub use refine::refine_mesh;

use crate::error::{Error, Result};
use crate::fem::simplex;
use crate::geometry::DomainGeometry;
use crate::linalg::{self, dist, Mat3, Point};

/// Tolerance for "vertex lies on Γ" and for duplicate vertex detection.
pub const ON_BOUNDARY_TOL: f64 = 1e-12;

/// One side of a face: the element, its local face index, and the map from
/// face vertex order to element-local face vertex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceIncidence {
    pub element: usize,
    pub local_face: usize,
    /// `face.vertices[j] == element[face_vertices(local_face)[perm[j]]]`.
    pub perm: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Global vertex ids in increasing order (`dim` entries used).
    pub vertices: [usize; 3],
    pub left: FaceIncidence,
    /// `None` marks a boundary face.
    pub right: Option<FaceIncidence>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn vertex_ids(&self, dim: usize) -> &[usize] {
        &self.vertices[..dim]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<[usize; 4]>,
    faces: Vec<Face>,
    element_faces: Vec<[usize; 4]>,
    boundary_faces: Vec<usize>,
}

impl Mesh {
    /// Build a mesh, reorienting elements with negative straight Jacobian and
    /// constructing face connectivity.
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if vertices.len() < dim + 1 || elements.is_empty() {
            return Err(Error::InvalidInput("mesh needs at least one element".into()));
        }
        let mut elems = Vec::with_capacity(elements.len());
        for (e, conn) in elements.iter().enumerate() {
            if conn.len() != dim + 1 {
                return Err(Error::InvalidInput(format!(
                    "element {e} has {} vertices, expected {}",
                    conn.len(),
                    dim + 1
                )));
            }
            let mut c = [usize::MAX; 4];
            for (slot, &v) in c.iter_mut().zip(conn) {
                if v >= vertices.len() {
                    return Err(Error::DanglingVertexReference { element: e, node: v });
                }
                *slot = v;
            }
            let pts: Vec<Point> = conn.iter().map(|&v| vertices[v]).collect();
            let det = affine_det(dim, &pts);
            let scale = (1..=dim)
                .map(|i| dist(&pts[0], &pts[i]))
                .fold(0.0, f64::max)
                .powi(dim as i32);
            if det.abs() <= 1e-14 * scale {
                return Err(Error::DegenerateElement(e));
            }
            if det < 0.0 {
                c.swap(dim - 1, dim);
            }
            elems.push(c);
        }
        let mut mesh = Self {
            dim,
            vertices,
            elements: elems,
            faces: Vec::new(),
            element_faces: Vec::new(),
            boundary_faces: Vec::new(),
        };
        mesh.build_faces()?;
        Ok(mesh)
    }

    fn build_faces(&mut self) -> Result<()> {
        let dim = self.dim;
        let mut lookup: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut element_faces = vec![[usize::MAX; 4]; self.elements.len()];
        for (e, conn) in self.elements.iter().enumerate() {
            for lf in 0..=dim {
                let local = simplex::face_vertices(dim, lf);
                let mut key = [usize::MAX; 3];
                for (k, &l) in key.iter_mut().zip(&local) {
                    *k = conn[l];
                }
                key[..dim].sort_unstable();
                let mut perm = [0; 3];
                for j in 0..dim {
                    perm[j] = local.iter().position(|&l| conn[l] == key[j]).unwrap();
                }
                let inc = FaceIncidence {
                    element: e,
                    local_face: lf,
                    perm,
                };
                match lookup.get(&key) {
                    Some(&f) => {
                        if faces[f].right.is_some() {
                            return Err(Error::InvalidInput(format!(
                                "face {:?} shared by more than two elements",
                                &key[..dim]
                            )));
                        }
                        faces[f].right = Some(inc);
                        element_faces[e][lf] = f;
                    }
                    None => {
                        lookup.insert(key, faces.len());
                        element_faces[e][lf] = faces.len();
                        faces.push(Face {
                            vertices: key,
                            left: inc,
                            right: None,
                        });
                    }
                }
            }
        }
        self.boundary_faces = (0..faces.len()).filter(|&f| faces[f].is_boundary()).collect();
        self.faces = faces;
        self.element_faces = element_faces;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Vertex ids of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..=self.dim]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.elements.iter().map(move |c| &c[..=self.dim])
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.element(e).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    /// Face id of local face `lf` of element `e`.
    pub fn element_face(&self, e: usize, lf: usize) -> usize {
        self.element_faces[e][lf]
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.len() - self.boundary_faces.len()
    }

    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_faces
            .iter()
            .flat_map(|&f| self.faces[f].vertex_ids(self.dim).to_vec())
            .collect()
    }

    /// Sorted vertex pairs of all edges lying on boundary faces.
    pub fn boundary_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &f in &self.boundary_faces {
            let v = self.faces[f].vertex_ids(self.dim);
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    out.insert((v[i].min(v[j]), v[i].max(v[j])));
                }
            }
        }
        out
    }

    /// Sorted vertex pairs of all edges.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for c in self.elements() {
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    out.insert((c[i].min(c[j]), c[i].max(c[j])));
                }
            }
        }
        out
    }

    /// Jacobian of the straight map from the reference simplex to element `e`.
    pub fn affine_jacobian(&self, e: usize) -> Mat3 {
        affine_jacobian(self.dim, &self.element_points(e))
    }

    pub fn affine_det(&self, e: usize) -> f64 {
        affine_det(self.dim, &self.element_points(e))
    }

    /// Longest edge length of element `e`.
    pub fn diameter(&self, e: usize) -> f64 {
        let p = self.element_points(e);
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max(dist(&p[i], &p[j]));
            }
        }
        d
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.diameter(e)).fold(0.0, f64::max)
    }

    /// Ratio of the largest to the smallest element diameter.
    pub fn diameter_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for e in 0..self.num_elements() {
            let d = self.diameter(e);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        hi / lo
    }

    /// Sum of straight element measures.
    pub fn straight_measure(&self) -> f64 {
        let fact = if self.dim == 2 { 0.5 } else { 1.0 / 6.0 };
        (0..self.num_elements()).map(|e| self.affine_det(e) * fact).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_elements();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(e) = stack.pop() {
            for lf in 0..=self.dim {
                let face = &self.faces[self.element_faces[e][lf]];
                let other = match face.right {
                    Some(r) if r.element == e => face.left.element,
                    Some(r) => r.element,
                    None => continue,
                };
                if !seen[other] {
                    seen[other] = true;
                    count += 1;
                    stack.push(other);
                }
            }
        }
        count == n
    }

    /// Check the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self, geometry: Option<&DomainGeometry>) -> std::result::Result<(), String> {
        let mut refs = vec![0usize; self.faces.len()];
        for e in 0..self.num_elements() {
            if !(self.affine_det(e) > 0.0) {
                return Err(format!("element {e} has non-positive determinant"));
            }
            for lf in 0..=self.dim {
                refs[self.element_faces[e][lf]] += 1;
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let expected = if face.is_boundary() { 1 } else { 2 };
            if refs[f] != expected {
                return Err(format!("face {f} referenced {} times", refs[f]));
            }
            for inc in std::iter::once(&face.left).chain(face.right.as_ref()) {
                let local = simplex::face_vertices(self.dim, inc.local_face);
                let conn = self.element(inc.element);
                for j in 0..self.dim {
                    if conn[local[inc.perm[j]]] != face.vertices[j] {
                        return Err(format!("face {f} permutation mismatch"));
                    }
                }
            }
        }
        if !self.is_connected() {
            return Err("mesh is not connected".into());
        }
        let mut sorted: Vec<(usize, Point)> = self.vertices.iter().copied().enumerate().collect();
        sorted.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]));
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if sorted[j].1[0] - sorted[i].1[0] > ON_BOUNDARY_TOL {
                    break;
                }
                if dist(&sorted[i].1, &sorted[j].1) <= ON_BOUNDARY_TOL {
                    return Err(format!("duplicate vertices {} and {}", sorted[i].0, sorted[j].0));
                }
            }
        }
        if let Some(g) = geometry {
            for v in self.boundary_vertices() {
                let phi = g.phi(&self.vertices[v]);
                if phi.abs() > ON_BOUNDARY_TOL {
                    return Err(format!("boundary vertex {v} off the boundary by {phi:e}"));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn affine_jacobian(dim: usize, pts: &[Point]) -> Mat3 {
    let mut j = [[0.0; 3]; 3];
    for c in 0..dim {
        let d = linalg::sub(&pts[c + 1], &pts[0]);
        for r in 0..dim {
            j[r][c] = d[r];
        }
    }
    j
}

pub(crate) fn affine_det(dim: usize, pts: &[Point]) -> f64 {
    linalg::det(&affine_jacobian(dim, pts), dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_has_three_boundary_faces() {
        let m = Mesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.boundary_faces().len(), 3);
        assert!(m.validate(None).is_ok());
    }

    #[test]
    fn reorients_clockwise_elements() {
        let m = Mesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 2, 1]],
        )
        .unwrap();
        assert!(m.affine_det(0) > 0.0);
    }

    #[test]
    fn rejects_dangling_and_degenerate() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(matches!(
            Mesh::new(2, pts.clone(), vec![vec![0, 1, 5]]),
            Err(Error::DanglingVertexReference { node: 5, .. })
        ));
        assert!(matches!(
            Mesh::new(2, pts, vec![vec![0, 1, 2]]),
            Err(Error::DegenerateElement(0))
        ));
    }

    #[test]
    fn handshake_on_square_grid() {
        let m = unit_square_grid(3);
        assert!(m.validate(Some(&DomainGeometry::Polygonal)).is_ok());
        for face in m.faces() {
            if let Some(r) = face.right {
                let set = |inc: &FaceIncidence| {
                    let mut v: Vec<usize> = simplex::face_vertices(2, inc.local_face)
                        .iter()
                        .map(|&l| m.element(inc.element)[l])
                        .collect();
                    v.sort();
                    v
                };
                assert_eq!(set(&face.left), set(&r));
            }
        }
        // Euler: V - E + F = 1
        let v = m.num_vertices() as i64;
        let e = m.edges().len() as i64;
        let f = m.num_elements() as i64;
        assert_eq!(v - e + f, 1);
    }
}
