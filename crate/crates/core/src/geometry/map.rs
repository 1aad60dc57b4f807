//! Per-element degree-k Lagrange maps from the reference simplex onto curved
//! physical elements.

use std::collections::HashSet;

use super::DomainGeometry;
use crate::error::{Error, Result};
use crate::fem::{self, simplex, QuadratureRule, ReferenceElement};
use crate::linalg::{self, Mat3, Point, ORIGIN};
use crate::mesh::Mesh;

pub const MAX_MAP_DEGREE: usize = 4;

/// Normal and area-element data at a point of a reference face.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceFrame {
    /// Unit outward physical normal.
    pub normal: Point,
    /// Ratio of physical to reference surface measure, `det J |J^{-T} n̂|`.
    pub scale: f64,
    /// Unit outward reference normal.
    pub reference_normal: Point,
}

/// Map values and reference gradients tabulated at a fixed point set.
#[derive(Debug, Clone)]
pub struct MapTabulation {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<Point>>,
}

#[derive(Debug, Clone)]
pub struct GeometricMap {
    dim: usize,
    degree: usize,
    reference: ReferenceElement,
    control: Vec<Point>,
    affine: Vec<bool>,
    geometry: DomainGeometry,
}

/// Build `F_h` as the degree-k Lagrange interpolant of a blended map.
///
/// Nodes on boundary faces (or boundary edges in 3D) are projected onto `Γ`.
/// Every other node of an element touching the boundary is displaced by
/// `Σ c_S s_S² (P(p_S) − p_S)` over the element's boundary sub-simplices `S`,
/// where `s_S` is the barycentric mass of the node on `S`, `p_S` its
/// normalized point on `S`, and `c_S` an inclusion-exclusion weight. The
/// `s²` factor reproduces the quadratic part of the chord-to-arc gap exactly,
/// which keeps high-order reference derivatives of `F_h` small for k ≥ 3. For
/// k ≤ 2 every such displacement vanishes.
pub fn build_isoparametric_map(mesh: &Mesh, k: usize, geometry: &DomainGeometry) -> Result<GeometricMap> {
    if k == 0 || k > MAX_MAP_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: k,
            max: MAX_MAP_DEGREE,
        });
    }
    let dim = mesh.dim();
    let reference = ReferenceElement::new(dim, k);
    let n = reference.len();
    let boundary_faces: HashSet<Vec<usize>> = mesh
        .boundary_faces()
        .iter()
        .map(|&f| {
            let mut ids = mesh.face(f).vertex_ids(dim).to_vec();
            ids.sort_unstable();
            ids
        })
        .collect();
    let boundary_edges = mesh.boundary_edges();
    let vertices = mesh.vertices();

    // point Σ w_v x_v over (global vertex, weight) pairs sorted by global id,
    // so every element sharing a node computes bitwise the same value
    let combine = |support: &[(usize, f64)]| {
        let total: f64 = support.iter().map(|s| s.1).sum();
        let mut p = ORIGIN;
        for &(v, w) in support {
            for c in 0..dim {
                p[c] += w / total * vertices[v][c];
            }
        }
        (p, total)
    };

    let mut control = Vec::with_capacity(n * mesh.num_elements());
    let mut affine = Vec::with_capacity(mesh.num_elements());
    for conn in mesh.elements() {
        let mut sorted = conn.to_vec();
        sorted.sort_unstable();
        // boundary sub-simplices of this element with inclusion-exclusion weights
        let mut blend: Vec<(Vec<usize>, i32)> = Vec::new();
        if geometry.is_curved() {
            let faces: Vec<Vec<usize>> = (0..=dim)
                .map(|skip| sorted.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect())
                .filter(|f| boundary_faces.contains(f))
                .collect();
            if dim == 3 {
                for i in 0..4 {
                    for j in i + 1..4 {
                        let edge = (sorted[i], sorted[j]);
                        if boundary_edges.contains(&edge) {
                            let shared = faces.iter().filter(|f| f.contains(&edge.0) && f.contains(&edge.1)).count();
                            let c = 1 - shared as i32;
                            if c != 0 {
                                blend.push((vec![edge.0, edge.1], c));
                            }
                        }
                    }
                }
            }
            blend.extend(faces.into_iter().map(|f| (f, 1)));
        }

        let mut straight = true;
        for i in 0..n {
            let alpha = reference.multi_index(i);
            let mut support: Vec<(usize, f64)> = (0..=dim)
                .filter(|&v| alpha[v] > 0)
                .map(|v| (conn[v], alpha[v] as f64 / k as f64))
                .collect();
            support.sort_unstable_by_key(|s| s.0);
            let (mut p, _) = combine(&support);
            if blend.is_empty() {
                control.push(p);
                continue;
            }
            // net weight per distinct restriction of a sub-simplex to the support
            let mut terms: Vec<(Vec<usize>, i32)> = Vec::new();
            for (simplex, c) in &blend {
                let key: Vec<usize> = support.iter().map(|s| s.0).filter(|v| simplex.contains(v)).collect();
                if key.len() < 2 {
                    continue;
                }
                match terms.iter_mut().find(|t| t.0 == key) {
                    Some(t) => t.1 += c,
                    None => terms.push((key, *c)),
                }
            }
            terms.sort();
            let mut shift = ORIGIN;
            for (key, weight) in terms.iter().filter(|t| t.1 != 0) {
                let part: Vec<(usize, f64)> = support.iter().copied().filter(|s| key.contains(&s.0)).collect();
                let (q, s) = combine(&part);
                let target = geometry.project(&q)?;
                let w = *weight as f64 * s * s;
                for c in 0..dim {
                    shift[c] += w * (target[c] - q[c]);
                }
            }
            for c in 0..dim {
                p[c] += shift[c];
            }
            if shift != ORIGIN {
                straight = false;
            }
            control.push(p);
        }
        affine.push(straight);
    }
    let map = GeometricMap {
        dim,
        degree: k,
        reference,
        control,
        affine,
        geometry: geometry.clone(),
    };
    let rule = fem::volume_quadrature(dim, fem::default_volume_exactness(k))?;
    map.check_positive(&rule)?;
    Ok(map)
}

impl GeometricMap {
    /// Straight (degree-1) map of a mesh; the geometry is kept for boundary
    /// data evaluation.
    pub fn straight(mesh: &Mesh, geometry: &DomainGeometry) -> Result<Self> {
        build_isoparametric_map(mesh, 1, geometry)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_elements(&self) -> usize {
        self.affine.len()
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geometry
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn is_affine(&self, e: usize) -> bool {
        self.affine[e]
    }

    pub fn control_points(&self, e: usize) -> &[Point] {
        let n = self.reference.len();
        &self.control[e * n..(e + 1) * n]
    }

    /// Point of `Γ` corresponding to a point of the computational boundary.
    pub fn exact_boundary_point(&self, x: &Point) -> Result<Point> {
        self.geometry.project(x)
    }

    pub fn tabulate(&self, points: &[Point]) -> MapTabulation {
        MapTabulation {
            values: points.iter().map(|p| self.reference.eval(p)).collect(),
            grads: points.iter().map(|p| self.reference.grad(p)).collect(),
        }
    }

    pub fn map_point(&self, e: usize, x: &Point) -> Point {
        self.combine(e, &self.reference.eval(x))
    }

    pub(crate) fn combine(&self, e: usize, values: &[f64]) -> Point {
        let mut p = ORIGIN;
        for (c, v) in self.control_points(e).iter().zip(values) {
            for i in 0..self.dim {
                p[i] += v * c[i];
            }
        }
        p
    }

    pub(crate) fn jacobian_from(&self, e: usize, grads: &[Point]) -> Mat3 {
        let mut j = [[0.0; 3]; 3];
        for (c, g) in self.control_points(e).iter().zip(grads) {
            for r in 0..self.dim {
                for s in 0..self.dim {
                    j[r][s] += c[r] * g[s];
                }
            }
        }
        j
    }

    /// Jacobian matrix and determinant at `x`; fails if the determinant is not
    /// positive.
    pub fn jacobian(&self, e: usize, x: &Point) -> Result<(Mat3, f64)> {
        let j = self.jacobian_from(e, &self.reference.grad(x));
        let det = linalg::det(&j, self.dim);
        if !(det > 0.0) {
            return Err(Error::DegenerateMap { element: e, det });
        }
        Ok((j, det))
    }

    /// Frame on local face `face` of element `e` at the reference point `x`
    /// (which must lie on that face).
    pub fn surface_frame(&self, e: usize, face: usize, x: &Point) -> Result<SurfaceFrame> {
        let (j, det) = self.jacobian(e, x)?;
        Ok(frame_from_jacobian(&j, det, self.dim, face))
    }

    /// Verify `det J > 0` at every point of `rule` on every element.
    pub fn check_positive(&self, rule: &QuadratureRule) -> Result<()> {
        let tab = self.tabulate(&rule.points);
        for e in 0..self.num_elements() {
            for g in &tab.grads {
                let det = linalg::det(&self.jacobian_from(e, g), self.dim);
                if !(det > 0.0) {
                    return Err(Error::DegenerateMap { element: e, det });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn frame_from_jacobian(j: &Mat3, det: f64, dim: usize, face: usize) -> SurfaceFrame {
    let reference_normal = simplex::reference_normal(dim, face);
    let inv = linalg::inverse(j, det, dim);
    let w = linalg::mat_t_vec(&inv, &reference_normal, dim);
    let len = linalg::norm(&w);
    SurfaceFrame {
        normal: linalg::scale(&w, 1.0 / len),
        scale: det * len,
        reference_normal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disc_mesh;

    fn reference_triangle(scale: f64) -> Mesh {
        Mesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [scale, 0.0, 0.0], [0.0, scale, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn identity_map() {
        let m = reference_triangle(1.0);
        let map = build_isoparametric_map(&m, 2, &DomainGeometry::Polygonal).unwrap();
        let (j, det) = map.jacobian(0, &[0.2, 0.3, 0.0]).unwrap();
        assert!((det - 1.0).abs() < 1e-14);
        assert!((j[0][0] - 1.0).abs() < 1e-14 && j[0][1].abs() < 1e-14);
        let f = map.surface_frame(0, 0, &[0.5, 0.5, 0.0]).unwrap();
        let c = 1.0 / 2f64.sqrt();
        assert!((f.normal[0] - c).abs() < 1e-14 && (f.normal[1] - c).abs() < 1e-14);
        assert!((f.scale - 1.0).abs() < 1e-14);
        let bary = map.map_point(0, &[1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!((bary[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_affine_map() {
        let m = reference_triangle(2.0);
        let map = build_isoparametric_map(&m, 1, &DomainGeometry::Polygonal).unwrap();
        let (_, det) = map.jacobian(0, &[0.1, 0.1, 0.0]).unwrap();
        assert!((det - 4.0).abs() < 1e-14);
        for face in 0..3 {
            let x = simplex::face_point(2, &simplex::face_vertices(2, face), &[0.5, 0.5, 0.0]);
            let f = map.surface_frame(0, face, &x).unwrap();
            assert!((f.scale - 2.0).abs() < 1e-14);
        }
        for v in 0..3 {
            let p = map.map_point(0, &simplex::vertex(2, v));
            assert_eq!(p, m.vertices()[m.element(0)[v]]);
        }
    }

    #[test]
    fn chord_midpoint_projected() {
        let g = DomainGeometry::circle(0.0, 0.0, 0.5);
        let diamond = Mesh::new(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [0.5, 0.0, 0.0],
                [0.0, 0.5, 0.0],
                [-0.5, 0.0, 0.0],
                [0.0, -0.5, 0.0],
            ],
            vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 1]],
        )
        .unwrap();
        let map = build_isoparametric_map(&diamond, 2, &g).unwrap();
        let re = map.reference();
        let conn = diamond.element(0);
        let l1 = conn.iter().position(|&v| v == 1).unwrap();
        let l2 = conn.iter().position(|&v| v == 2).unwrap();
        let node = (0..re.len())
            .find(|&i| {
                let a = re.multi_index(i);
                a[l1] == 1 && a[l2] == 1
            })
            .unwrap();
        let expected = 0.5 / 2f64.sqrt();
        let c = map.control_points(0)[node];
        assert!((c[0] - expected).abs() < 1e-15 && (c[1] - expected).abs() < 1e-15);
        let mid = map.map_point(0, &re.nodes()[node]);
        assert!((mid[0] - expected).abs() < 1e-14 && (mid[1] - expected).abs() < 1e-14);
        assert!(!map.is_affine(0));
    }

    #[test]
    fn jacobian_matches_finite_differences_on_curved_elements() {
        let g = DomainGeometry::circle(0.0, 0.0, 0.5);
        let disc = generate_disc_mesh(1, &g).unwrap();
        let map = build_isoparametric_map(&disc, 3, &g).unwrap();
        let h = 1e-6;
        let pts = [[0.2, 0.3, 0.0], [0.6, 0.1, 0.0], [0.1, 0.1, 0.0]];
        for e in (0..disc.num_elements()).filter(|&e| !map.is_affine(e)) {
            for x in &pts {
                let (j, det) = map.jacobian(e, x).unwrap();
                let mut fd = [[0.0; 3]; 3];
                for c in 0..2 {
                    let (mut xp, mut xm) = (*x, *x);
                    xp[c] += h;
                    xm[c] -= h;
                    let (p, m) = (map.map_point(e, &xp), map.map_point(e, &xm));
                    for r in 0..2 {
                        fd[r][c] = (p[r] - m[r]) / (2.0 * h);
                    }
                }
                for c in 0..2 {
                    let col = (j[0][c].hypot(j[1][c])).max(1e-300);
                    let err = (fd[0][c] - j[0][c]).hypot(fd[1][c] - j[1][c]);
                    assert!(err / col <= 1e-6);
                }
                let fd_det = linalg::det(&fd, 2);
                assert!(((fd_det - det) / det).abs() <= 1e-6);
            }
        }
    }

    /// Global identity of a Lagrange node: its (vertex, multiplicity) support.
    fn node_key(conn: &[usize], alpha: &[usize]) -> Vec<(usize, usize)> {
        let mut key: Vec<(usize, usize)> = conn.iter().zip(alpha).filter(|(_, &a)| a > 0).map(|(&v, &a)| (v, a)).collect();
        key.sort_unstable();
        key
    }

    #[test]
    fn shared_nodes_agree_bitwise() {
        use std::collections::HashMap;
        let disc = DomainGeometry::circle(0.0, 0.0, 0.5);
        let ball = DomainGeometry::sphere([0.0; 3], 1.0);
        let cases = [
            (generate_disc_mesh(1, &disc).unwrap(), disc),
            (crate::mesh::generate_ball_mesh(1, &ball).unwrap(), ball),
        ];
        for (mesh, g) in &cases {
            for k in 1..=4 {
                let map = build_isoparametric_map(mesh, k, g).unwrap();
                let mut seen: HashMap<Vec<(usize, usize)>, Point> = HashMap::new();
                for (e, conn) in mesh.elements().enumerate() {
                    for (i, c) in map.control_points(e).iter().enumerate() {
                        let key = node_key(conn, map.reference().multi_index(i));
                        if let Some(prev) = seen.insert(key, *c) {
                            assert_eq!(prev, *c, "element {e}, k = {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_maps_move_only_boundary_nodes() {
        let g = DomainGeometry::sphere([0.0; 3], 1.0);
        let mesh = crate::mesh::generate_ball_mesh(1, &g).unwrap();
        let map = build_isoparametric_map(&mesh, 2, &g).unwrap();
        let edges = mesh.boundary_edges();
        for (e, conn) in mesh.elements().enumerate() {
            for (i, c) in map.control_points(e).iter().enumerate() {
                let key = node_key(conn, map.reference().multi_index(i));
                if key.len() == 2 && edges.contains(&(key[0].0, key[1].0)) {
                    assert!(g.phi(c).abs() < 1e-12);
                    continue;
                }
                let xh = map.reference().nodes()[i];
                let v = mesh.element_points(e);
                let x: Point = std::array::from_fn(|d| v[0][d] + (0..3).map(|j| xh[j] * (v[j + 1][d] - v[0][d])).sum::<f64>());
                for d in 0..3 {
                    assert!((x[d] - c[d]).abs() < 1e-14, "element {e}, node {i}");
                }
            }
        }
    }

    #[test]
    fn cubic_bubble_node_follows_the_arc() {
        // the interior node of a cubic boundary triangle carries 4/9 of the
        // gap at the chord midpoint
        let g = DomainGeometry::circle(0.0, 0.0, 0.5);
        let disc = generate_disc_mesh(0, &g).unwrap();
        let map = build_isoparametric_map(&disc, 3, &g).unwrap();
        let re = map.reference();
        let bubble = (0..re.len()).find(|&i| re.multi_index(i)[..3].iter().all(|&a| a == 1)).unwrap();
        let mut checked = 0;
        for e in 0..disc.num_elements() {
            let conn = disc.element(e);
            let on: Vec<usize> = (0..3).filter(|&l| g.phi(&disc.vertices()[conn[l]]).abs() < 1e-12).collect();
            if on.len() != 2 {
                continue;
            }
            let (a, b) = (disc.vertices()[conn[on[0]]], disc.vertices()[conn[on[1]]]);
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, 0.0];
            let r = m[0].hypot(m[1]);
            let gap = [m[0] * (0.5 / r - 1.0), m[1] * (0.5 / r - 1.0)];
            let pts = disc.element_points(e);
            let c = map.control_points(e)[bubble];
            for d in 0..2 {
                let centroid = (pts[0][d] + pts[1][d] + pts[2][d]) / 3.0;
                assert!((c[d] - centroid - 4.0 / 9.0 * gap[d]).abs() < 1e-14);
            }
            checked += 1;
        }
        assert!(checked > 0);
    }
}
