//! Upwind DG discretization on isoparametric meshes.

mod assembly;
mod forms;
mod problem;

pub use assembly::{assemble, classify_face_point, FacePointKind, SparseSystem, CHARACTERISTIC_TOL};
pub use forms::{apply_bilinear, dg_norm_parts, stability_check, DgNormParts, StabilityReport};
pub use problem::{ExactSolution, ScalarFn, TransportProblem, VectorFn};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{self, simplex, FaceRule, QuadratureRule, ReferenceElement};
use crate::geometry::{frame_from_jacobian, GeometricMap, MapTabulation};
use crate::linalg::{self, Mat3, Point};
use crate::mesh::{FaceIncidence, Mesh};

/// Discontinuous piecewise-polynomial space of degree `k` pulled through the
/// geometric map. Element `e` owns the dofs `e*n_k .. (e+1)*n_k`.
#[derive(Debug, Clone)]
pub struct DGSpace<'a> {
    mesh: &'a Mesh,
    map: &'a GeometricMap,
    basis: ReferenceElement,
    volume_rule: QuadratureRule,
    face_rule: FaceRule,
    basis_values: Vec<Vec<f64>>,
    basis_grads: Vec<Vec<Point>>,
    map_tab: MapTabulation,
    parallel: bool,
}

/// Coefficient vector of a DG function.
#[derive(Debug, Clone, PartialEq)]
pub struct DGSolution {
    pub n_local: usize,
    pub coeffs: Vec<f64>,
}

impl DGSolution {
    pub fn zeros(space: &DGSpace) -> Self {
        Self {
            n_local: space.n_local(),
            coeffs: vec![0.0; space.ndof()],
        }
    }

    pub fn from_coeffs(space: &DGSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::LengthMismatch(coeffs.len(), space.ndof()));
        }
        Ok(Self {
            n_local: space.n_local(),
            coeffs,
        })
    }

    /// Nodal interpolation in reference coordinates of `f(F_h(x̂))`.
    pub fn interpolate(space: &DGSpace, f: impl Fn(&Point) -> f64) -> Self {
        let mut coeffs = Vec::with_capacity(space.ndof());
        for e in 0..space.num_elements() {
            for node in space.basis().nodes() {
                coeffs.push(f(&space.map().map_point(e, node)));
            }
        }
        Self {
            n_local: space.n_local(),
            coeffs,
        }
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.coeffs[e * self.n_local..(e + 1) * self.n_local]
    }

    /// Value on element `e` given basis values at the point.
    pub fn eval_with(&self, e: usize, basis_values: &[f64]) -> f64 {
        self.element(e).iter().zip(basis_values).map(|(c, v)| c * v).sum()
    }
}

/// Volume quadrature point of one element.
#[derive(Debug, Clone, Copy)]
pub(crate) struct VolumePoint {
    /// Quadrature weight times `det J`.
    pub weight: f64,
    pub jinv: Mat3,
    pub x: Point,
}

/// One side of a face quadrature point.
#[derive(Debug, Clone)]
pub(crate) struct FaceSide {
    pub element: usize,
    pub basis: Vec<f64>,
    pub x: Point,
}

/// Face quadrature point with geometry taken from the left element.
#[derive(Debug, Clone)]
pub(crate) struct FacePoint {
    pub left: FaceSide,
    pub right: Option<FaceSide>,
    /// Outward unit normal of the left element.
    pub normal: Point,
    /// Quadrature weight times the surface scale.
    pub weight: f64,
}

impl<'a> DGSpace<'a> {
    /// Space of degree `k` (0 is allowed) with the default quadrature.
    pub fn new(mesh: &'a Mesh, map: &'a GeometricMap, k: usize) -> Result<Self> {
        Self::with_quadrature(
            mesh,
            map,
            k,
            fem::default_volume_exactness(k),
            fem::default_face_exactness(k),
        )
    }

    pub fn with_quadrature(
        mesh: &'a Mesh,
        map: &'a GeometricMap,
        k: usize,
        volume_exactness: usize,
        face_exactness: usize,
    ) -> Result<Self> {
        if map.num_elements() != mesh.num_elements() || map.dim() != mesh.dim() {
            return Err(Error::InvalidInput("map was built for a different mesh".into()));
        }
        let dim = mesh.dim();
        let basis = ReferenceElement::new(dim, k);
        let volume_rule = fem::volume_quadrature(dim, volume_exactness)?;
        let face_rule = fem::face_rule(dim, face_exactness)?;
        map.check_positive(&volume_rule)?;
        let basis_values = volume_rule.points.iter().map(|p| basis.eval(p)).collect();
        let basis_grads = volume_rule.points.iter().map(|p| basis.grad(p)).collect();
        let map_tab = map.tabulate(&volume_rule.points);
        Ok(Self {
            mesh,
            map,
            basis,
            volume_rule,
            face_rule,
            basis_values,
            basis_grads,
            map_tab,
            parallel: true,
        })
    }

    /// Run element and face loops on the rayon pool (default) or on the
    /// calling thread. Results are identical either way.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn map(&self) -> &'a GeometricMap {
        self.map
    }

    pub fn basis(&self) -> &ReferenceElement {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn ndof(&self) -> usize {
        self.num_elements() * self.n_local()
    }

    pub fn offset(&self, e: usize) -> usize {
        e * self.n_local()
    }

    pub(crate) fn volume_values(&self) -> &[Vec<f64>] {
        &self.basis_values
    }

    pub(crate) fn volume_grads(&self) -> &[Vec<Point>] {
        &self.basis_grads
    }

    pub(crate) fn map_range<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        if self.parallel {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }

    /// Geometry at the volume quadrature points of element `e`.
    pub(crate) fn volume_points(&self, e: usize) -> Result<Vec<VolumePoint>> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.volume_rule.len());
        for (q, w) in self.volume_rule.weights.iter().enumerate() {
            let j = self.map.jacobian_from(e, &self.map_tab.grads[q]);
            let det = linalg::det(&j, dim);
            if !(det > 0.0) {
                return Err(Error::DegenerateMap { element: e, det });
            }
            out.push(VolumePoint {
                weight: w * det,
                jinv: linalg::inverse(&j, det, dim),
                x: self.map.combine(e, &self.map_tab.values[q]),
            });
        }
        Ok(out)
    }

    fn side_point(&self, inc: &FaceIncidence, bary: &[f64; 3]) -> Point {
        let dim = self.dim();
        let local = simplex::face_vertices(dim, inc.local_face);
        let verts: Vec<usize> = (0..dim).map(|j| local[inc.perm[j]]).collect();
        simplex::face_point(dim, &verts, bary)
    }

    /// Quadrature points of face `f`. Both sides see the same face-barycentric
    /// points; normals and surface scales come from the left element.
    pub(crate) fn face_points(&self, f: usize) -> Result<Vec<FacePoint>> {
        let dim = self.dim();
        let face = self.mesh.face(f);
        let left = face.left;
        let measure = simplex::face_measure(dim, left.local_face);
        let mut out = Vec::with_capacity(self.face_rule.weights.len());
        for (bary, w) in self.face_rule.bary.iter().zip(&self.face_rule.weights) {
            let xl = self.side_point(&left, bary);
            let (j, det) = self.map.jacobian(left.element, &xl)?;
            let frame = frame_from_jacobian(&j, det, dim, left.local_face);
            let right = face.right.map(|r| {
                let xr = self.side_point(&r, bary);
                FaceSide {
                    element: r.element,
                    basis: self.basis.eval(&xr),
                    x: self.map.map_point(r.element, &xr),
                }
            });
            out.push(FacePoint {
                left: FaceSide {
                    element: left.element,
                    basis: self.basis.eval(&xl),
                    x: self.map.map_point(left.element, &xl),
                },
                right,
                normal: frame.normal,
                weight: w * measure * frame.scale,
            });
        }
        Ok(out)
    }

    /// Boundary data point: the point of `Γ` matching a point of `Γ_h`.
    pub(crate) fn boundary_data_point(&self, x: &Point) -> Result<Point> {
        self.map.exact_boundary_point(x)
    }
}
