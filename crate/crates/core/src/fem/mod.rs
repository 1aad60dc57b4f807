//! Reference simplex machinery: nodal Lagrange bases and quadrature.

mod basis;
mod quadrature;
pub mod simplex;

pub use basis::ReferenceElement;
pub use quadrature::{
    face_quadrature, face_rule, gauss_legendre, volume_quadrature, FaceRule, QuadratureRule,
    MAX_EXACTNESS,
};

/// Default volume exactness for fields of degree `k`: `2k` for the mass-like
/// terms plus `k` of headroom for curved Jacobians.
pub fn default_volume_exactness(k: usize) -> usize {
    (3 * k).max(2)
}

/// Default face exactness for fields of degree `k`.
pub fn default_face_exactness(k: usize) -> usize {
    3 * k + 1
}
