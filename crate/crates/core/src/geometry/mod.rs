//! Exact domain description and isoparametric geometric maps.

pub mod diagnostics;
mod domain;
mod map;

pub use diagnostics::{boundary_distance, boundary_measure, mapped_measure};
pub use domain::{DomainGeometry, ImplicitSurface, PROJECTION_MAX_ITER, PROJECTION_TOL};
pub(crate) use map::frame_from_jacobian;
pub use map::{build_isoparametric_map, GeometricMap, MapTabulation, SurfaceFrame, MAX_MAP_DEGREE};
