//! Isoparametric upwind discontinuous Galerkin solver for the steady
//! single-direction transport equation `Ω·∇I + σI = f` with inflow data on
//! curved domains.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod dg;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
