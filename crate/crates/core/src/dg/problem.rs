use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Point};

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// Exact solution and its gradient, used for error measurement.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarFn,
    pub gradient: VectorFn,
}

/// Steady transport `Ω·∇I + σ I = f` with `I = g` on the inflow boundary.
#[derive(Clone)]
pub struct TransportProblem {
    pub dim: usize,
    pub direction: Point,
    pub sigma: f64,
    pub source: ScalarFn,
    pub inflow: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportProblem")
            .field("dim", &self.dim)
            .field("direction", &self.direction)
            .field("sigma", &self.sigma)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl TransportProblem {
    /// Problem whose source and inflow data are generated from `exact`.
    pub fn manufactured(dim: usize, direction: Point, sigma: f64, exact: ExactSolution) -> Self {
        let (v, g) = (exact.value.clone(), exact.gradient.clone());
        let source: ScalarFn = Arc::new(move |x| linalg::dot(&direction, &g(x)) + sigma * v(x));
        Self {
            dim,
            direction,
            sigma,
            source,
            inflow: exact.value.clone(),
            exact: Some(exact),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::InvalidInput(format!(
                "problem is {}-dimensional but the mesh is {}-dimensional",
                self.dim, dim
            )));
        }
        let len = linalg::norm(&self.direction);
        if (len - 1.0).abs() > 1e-14 || self.direction[dim..].iter().any(|c| *c != 0.0) {
            return Err(Error::NonUnitDirection(len));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Largest `|f - (Ω·∇I + σI)|` at the given points, for problems carrying
    /// an exact solution.
    pub fn source_consistency(&self, points: &[Point]) -> Result<f64> {
        let exact = self.exact.as_ref().ok_or(Error::MissingExactSolution)?;
        Ok(points
            .iter()
            .map(|x| {
                let lhs = linalg::dot(&self.direction, &(exact.gradient)(x)) + self.sigma * (exact.value)(x);
                ((self.source)(x) - lhs).abs()
            })
            .fold(0.0, f64::max))
    }
}
