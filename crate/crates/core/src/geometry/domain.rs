use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{add, dot, norm, scale, sub, Point};

/// Newton tolerance and iteration cap for implicit projections.
pub const PROJECTION_TOL: f64 = 1e-13;
pub const PROJECTION_MAX_ITER: usize = 50;

type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type VectorField = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// Boundary given by a level set `φ = 0` with `φ < 0` inside.
#[derive(Clone)]
pub struct ImplicitSurface {
    pub dim: usize,
    pub phi: ScalarField,
    pub grad: VectorField,
}

/// The exact domain `D` and its boundary `Γ`.
#[derive(Clone)]
pub enum DomainGeometry {
    Circle { center: [f64; 2], radius: f64 },
    Sphere { center: Point, radius: f64 },
    /// Straight-sided domain: the mesh boundary is the exact boundary.
    Polygonal,
    Implicit(ImplicitSurface),
}

impl fmt::Debug for DomainGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Circle { center, radius } => f
                .debug_struct("Circle")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            Self::Sphere { center, radius } => f
                .debug_struct("Sphere")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            Self::Polygonal => f.write_str("Polygonal"),
            Self::Implicit(s) => write!(f, "Implicit(dim={})", s.dim),
        }
    }
}

impl DomainGeometry {
    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        Self::Circle {
            center: [cx, cy],
            radius,
        }
    }

    pub fn sphere(center: Point, radius: f64) -> Self {
        Self::Sphere { center, radius }
    }

    pub fn is_curved(&self) -> bool {
        !matches!(self, Self::Polygonal)
    }

    /// Implicit function; identically zero for polygonal domains, whose
    /// straight boundary is exact.
    pub fn phi(&self, x: &Point) -> f64 {
        match self {
            Self::Circle { center, radius } => {
                (x[0] - center[0]).hypot(x[1] - center[1]) - radius
            }
            Self::Sphere { center, radius } => norm(&sub(x, center)) - radius,
            Self::Polygonal => 0.0,
            Self::Implicit(s) => (s.phi)(x),
        }
    }

    /// Closest-point projection onto `Γ` (radial for circles and spheres).
    pub fn project(&self, x: &Point) -> Result<Point> {
        match self {
            Self::Circle { center, radius } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let r = dx.hypot(dy);
                if !(r > 0.0) {
                    return Err(Error::ProjectionFailure { point: *x });
                }
                Ok([
                    center[0] + radius * dx / r,
                    center[1] + radius * dy / r,
                    0.0,
                ])
            }
            Self::Sphere { center, radius } => {
                let d = sub(x, center);
                let r = norm(&d);
                if !(r > 0.0) {
                    return Err(Error::ProjectionFailure { point: *x });
                }
                Ok(add(center, &scale(&d, radius / r)))
            }
            Self::Polygonal => Ok(*x),
            Self::Implicit(s) => newton_project(s, x),
        }
    }

    /// Measure of the exact domain, when known in closed form.
    pub fn exact_measure(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match self {
            Self::Circle { radius, .. } => Some(PI * radius * radius),
            Self::Sphere { radius, .. } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            _ => None,
        }
    }
}

fn newton_project(s: &ImplicitSurface, x: &Point) -> Result<Point> {
    let mut y = *x;
    for _ in 0..PROJECTION_MAX_ITER {
        let v = (s.phi)(&y);
        let g = (s.grad)(&y);
        let gg = dot(&g, &g);
        if !(gg > 0.0) || !v.is_finite() {
            break;
        }
        let step = scale(&g, v / gg);
        y = sub(&y, &step);
        if norm(&step) <= PROJECTION_TOL && (s.phi)(&y).abs() <= 1e-12 {
            return Ok(y);
        }
    }
    Err(Error::ProjectionFailure { point: *x })
}
