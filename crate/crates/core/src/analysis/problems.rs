use std::f64::consts::PI;
use std::sync::Arc;

use crate::dg::{ExactSolution, TransportProblem};
use crate::error::Result;
use crate::geometry::DomainGeometry;
use crate::mesh::{generate_ball_mesh, generate_disc_mesh, generate_polyhedron_mesh, generate_square_mesh, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    /// Disc of radius 1/2 centered at the origin.
    Disc2d,
    /// Unit ball.
    Ball3d,
    /// Unit square (polygonal).
    Square2d,
    /// Polyhedron inscribed in the unit ball, refined without projection.
    Polyhedron3dOnCurved,
}

impl ProblemId {
    pub fn dim(self) -> usize {
        match self {
            Self::Disc2d | Self::Square2d => 2,
            Self::Ball3d | Self::Polyhedron3dOnCurved => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Disc2d => "disc2d",
            Self::Ball3d => "ball3d",
            Self::Square2d => "square2d",
            Self::Polyhedron3dOnCurved => "polyhedron3d-on-curved",
        }
    }

    /// Geometry the computational boundary approximates.
    pub fn geometry(self) -> DomainGeometry {
        match self {
            Self::Disc2d => DomainGeometry::circle(0.0, 0.0, 0.5),
            Self::Ball3d => DomainGeometry::sphere([0.0; 3], 1.0),
            Self::Square2d | Self::Polyhedron3dOnCurved => DomainGeometry::Polygonal,
        }
    }

    /// Built-in mesh at refinement `level`.
    pub fn mesh(self, level: usize) -> Result<Mesh> {
        match self {
            Self::Disc2d => generate_disc_mesh(level, &self.geometry()),
            Self::Ball3d => generate_ball_mesh(level, &self.geometry()),
            Self::Square2d => generate_square_mesh(level),
            Self::Polyhedron3dOnCurved => generate_polyhedron_mesh(level, &Self::Ball3d.geometry()),
        }
    }

    pub fn direction(self) -> [f64; 3] {
        if self.dim() == 2 {
            [3f64.sqrt() / 2.0, 0.5, 0.0]
        } else {
            let c = 1.0 / 3f64.sqrt();
            [c, c, c]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolutionKind {
    /// The smooth manufactured solutions of the numerical experiments.
    #[default]
    Manufactured,
    /// `I ≡ 1` with `σ = 1`, `f = 1`, `g = 1`.
    Constant,
    /// A fixed polynomial of the given total degree.
    Polynomial(usize),
}

/// `sin(πx+πy) + x² + y² + xy + 5`.
pub fn manufactured_2d() -> ExactSolution {
    ExactSolution {
        value: Arc::new(|x| (PI * (x[0] + x[1])).sin() + x[0] * x[0] + x[1] * x[1] + x[0] * x[1] + 5.0),
        gradient: Arc::new(|x| {
            let c = PI * (PI * (x[0] + x[1])).cos();
            [c + 2.0 * x[0] + x[1], c + 2.0 * x[1] + x[0], 0.0]
        }),
    }
}

/// `sin(π(x+y+z)) + x² + y² + z² + xyz + 5`.
pub fn manufactured_3d() -> ExactSolution {
    ExactSolution {
        value: Arc::new(|x| {
            (PI * (x[0] + x[1] + x[2])).sin() + x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[0] * x[1] * x[2] + 5.0
        }),
        gradient: Arc::new(|x| {
            let c = PI * (PI * (x[0] + x[1] + x[2])).cos();
            [
                c + 2.0 * x[0] + x[1] * x[2],
                c + 2.0 * x[1] + x[0] * x[2],
                c + 2.0 * x[2] + x[0] * x[1],
            ]
        }),
    }
}

/// `(1 + a·x)^p + (b·x)^p` for fixed vectors `a`, `b`: a full polynomial of
/// total degree `p`.
pub fn polynomial_solution(p: usize) -> ExactSolution {
    const A: [f64; 3] = [0.5, -0.3, 0.2];
    const B: [f64; 3] = [0.4, 0.6, -0.1];
    let lin = |c: f64, v: &[f64; 3], x: &[f64; 3]| c + v[0] * x[0] + v[1] * x[1] + v[2] * x[2];
    let pi = p as i32;
    ExactSolution {
        value: Arc::new(move |x| lin(1.0, &A, x).powi(pi) + lin(0.0, &B, x).powi(pi)),
        gradient: Arc::new(move |x| {
            if p == 0 {
                return [0.0; 3];
            }
            let (u, w) = (lin(1.0, &A, x).powi(pi - 1), lin(0.0, &B, x).powi(pi - 1));
            let f = p as f64;
            [
                f * (A[0] * u + B[0] * w),
                f * (A[1] * u + B[1] * w),
                f * (A[2] * u + B[2] * w),
            ]
        }),
    }
}

/// Everything needed to run one problem family.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub id: ProblemId,
    pub geometry: DomainGeometry,
    pub problem: TransportProblem,
}

impl ProblemSetup {
    pub fn new(id: ProblemId, solution: SolutionKind) -> Self {
        let dim = id.dim();
        let exact = match solution {
            SolutionKind::Manufactured if dim == 2 => manufactured_2d(),
            SolutionKind::Manufactured => manufactured_3d(),
            SolutionKind::Constant => ExactSolution {
                value: Arc::new(|_| 1.0),
                gradient: Arc::new(|_| [0.0; 3]),
            },
            SolutionKind::Polynomial(p) => polynomial_solution(p),
        };
        Self {
            id,
            geometry: id.geometry(),
            problem: TransportProblem::manufactured(dim, id.direction(), 1.0, exact),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn fd_gradient(f: &ExactSolution, x: &[f64; 3]) -> [f64; 3] {
        let h = 1e-6;
        let mut g = [0.0; 3];
        for i in 0..3 {
            let (mut p, mut m) = (*x, *x);
            p[i] += h;
            m[i] -= h;
            g[i] = ((f.value)(&p) - (f.value)(&m)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in [manufactured_2d(), manufactured_3d(), polynomial_solution(3), polynomial_solution(1)] {
            for _ in 0..20 {
                let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let (a, b) = ((f.gradient)(&x), fd_gradient(&f, &x));
                for i in 0..3 {
                    assert!((a[i] - b[i]).abs() < 1e-7, "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn manufactured_source_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for id in [ProblemId::Disc2d, ProblemId::Ball3d] {
            let setup = ProblemSetup::new(id, SolutionKind::Manufactured);
            setup.problem.validate(id.dim()).unwrap();
            let pts: Vec<[f64; 3]> = (0..50)
                .map(|_| {
                    let mut p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0];
                    if id.dim() == 3 {
                        p[2] = rng.random_range(-1.0..1.0);
                    }
                    p
                })
                .collect();
            assert!(setup.problem.source_consistency(&pts).unwrap() < 1e-10);
        }
    }

    #[test]
    fn constant_problem_has_unit_data() {
        let s = ProblemSetup::new(ProblemId::Square2d, SolutionKind::Constant);
        let x = [0.3, 0.7, 0.0];
        assert_eq!((s.problem.source)(&x), 1.0);
        assert_eq!((s.problem.inflow)(&x), 1.0);
    }
}
