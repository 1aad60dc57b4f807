//! Error norms, convergence rates, and the refinement study runner.

mod problems;
mod study;

pub use problems::{manufactured_2d, manufactured_3d, polynomial_solution, ProblemId, ProblemSetup, SolutionKind};
pub use study::{
    geometry_study, projection_error_study, rows_to_csv, run_study, GeometryKind, GeometryRow, MeshSource,
    QuadratureOverride, StudyConfig, StudyRow, CSV_HEADER,
};

use crate::dg::{dg_norm_parts, DGSolution, DGSpace, DgNormParts, TransportProblem};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;

/// `‖I_h − I∘F_h‖_{L²(D_h)}`.
pub fn l2_error(space: &DGSpace, solution: &DGSolution, problem: &TransportProblem) -> Result<f64> {
    let exact = problem.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    let per_element = space.map_range(space.num_elements(), |e| -> Result<f64> {
        let mut s = 0.0;
        for (q, vp) in space.volume_points(e)?.iter().enumerate() {
            let d = solution.eval_with(e, &space.volume_values()[q]) - (exact.value)(&vp.x);
            s += vp.weight * d * d;
        }
        Ok(s)
    });
    let mut total = 0.0;
    for s in per_element {
        total += s?;
    }
    Ok(total.sqrt())
}

/// DG-norm parts of `I − I_h`, with the exact solution evaluated at physical
/// points of `D_h` and `Γ_h`.
pub fn dg_error_parts(space: &DGSpace, problem: &TransportProblem, solution: &DGSolution) -> Result<DgNormParts> {
    let exact = problem.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    dg_norm_parts(space, problem, &|e, phi, x| (exact.value)(x) - solution.eval_with(e, phi))
}

pub fn dg_error(space: &DGSpace, problem: &TransportProblem, solution: &DGSolution) -> Result<f64> {
    Ok(dg_error_parts(space, problem, solution)?.norm())
}

/// Elementwise projection `Λv = (P̂ v̂)∘F_h⁻¹`: the reference-coordinate L²
/// projection of `v∘F_h` onto the reference polynomials, using the
/// unweighted reference mass matrix.
pub fn reference_projection(space: &DGSpace, v: &(dyn Fn(&crate::linalg::Point) -> f64 + Sync)) -> Result<DGSolution> {
    let n = space.n_local();
    let rule = crate::fem::volume_quadrature(space.dim(), 2 * space.degree().max(1) + 2)?;
    let phis: Vec<Vec<f64>> = rule.points.iter().map(|p| space.basis().eval(p)).collect();
    let mut mass = vec![0.0; n * n];
    for (phi, w) in phis.iter().zip(&rule.weights) {
        for i in 0..n {
            for j in 0..n {
                mass[i * n + j] += w * phi[i] * phi[j];
            }
        }
    }
    let lu = DenseLu::new(n, mass).ok_or(Error::SingularMatrix)?;
    let tab = space.map().tabulate(&rule.points);
    let blocks = space.map_range(space.num_elements(), |e| {
        let mut b = vec![0.0; n];
        for ((phi, w), vals) in phis.iter().zip(&rule.weights).zip(&tab.values) {
            let f = v(&space.map().combine(e, vals));
            for (bi, p) in b.iter_mut().zip(phi) {
                *bi += w * f * p;
            }
        }
        lu.solve_in_place(&mut b);
        b
    });
    DGSolution::from_coeffs(space, blocks.concat())
}

/// Pairwise rates `ln(e_i/e_{i−1}) / ln(h_i/h_{i−1})` with `h ∝ Ndof^{−1/d}`.
/// Returns one rate per consecutive pair.
pub fn convergence_rate(errors: &[f64], ndofs: &[usize], dim: usize) -> Result<Vec<f64>> {
    if errors.len() != ndofs.len() {
        return Err(Error::LengthMismatch(errors.len(), ndofs.len()));
    }
    if errors.len() < 2 {
        return Err(Error::InvalidInput("at least two levels are needed for a rate".into()));
    }
    if let Some(&bad) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonpositiveError(bad));
    }
    if ndofs.contains(&0) {
        return Err(Error::NonpositiveError(0.0));
    }
    let h = |n: usize| (n as f64).powf(-1.0 / dim as f64);
    Ok(errors
        .windows(2)
        .zip(ndofs.windows(2))
        .map(|(e, n)| (e[1] / e[0]).ln() / (h(n[1]) / h(n[0])).ln())
        .collect())
}

/// Pairwise rates against an explicit mesh-size sequence.
pub fn rates_in_h(errors: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != h.len() {
        return Err(Error::LengthMismatch(errors.len(), h.len()));
    }
    if let Some(&bad) = errors.iter().chain(h).find(|e| !(**e > 0.0)) {
        return Err(Error::NonpositiveError(bad));
    }
    Ok(errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, h)| (e[1] / e[0]).ln() / (h[1] / h[0]).ln())
        .collect())
}
