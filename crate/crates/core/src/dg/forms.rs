//! Integrated-by-parts form, DG norm, and the discrete stability quantities.

use super::assembly::{classify, FacePointKind};
use super::{DGSolution, DGSpace, TransportProblem};
use crate::error::{Error, Result};
use crate::linalg::{self, Point};

fn check_len(space: &DGSpace, u: &DGSolution) -> Result<()> {
    if u.coeffs.len() != space.ndof() {
        return Err(Error::LengthMismatch(u.coeffs.len(), space.ndof()));
    }
    Ok(())
}

/// `ℬ(u, v)` in the integrated-by-parts form: volume `(σv − Ω·∇v)u`, outflow
/// boundary `(Ω·n)uv`, and interior `(Ω·n)⟦v⟧u⁻` on inflow sides.
pub fn apply_bilinear(space: &DGSpace, problem: &TransportProblem, u: &DGSolution, v: &DGSolution) -> Result<f64> {
    problem.validate(space.dim())?;
    check_len(space, u)?;
    check_len(space, v)?;
    let dim = space.dim();
    let volume = space.map_range(space.num_elements(), |e| -> Result<f64> {
        let mut s = 0.0;
        for (q, vp) in space.volume_points(e)?.iter().enumerate() {
            let oh = linalg::mat_vec(&vp.jinv, &problem.direction, dim);
            let ue = u.eval_with(e, &space.volume_values()[q]);
            let ve = v.eval_with(e, &space.volume_values()[q]);
            let dv: f64 = v
                .element(e)
                .iter()
                .zip(&space.volume_grads()[q])
                .map(|(c, g)| c * linalg::dot(&oh, g))
                .sum();
            s += vp.weight * (problem.sigma * ve - dv) * ue;
        }
        Ok(s)
    });
    let faces = space.map_range(space.mesh().faces().len(), |f| -> Result<f64> {
        let mut s = 0.0;
        for p in space.face_points(f)? {
            let a = linalg::dot(&problem.direction, &p.normal);
            let (l, kind) = (p.left.element, classify(a));
            let ul = u.eval_with(l, &p.left.basis);
            let vl = v.eval_with(l, &p.left.basis);
            match &p.right {
                None => {
                    if kind == FacePointKind::Outflow {
                        s += p.weight * a * ul * vl;
                    }
                }
                Some(r) => {
                    let ur = u.eval_with(r.element, &r.basis);
                    let vr = v.eval_with(r.element, &r.basis);
                    match kind {
                        FacePointKind::Inflow => s += p.weight * a * (vl - vr) * ur,
                        FacePointKind::Outflow => s += p.weight * (-a) * (vr - vl) * ul,
                        FacePointKind::Characteristic => {}
                    }
                }
            }
        }
        Ok(s)
    });
    let mut total = 0.0;
    for s in volume.into_iter().chain(faces) {
        total += s?;
    }
    Ok(total)
}

/// The three nonnegative contributions to `‖w‖²_DG`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgNormParts {
    /// `∫ σ w²`.
    pub volume: f64,
    /// `½ ∫_{Γ_h} |Ω·n| w²`.
    pub boundary: f64,
    /// `½ Σ_F ∫_F |Ω·n| ⟦w⟧²` over interior faces.
    pub jump: f64,
}

impl DgNormParts {
    pub fn norm(&self) -> f64 {
        (self.volume + self.boundary + self.jump).sqrt()
    }
}

/// DG-norm parts of a broken function given by `w(e, basis_values, x)`, the
/// value on element `e` at the point with physical coordinates `x` where the
/// space's basis takes `basis_values`.
pub fn dg_norm_parts(
    space: &DGSpace,
    problem: &TransportProblem,
    w: &(dyn Fn(usize, &[f64], &Point) -> f64 + Sync),
) -> Result<DgNormParts> {
    let volume = space.map_range(space.num_elements(), |e| -> Result<f64> {
        let mut s = 0.0;
        for (q, vp) in space.volume_points(e)?.iter().enumerate() {
            let we = w(e, &space.volume_values()[q], &vp.x);
            s += vp.weight * problem.sigma * we * we;
        }
        Ok(s)
    });
    let faces = space.map_range(space.mesh().faces().len(), |f| -> Result<(f64, f64)> {
        let (mut b, mut j) = (0.0, 0.0);
        for p in space.face_points(f)? {
            let a = linalg::dot(&problem.direction, &p.normal).abs();
            let wl = w(p.left.element, &p.left.basis, &p.left.x);
            match &p.right {
                None => b += 0.5 * p.weight * a * wl * wl,
                Some(r) => {
                    if classify(a) == FacePointKind::Outflow {
                        let d = wl - w(r.element, &r.basis, &r.x);
                        j += 0.5 * p.weight * a * d * d;
                    }
                }
            }
        }
        Ok((b, j))
    });
    let mut parts = DgNormParts {
        volume: 0.0,
        boundary: 0.0,
        jump: 0.0,
    };
    for s in volume {
        parts.volume += s?;
    }
    for r in faces {
        let (b, j) = r?;
        parts.boundary += b;
        parts.jump += j;
    }
    Ok(parts)
}

/// Both sides of the discrete stability bound for a computed solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `∫ σ I_h²`.
    pub volume: f64,
    /// `∫_{Γ_h⁻} |Ω·n| I_h²`.
    pub inflow: f64,
    /// `Σ ∫ |Ω·n| ⟦I_h⟧²` over interior faces.
    pub jump: f64,
    /// `∫_{Γ_h⁺} Ω·n I_h²`.
    pub outflow: f64,
    /// `∫ f²`.
    pub source: f64,
    /// `∫_{Γ_h⁻} g²`.
    pub inflow_data: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when both data terms vanish.
    pub ratio: Option<f64>,
}

pub fn stability_check(space: &DGSpace, problem: &TransportProblem, solution: &DGSolution) -> Result<StabilityReport> {
    problem.validate(space.dim())?;
    check_len(space, solution)?;
    let volume = space.map_range(space.num_elements(), |e| -> Result<(f64, f64)> {
        let (mut s, mut f2) = (0.0, 0.0);
        for (q, vp) in space.volume_points(e)?.iter().enumerate() {
            let u = solution.eval_with(e, &space.volume_values()[q]);
            let f = (problem.source)(&vp.x);
            s += vp.weight * problem.sigma * u * u;
            f2 += vp.weight * f * f;
        }
        Ok((s, f2))
    });
    let faces = space.map_range(space.mesh().faces().len(), |f| -> Result<[f64; 4]> {
        // inflow, jump, outflow, inflow data
        let mut acc = [0.0; 4];
        for p in space.face_points(f)? {
            let a = linalg::dot(&problem.direction, &p.normal);
            let ul = solution.eval_with(p.left.element, &p.left.basis);
            match (&p.right, classify(a)) {
                (None, FacePointKind::Inflow) => {
                    let g = (problem.inflow)(&space.boundary_data_point(&p.left.x)?);
                    acc[0] += p.weight * (-a) * ul * ul;
                    acc[3] += p.weight * g * g;
                }
                (None, FacePointKind::Outflow) => acc[2] += p.weight * a * ul * ul,
                (Some(r), FacePointKind::Inflow | FacePointKind::Outflow) => {
                    let d = ul - solution.eval_with(r.element, &r.basis);
                    acc[1] += p.weight * a.abs() * d * d;
                }
                _ => {}
            }
        }
        Ok(acc)
    });
    let (mut vol, mut src) = (0.0, 0.0);
    for r in volume {
        let (s, f2) = r?;
        vol += s;
        src += f2;
    }
    let mut acc = [0.0; 4];
    for r in faces {
        for (a, b) in acc.iter_mut().zip(r?) {
            *a += b;
        }
    }
    let lhs = vol + acc[0] + acc[1] + acc[2];
    let rhs = src + acc[3];
    Ok(StabilityReport {
        volume: vol,
        inflow: acc[0],
        jump: acc[1],
        outflow: acc[2],
        source: src,
        inflow_data: acc[3],
        lhs,
        rhs,
        ratio: (rhs > 0.0).then(|| lhs / rhs),
    })
}
