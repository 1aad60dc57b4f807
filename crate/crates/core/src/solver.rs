//! Linear solvers for assembled DG systems.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::dg::{DGSolution, SparseSystem};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMethod {
    /// Sparse LU factorization.
    Direct,
    /// Restarted GMRES, right-preconditioned with the inverse diagonal element
    /// blocks.
    Gmres { restart: usize },
}

/// Default Krylov restart length.
pub const DEFAULT_RESTART: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Relative residual target `‖b − Ax‖/‖b‖` for the iterative method.
    pub tolerance: f64,
    /// Iteration cap; `None` means ten times the number of elements.
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Direct,
            tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn gmres(restart: usize) -> Self {
        Self {
            method: SolverMethod::Gmres { restart },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: DGSolution,
    /// Relative residual of the returned iterate.
    pub residual: f64,
    /// Krylov iterations (zero for the direct method).
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖b − Ax‖ / ‖b‖`, or `‖Ax‖` when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let bn = norm(b);
    if bn > 0.0 {
        norm(&r) / bn
    } else {
        norm(&r)
    }
}

pub fn solve(system: &SparseSystem, config: &SolverConfig) -> Result<SolveOutcome> {
    if !(config.tolerance > 0.0) {
        return Err(Error::InvalidInput(format!("solver tolerance must be positive, got {}", config.tolerance)));
    }
    let (x, iterations) = match config.method {
        SolverMethod::Direct => (solve_direct(&system.matrix, &system.rhs)?, 0),
        SolverMethod::Gmres { restart } => {
            let max = config.max_iterations.unwrap_or(10 * system.num_element_blocks()).max(1);
            let prec = BlockJacobi::new(&system.matrix, system.block_size)?;
            gmres(&system.matrix, &system.rhs, &prec, restart.max(1), config.tolerance, max)?
        }
    };
    let residual = relative_residual(&system.matrix, &x, &system.rhs);
    log::debug!("solve: n = {}, residual = {residual:.3e}, iterations = {iterations}", x.len());
    Ok(SolveOutcome {
        solution: DGSolution {
            n_local: system.block_size,
            coeffs: x,
        },
        residual,
        iterations,
    })
}

/// Sparse LU solve of `A x = b`.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..n {
        triplets.extend(a.row(i).map(|(c, v)| Triplet::new(i, c, v)));
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, a.ncols, &triplets)
        .map_err(|e| Error::InvalidInput(format!("sparse matrix construction failed: {e:?}")))?;
    let lu = mat.sp_lu().map_err(|_| Error::SingularMatrix)?;
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(x)
}

/// Inverse of the diagonal `block × block` blocks.
pub struct BlockJacobi {
    block: usize,
    factors: Vec<DenseLu>,
}

impl BlockJacobi {
    pub fn new(a: &CsrMatrix, block: usize) -> Result<Self> {
        assert!(block > 0 && a.nrows.is_multiple_of(block));
        let factors = (0..a.nrows / block)
            .map(|e| {
                let mut d = vec![0.0; block * block];
                for i in 0..block {
                    for (c, v) in a.row(e * block + i) {
                        if c >= e * block && c < (e + 1) * block {
                            d[i * block + c - e * block] = v;
                        }
                    }
                }
                DenseLu::new(block, d).ok_or(Error::SingularMatrix)
            })
            .collect::<Result<_>>()?;
        Ok(Self { block, factors })
    }

    pub fn apply(&self, v: &mut [f64]) {
        for (lu, chunk) in self.factors.iter().zip(v.chunks_mut(self.block)) {
            lu.solve_in_place(chunk);
        }
    }
}

/// Right-preconditioned restarted GMRES from a zero initial guess. Returns
/// the iterate and the number of inner iterations.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    prec: &BlockJacobi,
    restart: usize,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut iters = 0;
    let mut w = vec![0.0; n];
    loop {
        let ax = a.mul(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta / bnorm <= tol {
            return Ok((x, iters));
        }
        if iters >= max_iterations {
            return Err(Error::MaxIterationsExceeded {
                iterations: iters,
                residual: beta / bnorm,
                best: Box::new(x),
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::new(); // columns, length j+2
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        let mut z = vec![0.0; n];
        while basis.len() <= restart && iters < max_iterations {
            let j = basis.len() - 1;
            z.copy_from_slice(&basis[j]);
            prec.apply(&mut z);
            a.matvec(&z, &mut w);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij: f64 = v.iter().zip(&w).map(|(p, q)| p * q).sum();
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hn = norm(&w);
            col[j + 1] = hn;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let d = col[j].hypot(col[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[j] / d, col[j + 1] / d) };
            cs.push(c);
            sn.push(s);
            col[j] = d;
            col[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            iters += 1;
            if g[j + 1].abs() / bnorm <= tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let m = h.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|k| h[k][i] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vk)| *u += yi * vk);
        }
        prec.apply(&mut update);
        x.iter_mut().zip(&update).for_each(|(xi, u)| *xi += u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(matrix: CsrMatrix, rhs: Vec<f64>, block: usize) -> SparseSystem {
        let nb = matrix.nrows / block;
        SparseSystem {
            matrix,
            rhs,
            block_size: block,
            block_pattern: (0..nb).map(|e| vec![e]).collect(),
        }
    }

    #[test]
    fn identity_system() {
        let sys = system(CsrMatrix::identity(4), vec![1.0, 0.0, 0.0, 0.0], 2);
        for cfg in [SolverConfig::default(), SolverConfig::gmres(10)] {
            let out = solve(&sys, &cfg).unwrap();
            assert_eq!(out.solution.coeffs, vec![1.0, 0.0, 0.0, 0.0]);
            assert_eq!(out.residual, 0.0);
        }
    }

    fn lower_bidiagonal(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64 * 0.01));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn gmres_matches_direct() {
        let a = lower_bidiagonal(60);
        let b: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let sys = system(a, b, 3);
        let d = solve(&sys, &SolverConfig::default()).unwrap();
        let k = solve(&sys, &SolverConfig::gmres(5)).unwrap();
        assert!(k.residual <= 1e-12);
        for (x, y) in d.solution.coeffs.iter().zip(&k.solution.coeffs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let sys = system(a, vec![1.0, 2.0], 1);
        assert!(matches!(solve(&sys, &SolverConfig::default()), Err(Error::SingularMatrix)));
        let zero_diag = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let sys = system(zero_diag, vec![1.0, 2.0], 1);
        assert!(matches!(solve(&sys, &SolverConfig::gmres(2)), Err(Error::SingularMatrix)));
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let a = lower_bidiagonal(40);
        let sys = system(a, vec![1.0; 40], 1);
        let cfg = SolverConfig {
            max_iterations: Some(3),
            ..SolverConfig::gmres(2)
        };
        match solve(&sys, &cfg) {
            Err(Error::MaxIterationsExceeded { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), 40);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn direct_solve_is_deterministic() {
        let a = lower_bidiagonal(200);
        let b: Vec<f64> = (0..200).map(|i| (i as f64).cos()).collect();
        let x1 = solve_direct(&a, &b).unwrap();
        let x2 = solve_direct(&a, &b).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let sys = system(CsrMatrix::identity(1), vec![1.0], 1);
        let cfg = SolverConfig {
            tolerance: 0.0,
            ..SolverConfig::default()
        };
        assert!(solve(&sys, &cfg).is_err());
    }
}
