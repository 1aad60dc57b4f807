use std::collections::BTreeMap;

use super::{DGSpace, FacePoint, TransportProblem};
use crate::error::Result;
use crate::geometry::SurfaceFrame;
use crate::linalg::{self, Point};
use crate::sparse::CsrMatrix;

/// `|Ω·n|` at or below this value marks a characteristic point.
pub const CHARACTERISTIC_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacePointKind {
    Inflow,
    Outflow,
    Characteristic,
}

pub fn classify_face_point(direction: &Point, frame: &SurfaceFrame) -> FacePointKind {
    classify(linalg::dot(direction, &frame.normal))
}

pub(crate) fn classify(omega_n: f64) -> FacePointKind {
    if omega_n < -CHARACTERISTIC_TOL {
        FacePointKind::Inflow
    } else if omega_n > CHARACTERISTIC_TOL {
        FacePointKind::Outflow
    } else {
        FacePointKind::Characteristic
    }
}

/// Assembled linear system `A x = b` of the upwind DG scheme.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dofs per element block.
    pub block_size: usize,
    /// Column blocks present in each element's block row, ascending.
    pub block_pattern: Vec<Vec<usize>>,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_pattern.iter().map(Vec::len).sum()
    }

    pub fn num_element_blocks(&self) -> usize {
        self.block_pattern.len()
    }

    /// Dense copy of block `(row, col)` in row-major order, zero if absent.
    pub fn block(&self, row: usize, col: usize) -> Vec<f64> {
        let n = self.block_size;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.matrix.get(row * n + i, col * n + j);
            }
        }
        out
    }
}

/// Dense `n×n` block contribution; `data[i*n + j]` multiplies trial `j` in
/// test row `i`.
struct Block {
    row: usize,
    col: usize,
    data: Vec<f64>,
}

struct ElementPart {
    block: Vec<f64>,
    rhs: Vec<f64>,
}

struct FacePart {
    blocks: Vec<Block>,
    rhs: Option<(usize, Vec<f64>)>,
}

fn volume_part(space: &DGSpace, problem: &TransportProblem, e: usize) -> Result<ElementPart> {
    let n = space.n_local();
    let dim = space.dim();
    let mut block = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut adv = vec![0.0; n];
    for (q, vp) in space.volume_points(e)?.iter().enumerate() {
        let phi = &space.volume_values()[q];
        let omega_hat = linalg::mat_vec(&vp.jinv, &problem.direction, dim);
        for (a, g) in adv.iter_mut().zip(&space.volume_grads()[q]) {
            *a = linalg::dot(&omega_hat, g);
        }
        let f = (problem.source)(&vp.x);
        for i in 0..n {
            let wi = vp.weight * phi[i];
            rhs[i] += wi * f;
            let row = &mut block[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] += wi * (adv[j] + problem.sigma * phi[j]);
            }
        }
    }
    Ok(ElementPart { block, rhs })
}

fn add_outer(data: &mut [f64], scale: f64, test: &[f64], trial: &[f64]) {
    let n = trial.len();
    for (i, t) in test.iter().enumerate() {
        let s = scale * t;
        for (d, u) in data[i * n..(i + 1) * n].iter_mut().zip(trial) {
            *d += s * u;
        }
    }
}

fn face_part(space: &DGSpace, problem: &TransportProblem, f: usize) -> Result<FacePart> {
    let n = space.n_local();
    let pts: Vec<FacePoint> = space.face_points(f)?;
    let face = space.mesh().face(f);
    let (l, r) = (face.left.element, face.right.map(|r| r.element));
    let mut out = FacePart {
        blocks: Vec::new(),
        rhs: None,
    };
    match r {
        None => {
            let mut diag = vec![0.0; n * n];
            let mut rhs = vec![0.0; n];
            let mut touched = false;
            for p in &pts {
                let a = linalg::dot(&problem.direction, &p.normal);
                if classify(a) != FacePointKind::Inflow {
                    continue;
                }
                touched = true;
                let c = -a * p.weight;
                add_outer(&mut diag, c, &p.left.basis, &p.left.basis);
                let g = (problem.inflow)(&space.boundary_data_point(&p.left.x)?);
                for (b, v) in rhs.iter_mut().zip(&p.left.basis) {
                    *b += c * g * v;
                }
            }
            if touched {
                out.blocks.push(Block {
                    row: l,
                    col: l,
                    data: diag,
                });
                out.rhs = Some((l, rhs));
            }
        }
        Some(r) => {
            // Blocks: (l,l), (l,r) for points inflow to l; (r,r), (r,l) for
            // points inflow to r.
            let mut ll = vec![0.0; n * n];
            let mut lr = vec![0.0; n * n];
            let mut rr = vec![0.0; n * n];
            let mut rl = vec![0.0; n * n];
            let (mut in_l, mut in_r) = (false, false);
            for p in &pts {
                let right = p.right.as_ref().expect("interior face point has two sides");
                let a = linalg::dot(&problem.direction, &p.normal);
                match classify(a) {
                    FacePointKind::Inflow => {
                        in_l = true;
                        let c = -a * p.weight;
                        add_outer(&mut ll, c, &p.left.basis, &p.left.basis);
                        add_outer(&mut lr, -c, &p.left.basis, &right.basis);
                    }
                    FacePointKind::Outflow => {
                        in_r = true;
                        let c = a * p.weight;
                        add_outer(&mut rr, c, &right.basis, &right.basis);
                        add_outer(&mut rl, -c, &right.basis, &p.left.basis);
                    }
                    FacePointKind::Characteristic => {}
                }
            }
            if in_l {
                out.blocks.push(Block { row: l, col: l, data: ll });
                out.blocks.push(Block { row: l, col: r, data: lr });
            }
            if in_r {
                out.blocks.push(Block { row: r, col: r, data: rr });
                out.blocks.push(Block { row: r, col: l, data: rl });
            }
        }
    }
    Ok(out)
}

/// Assemble the upwind DG matrix and load vector.
///
/// Element and face contributions are computed independently (in parallel
/// unless disabled on the space) and merged in a fixed order, so the result
/// does not depend on the thread count.
pub fn assemble(space: &DGSpace, problem: &TransportProblem) -> Result<SparseSystem> {
    problem.validate(space.dim())?;
    let n = space.n_local();
    let ne = space.num_elements();
    let elements = space.map_range(ne, |e| volume_part(space, problem, e));
    let faces = space.map_range(space.mesh().faces().len(), |f| face_part(space, problem, f));

    let mut rows: Vec<BTreeMap<usize, Vec<f64>>> = Vec::with_capacity(ne);
    let mut rhs = Vec::with_capacity(ne * n);
    for (e, part) in elements.into_iter().enumerate() {
        let part = part?;
        let mut row = BTreeMap::new();
        row.insert(e, part.block);
        rows.push(row);
        rhs.extend(part.rhs);
    }
    for part in faces {
        let part = part?;
        for b in part.blocks {
            let slot = rows[b.row].entry(b.col).or_insert_with(|| vec![0.0; n * n]);
            for (s, d) in slot.iter_mut().zip(&b.data) {
                *s += d;
            }
        }
        if let Some((e, local)) = part.rhs {
            for (s, d) in rhs[e * n..(e + 1) * n].iter_mut().zip(&local) {
                *s += d;
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(ne * n + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(|r| r.len()).sum::<usize>() * n * n;
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for row in &rows {
        for i in 0..n {
            for (&c, data) in row {
                col_idx.extend(c * n..(c + 1) * n);
                values.extend_from_slice(&data[i * n..(i + 1) * n]);
            }
            row_ptr.push(col_idx.len());
        }
    }
    let block_pattern = rows.iter().map(|r| r.keys().copied().collect()).collect();
    Ok(SparseSystem {
        matrix: CsrMatrix {
            nrows: ne * n,
            ncols: ne * n,
            row_ptr,
            col_idx,
            values,
        },
        rhs,
        block_size: n,
        block_pattern,
    })
}
