//! Small fixed-size vector and matrix helpers.
//!
//! Points are stored as `[f64; 3]` regardless of the spatial dimension; in 2D
//! the third component is zero and matrices use only their leading `d x d`
//! block.

pub type Point = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ORIGIN: Point = [0.0; 3];

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Determinant of the leading `dim x dim` block.
pub fn det(m: &Mat3, dim: usize) -> f64 {
    match dim {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Inverse of the leading `dim x dim` block given its determinant.
pub fn inverse(m: &Mat3, det: f64, dim: usize) -> Mat3 {
    let mut inv = [[0.0; 3]; 3];
    let r = 1.0 / det;
    match dim {
        2 => {
            inv[0][0] = m[1][1] * r;
            inv[0][1] = -m[0][1] * r;
            inv[1][0] = -m[1][0] * r;
            inv[1][1] = m[0][0] * r;
        }
        3 => {
            inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * r;
            inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * r;
            inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * r;
            inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * r;
            inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * r;
            inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * r;
            inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * r;
            inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * r;
            inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * r;
        }
        _ => {
            inv[0][0] = r;
        }
    }
    inv
}

/// `m^T v` using the leading `dim x dim` block.
#[inline]
pub fn mat_t_vec(m: &Mat3, v: &Point, dim: usize) -> Point {
    let mut out = ORIGIN;
    for j in 0..dim {
        for i in 0..dim {
            out[j] += m[i][j] * v[i];
        }
    }
    out
}

/// `m v` using the leading `dim x dim` block.
#[inline]
pub fn mat_vec(m: &Mat3, v: &Point, dim: usize) -> Point {
    let mut out = ORIGIN;
    for i in 0..dim {
        for j in 0..dim {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// Dense row-major LU factorization with partial pivoting, used for the
/// element blocks of DG systems.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factor an `n x n` row-major matrix. Returns `None` when a pivot is
    /// exactly zero or not finite.
    pub fn new(n: usize, mut a: Vec<f64>) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv, max) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(max > 0.0) || !max.is_finite() {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                perm.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                if f != 0.0 {
                    for j in col + 1..n {
                        a[r * n + j] -= f * a[col * n + j];
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(&y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip_3d() {
        let m = [[2.0, 1.0, 0.5], [0.0, 3.0, 1.0], [1.0, 0.0, 4.0]];
        let d = det(&m, 3);
        let inv = inverse(&m, d, 3);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|l| m[i][l] * inv[l][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dense_lu_solves_with_pivoting() {
        let a = vec![0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 4.0, -3.0, 8.0];
        let lu = DenseLu::new(3, a.clone()).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum())
            .collect();
        lu.solve_in_place(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
        assert!(DenseLu::new(2, vec![1.0, 2.0, 2.0, 4.0]).is_none());
    }
}
