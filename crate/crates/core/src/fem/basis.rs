//! Nodal Lagrange bases on equally spaced simplex nodes.
//!
//! With barycentric coordinates `λ` and a node multi-index `α` (`|α| = k`),
//! the basis function attached to the node `α / k` is
//!
//! ```text
//! ψ_α(λ) = Π_i Π_{j < α_i} (k λ_i - j) / (j + 1)
//! ```
//!
//! which is one at its own node and vanishes at every other node.

use super::simplex;
use crate::linalg::{Point, ORIGIN};

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    dim: usize,
    degree: usize,
    /// Multi-indices over the `dim + 1` barycentric coordinates.
    alphas: Vec<[usize; 4]>,
    nodes: Vec<Point>,
}

impl ReferenceElement {
    /// Degree 0 is allowed and yields the single constant function.
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim == 2 || dim == 3, "unsupported dimension {dim}");
        let mut alphas = Vec::new();
        enumerate(dim + 1, degree, &mut [0; 4], 0, &mut alphas);
        // vertices, then edges, faces and interior nodes
        alphas.sort_by_key(|a| {
            let support = a.iter().filter(|&&x| x > 0).count();
            let first = a.iter().position(|&x| x > 0).unwrap_or(0);
            let rev: Vec<usize> = a.iter().map(|x| usize::MAX - x).collect();
            (support, first, rev)
        });
        let nodes = alphas
            .iter()
            .map(|a| {
                let mut p = ORIGIN;
                for c in 0..dim {
                    p[c] = if degree == 0 {
                        1.0 / (dim as f64 + 1.0)
                    } else {
                        a[c + 1] as f64 / degree as f64
                    };
                }
                p
            })
            .collect();
        Self {
            dim,
            degree,
            alphas,
            nodes,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Barycentric multi-index of node `i`.
    pub fn multi_index(&self, i: usize) -> &[usize; 4] {
        &self.alphas[i]
    }

    /// Index of the node sitting on reference vertex `v`.
    pub fn vertex_node(&self, v: usize) -> usize {
        self.alphas
            .iter()
            .position(|a| a[v] == self.degree && self.degree > 0)
            .expect("degree-0 element has no vertex nodes")
    }

    pub fn eval(&self, x: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &Point, out: &mut [f64]) {
        let lam = simplex::barycentric(self.dim, x);
        let k = self.degree as f64;
        for (a, o) in self.alphas.iter().zip(out.iter_mut()) {
            *o = (0..=self.dim).map(|i| factor(k, lam[i], a[i]).0).product();
        }
    }

    /// Reference gradients, one row per basis function.
    pub fn grad(&self, x: &Point) -> Vec<Point> {
        let mut out = vec![ORIGIN; self.len()];
        self.grad_into(x, &mut out);
        out
    }

    pub fn grad_into(&self, x: &Point, out: &mut [Point]) {
        let d = self.dim;
        let lam = simplex::barycentric(d, x);
        let k = self.degree as f64;
        for (a, g) in self.alphas.iter().zip(out.iter_mut()) {
            let mut vals = [0.0; 4];
            let mut ders = [0.0; 4];
            for i in 0..=d {
                (vals[i], ders[i]) = factor(k, lam[i], a[i]);
            }
            // derivative with respect to each barycentric coordinate
            let mut dl = [0.0; 4];
            for i in 0..=d {
                dl[i] = ders[i]
                    * (0..=d)
                        .filter(|&l| l != i)
                        .map(|l| vals[l])
                        .product::<f64>();
            }
            *g = ORIGIN;
            for c in 0..d {
                g[c] = dl[c + 1] - dl[0];
            }
        }
    }
}

/// `Π_{j < m} (k t - j) / (j + 1)` and its derivative in `t`.
fn factor(k: f64, t: f64, m: usize) -> (f64, f64) {
    let mut val = 1.0;
    let mut der = 0.0;
    for j in 0..m {
        let c = (k * t - j as f64) / (j as f64 + 1.0);
        let dc = k / (j as f64 + 1.0);
        der = der * c + val * dc;
        val *= c;
    }
    (val, der)
}

fn enumerate(parts: usize, total: usize, cur: &mut [usize; 4], pos: usize, out: &mut Vec<[usize; 4]>) {
    if pos == parts - 1 {
        cur[pos] = total;
        out.push(*cur);
        return;
    }
    for v in 0..=total {
        cur[pos] = v;
        enumerate(parts, total - v, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_point(dim: usize, a: f64, b: f64, c: f64) -> Point {
        // fold a cube sample into the simplex
        let mut v = [a, b, c];
        v[..dim].sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut p = ORIGIN;
        let mut prev = 0.0;
        for i in 0..dim {
            p[i] = v[i] - prev;
            prev = v[i];
        }
        p
    }

    #[test]
    fn kronecker_property() {
        for dim in [2, 3] {
            for k in 0..=4 {
                let re = ReferenceElement::new(dim, k);
                assert_eq!(re.len(), simplex::num_nodes(dim, k));
                for (j, node) in re.nodes().iter().enumerate() {
                    let v = re.eval(node);
                    for (i, vi) in v.iter().enumerate() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((vi - e).abs() < 1e-12, "dim {dim} k {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn linear_triangle_examples() {
        let re = ReferenceElement::new(2, 1);
        let v = re.eval(&[1.0 / 3.0, 1.0 / 3.0, 0.0]);
        for x in v {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let g = re.grad(&[0.2, 0.3, 0.0]);
        assert_eq!(&g[0][..2], &[-1.0, -1.0]);
        assert_eq!(&g[1][..2], &[1.0, 0.0]);
        assert_eq!(&g[2][..2], &[0.0, 1.0]);
    }

    #[test]
    fn vertices_first() {
        for dim in [2, 3] {
            let re = ReferenceElement::new(dim, 3);
            for v in 0..=dim {
                assert_eq!(re.vertex_node(v), v);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let re = ReferenceElement::new(2, 2);
        let x = [0.21, 0.33, 0.0];
        let g = re.grad(&x);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let (vp, vm) = (re.eval(&xp), re.eval(&xm));
            for i in 0..re.len() {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][c]).abs() < 1e-7);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, k in 0usize..=4, three in any::<bool>()) {
            let dim = if three { 3 } else { 2 };
            let re = ReferenceElement::new(dim, k);
            let x = random_point(dim, a, b, c);
            let s: f64 = re.eval(&x).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let g = re.grad(&x);
            for comp in 0..dim {
                let gs: f64 = g.iter().map(|r| r[comp]).sum();
                prop_assert!(gs.abs() < 1e-10);
            }
        }

        #[test]
        fn interpolation_reproduces_monomials(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, k in 1usize..=4, three in any::<bool>()) {
            let dim = if three { 3 } else { 2 };
            let re = ReferenceElement::new(dim, k);
            let x = random_point(dim, a, b, c);
            for p in 0..=k as i32 {
                for q in 0..=(k as i32 - p) {
                    let r = if three { k as i32 - p - q } else { 0 };
                    let f = |y: &Point| y[0].powi(p) * y[1].powi(q) * y[2].powi(r);
                    let interp: f64 = re.nodes().iter().zip(re.eval(&x)).map(|(n, v)| f(n) * v).sum();
                    prop_assert!((interp - f(&x)).abs() < 1e-10);
                }
            }
        }
    }
}
