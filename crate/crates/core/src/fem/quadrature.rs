//! Quadrature on reference simplices and their faces.
//!
//! Rules are collapsed (Duffy) tensor products of Gauss-Legendre rules, so any
//! exactness degree up to [`MAX_EXACTNESS`] can be generated.

use super::simplex;
use crate::error::{Error, Result};
use crate::linalg::Point;

/// Highest exactness degree the generators accept.
pub const MAX_EXACTNESS: usize = 40;

/// Points and positive weights on a reference domain.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// A rule on the `(d-1)`-simplex expressed in barycentric coordinates of the
/// face vertices, with weights summing to one. It is independent of which
/// element sees the face, which is what lets both sides of an interior face
/// agree on the physical quadrature points.
#[derive(Debug, Clone)]
pub struct FaceRule {
    /// `dim` barycentric weights per point (unused entries are zero).
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Gauss-Legendre points and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

fn check_degree(exactness: usize) -> Result<()> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::UnsupportedDegree {
            degree: exactness,
            max: MAX_EXACTNESS,
        });
    }
    Ok(())
}

fn segment_rule(exactness: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre((exactness + 2) / 2)
}

fn triangle_rule(exactness: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    // x = u (1 - v), y = v; the collapsed direction carries one extra degree.
    let (g, gw) = gauss_legendre((exactness + 3) / 2);
    let mut pts = Vec::with_capacity(g.len() * g.len());
    let mut wts = Vec::with_capacity(g.len() * g.len());
    for (v, wv) in g.iter().zip(&gw) {
        for (u, wu) in g.iter().zip(&gw) {
            pts.push([u * (1.0 - v), *v]);
            wts.push(wu * wv * (1.0 - v));
        }
    }
    (pts, wts)
}

fn tetrahedron_rule(exactness: usize) -> (Vec<Point>, Vec<f64>) {
    let (g, gw) = gauss_legendre((exactness + 4) / 2);
    let mut pts = Vec::with_capacity(g.len().pow(3));
    let mut wts = Vec::with_capacity(g.len().pow(3));
    for (w, ww) in g.iter().zip(&gw) {
        for (v, wv) in g.iter().zip(&gw) {
            for (u, wu) in g.iter().zip(&gw) {
                pts.push([u * (1.0 - v) * (1.0 - w), v * (1.0 - w), *w]);
                wts.push(wu * wv * ww * (1.0 - v) * (1.0 - w) * (1.0 - w));
            }
        }
    }
    (pts, wts)
}

/// Volume rule on the reference simplex of dimension `dim`.
pub fn volume_quadrature(dim: usize, exactness: usize) -> Result<QuadratureRule> {
    check_degree(exactness)?;
    let (points, weights) = match dim {
        2 => {
            let (p, w) = triangle_rule(exactness);
            (p.into_iter().map(|q| [q[0], q[1], 0.0]).collect(), w)
        }
        3 => tetrahedron_rule(exactness),
        _ => return Err(Error::UnsupportedDimension(dim)),
    };
    Ok(QuadratureRule {
        points,
        weights,
        exactness,
    })
}

/// Rule on the `(dim-1)`-simplex in face-barycentric form.
pub fn face_rule(dim: usize, exactness: usize) -> Result<FaceRule> {
    check_degree(exactness)?;
    let (bary, weights) = match dim {
        2 => {
            let (x, w) = segment_rule(exactness);
            (
                x.iter().map(|&t| [1.0 - t, t, 0.0]).collect(),
                w,
            )
        }
        3 => {
            let (p, w) = triangle_rule(exactness);
            (
                p.iter().map(|q| [1.0 - q[0] - q[1], q[0], q[1]]).collect(),
                w.iter().map(|x| 2.0 * x).collect(),
            )
        }
        _ => return Err(Error::UnsupportedDimension(dim)),
    };
    Ok(FaceRule {
        bary,
        weights,
        exactness,
    })
}

/// Face rule embedded on local face `face` of the reference simplex; the
/// weights sum to the reference measure of that face.
pub fn face_quadrature(dim: usize, exactness: usize, face: usize) -> Result<QuadratureRule> {
    if face > dim {
        return Err(Error::InvalidInput(format!(
            "local face {face} out of range for dimension {dim}"
        )));
    }
    let rule = face_rule(dim, exactness)?;
    let verts = simplex::face_vertices(dim, face);
    let measure = simplex::face_measure(dim, face);
    let points = rule
        .bary
        .iter()
        .map(|b| simplex::face_point(dim, &verts, b))
        .collect();
    let weights = rule.weights.iter().map(|w| w * measure).collect();
    Ok(QuadratureRule {
        points,
        weights,
        exactness,
    })
}
