//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line
//! straight to stderr (bypassing the harness capture) and then asserts.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use isodg::analysis::{
    convergence_rate, geometry_study, projection_error_study, run_study, GeometryKind, MeshSource, ProblemId,
    SolutionKind, StudyConfig, StudyRow,
};
use isodg::cli::config::{load_config, FileConfig};
use isodg::dg::{apply_bilinear, assemble, DGSolution, DGSpace, TransportProblem};
use isodg::fem::{face_rule, volume_quadrature, MAX_EXACTNESS};
use isodg::geometry::{build_isoparametric_map, DomainGeometry};
use isodg::mesh::Mesh;

fn report(n: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {status}  {detail}");
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn shipped(name: &str) -> FileConfig {
    load_config(&manifest().join("configs").join(name)).unwrap()
}

/// Pairwise rates recomputed from the table columns, independent of the
/// library's rate routine.
fn oracle_rates(errors: &[f64], ndofs: &[usize], dim: usize) -> Vec<f64> {
    (1..errors.len())
        .map(|i| {
            let h_ratio = (ndofs[i - 1] as f64 / ndofs[i] as f64).powf(1.0 / dim as f64);
            (errors[i] / errors[i - 1]).log2() / h_ratio.log2()
        })
        .collect()
}

/// `(l2 rates, dg rates)` of a study, cross-checked against the oracle.
fn checked_rates(rows: &[StudyRow], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let ndofs: Vec<usize> = rows.iter().map(|r| r.ndof).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
    let dg: Vec<f64> = rows.iter().map(|r| r.dg_error).collect();
    let (ol2, odg) = (oracle_rates(&l2, &ndofs, dim), oracle_rates(&dg, &ndofs, dim));
    for (row, (a, b)) in rows[1..].iter().zip(ol2.iter().zip(&odg)) {
        assert!((row.l2_rate.unwrap() - a).abs() < 1e-10);
        assert!((row.dg_rate.unwrap() - b).abs() < 1e-10);
    }
    (ol2, odg)
}

fn table1(n: usize, config: &str, l2_range: (f64, f64), dg_range: (f64, f64), budget_s: f64) {
    let cfg = shipped(config);
    let start = Instant::now();
    let rows = run_study(&cfg.study).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!((4..=5).contains(&rows.len()));
    let (l2, dg) = checked_rates(&rows, 2);
    let (a, b) = (*l2.last().unwrap(), *dg.last().unwrap());
    let pass = (l2_range.0..=l2_range.1).contains(&a) && (dg_range.0..=dg_range.1).contains(&b) && secs <= budget_s;
    report(
        n,
        pass,
        &format!("disc2d k={}: final L2 rate {a:.3}, DG rate {b:.3}, {secs:.1}s", cfg.study.k),
    );
    assert!(pass);
}

#[test]
fn criterion_01_disc_k2_rates() {
    table1(1, "table1_k2.toml", (2.7, 3.3), (2.2, 2.8), 120.0);
}

#[test]
fn criterion_02_disc_k3_rates() {
    table1(2, "table1_k3.toml", (3.7, 4.3), (3.2, 3.8), 300.0);
}

#[test]
fn criteria_03_04_ball_curved_versus_straight() {
    let curved_cfg = shipped("table4.toml");
    let straight_cfg = shipped("table3.toml");
    assert_eq!(curved_cfg.study.geometry, GeometryKind::Curved);
    assert_eq!(straight_cfg.study.geometry, GeometryKind::Straight);
    assert_eq!(curved_cfg.study.mesh, straight_cfg.study.mesh);

    let start = Instant::now();
    let curved = run_study(&curved_cfg.study).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(curved.last().unwrap().nelem <= 3072);
    let (cl2, cdg) = checked_rates(&curved, 3);
    let increasing = cdg.windows(2).all(|w| w[1] > w[0]);
    let final_dg = *cdg.last().unwrap();
    let pass3 = final_dg >= 2.1 && increasing && secs <= 900.0;
    report(
        3,
        pass3,
        &format!("ball3d curved k=2: DG rates {cdg:.3?} (final ≥ 2.1, increasing), {secs:.1}s"),
    );

    let straight = run_study(&straight_cfg.study).unwrap();
    let (sl2, _) = checked_rates(&straight, 3);
    let (s_final, c_final) = (*sl2.last().unwrap(), *cl2.last().unwrap());
    let pass4 = s_final <= 2.3 && s_final < c_final;
    report(
        4,
        pass4,
        &format!("ball3d straight k=2: final L2 rate {s_final:.3} (≤ 2.3, curved {c_final:.3})"),
    );
    assert!(pass3 && pass4);
}

#[test]
fn criterion_05_constant_exactness() {
    let families = [
        (ProblemId::Disc2d, MeshSource::Builtin(vec![0, 1])),
        (ProblemId::Square2d, MeshSource::Builtin(vec![0, 1])),
        (ProblemId::Ball3d, MeshSource::Builtin(vec![0, 1])),
        (ProblemId::Polyhedron3dOnCurved, MeshSource::Builtin(vec![0, 1])),
        (ProblemId::Ball3d, MeshSource::Files(vec![manifest().join("data/ball48.msh"); 2])),
    ];
    let mut worst: f64 = 0.0;
    for (id, mesh) in families {
        for k in 1..=3 {
            let mut cfg = StudyConfig::new(id, k, vec![0, 1]);
            cfg.mesh = mesh.clone();
            cfg.solution = SolutionKind::Constant;
            for row in run_study(&cfg).unwrap() {
                worst = worst.max(row.l2_error).max(row.dg_error);
            }
        }
    }
    let pass = worst <= 1e-10;
    report(5, pass, &format!("constant solution: worst L2/DG error {worst:.2e} (≤ 1e-10)"));
    assert!(pass);
}

#[test]
fn criterion_06_polynomial_exactness() {
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for p in 0..=k {
            let mut cfg = StudyConfig::new(ProblemId::Square2d, k, vec![0, 1]);
            cfg.solution = SolutionKind::Polynomial(p);
            cfg.geometry = GeometryKind::Straight;
            for row in run_study(&cfg).unwrap() {
                worst = worst.max(row.dg_error);
            }
        }
    }
    let pass = worst <= 1e-9;
    report(6, pass, &format!("square2d, degree ≤ k polynomials: worst DG error {worst:.2e} (≤ 1e-9)"));
    assert!(pass);
}

fn unit(space: &DGSpace, i: usize) -> DGSolution {
    let mut c = vec![0.0; space.ndof()];
    c[i] = 1.0;
    DGSolution::from_coeffs(space, c).unwrap()
}

/// Largest `|A_ij − ℬ(φ_j, φ_i)|` over all basis pairs.
fn form_gap(mesh: &Mesh, geometry: &DomainGeometry, k: usize, problem: &TransportProblem) -> f64 {
    let map = build_isoparametric_map(mesh, k, geometry).unwrap();
    let space = DGSpace::new(mesh, &map, k).unwrap();
    let sys = assemble(&space, problem).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..space.ndof() {
        let v = unit(&space, i);
        for j in 0..space.ndof() {
            let b = apply_bilinear(&space, problem, &unit(&space, j), &v).unwrap();
            worst = worst.max((b - sys.matrix.get(i, j)).abs());
        }
    }
    worst
}

#[test]
fn criterion_07_form_equivalence() {
    let s3 = 3f64.sqrt();
    let problem = TransportProblem {
        dim: 2,
        direction: [s3 / 2.0, 0.5, 0.0],
        sigma: 1.3,
        source: Arc::new(|x| 1.0 + x[0]),
        inflow: Arc::new(|x| 2.0 - x[1]),
        exact: None,
    };
    let skewed = Mesh::new(
        2,
        vec![[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.0], [1.2, 1.1, 0.0]],
        vec![vec![0, 1, 2], vec![1, 3, 2]],
    )
    .unwrap();
    // two triangles inscribed in the disc, sharing a diameter; the curved
    // map is singular at the corner where two arcs meet once k = 3, so the
    // curved pair is checked for k ≤ 2
    let halves = Mesh::new(
        2,
        vec![[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, -0.5, 0.0]],
        vec![vec![0, 1, 2], vec![1, 0, 3]],
    )
    .unwrap();
    let disc = DomainGeometry::circle(0.0, 0.0, 0.5);
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        worst = worst.max(form_gap(&skewed, &DomainGeometry::Polygonal, k, &problem));
    }
    for k in 1..=2 {
        worst = worst.max(form_gap(&halves, &disc, k, &problem));
    }
    let pass = worst <= 1e-10;
    report(
        7,
        pass,
        &format!("assembled vs integrated-by-parts form on 2-element meshes: max |Δ| {worst:.2e} (≤ 1e-10)"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_stability_ratio() {
    let rows = run_study(&shipped("table1_k2.toml").study).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.stability_ratio.unwrap()).collect();
    assert_eq!(ratios.len(), 4);
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let pass = ratios.iter().all(|r| r.is_finite() && *r > 0.0) && max / min <= 3.0;
    report(8, pass, &format!("stability ratios {ratios:.4?}: max/min {:.4} (≤ 3)", max / min));
    assert!(pass);
}

#[test]
fn criterion_09_projection_rates() {
    let cfg = shipped("projection_lemma31.toml");
    let rows = projection_error_study(&cfg.study).unwrap();
    let (l2, dg) = checked_rates(&rows, 2);
    let (a, b) = (*l2.last().unwrap(), *dg.last().unwrap());
    let pass = b >= 2.2 && a >= 2.7;
    report(9, pass, &format!("projection on disc2d k=2: DG rate {b:.3} (≥ 2.2), L2 rate {a:.3} (≥ 2.7)"));
    assert!(pass);
}

#[test]
fn criterion_10_geometry_orders() {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in 1..=3 {
        let rows = geometry_study(ProblemId::Disc2d, k, &[1, 2, 3, 4]).unwrap();
        let last = rows.last().unwrap();
        let prev = &rows[rows.len() - 2];
        let order = |a: f64, b: f64| (b / a).ln() / (last.h / prev.h).ln();
        let bd = order(prev.boundary_distance, last.boundary_distance);
        let me = order(prev.measure_error, last.measure_error);
        assert!((bd - last.boundary_rate.unwrap()).abs() < 1e-10);
        assert!((me - last.measure_rate.unwrap()).abs() < 1e-10);
        pass &= bd >= k as f64 + 0.7 && me >= k as f64 + 0.7;
        detail.push(format!("k={k}: boundary {bd:.2}, area {me:.2}"));
    }
    report(10, pass, &format!("disc geometry orders [{}]", detail.join("; ")));
    assert!(pass);
}

/// `∫ x^a y^b z^c` over the reference simplex: `a! b! c! / (a+b+c+d)!`.
fn monomial_integral(dim: usize, e: [u32; 3]) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let total = e[0] + e[1] + e[2] + dim as u32;
    // (a+b+c+d)! can overflow its numerator partner; divide in steps
    let mut r = fact(e[0]) * fact(e[1]) * fact(e[2]);
    for i in 1..=total {
        r /= f64::from(i);
    }
    r
}

fn sweep(dim: usize, points: &[[f64; 3]], weights: &[f64], exactness: usize) -> f64 {
    let q = exactness as u32;
    let mut worst: f64 = 0.0;
    let zmax = if dim == 3 { q } else { 0 };
    for a in 0..=q {
        for b in 0..=q - a {
            for c in 0..=zmax.min(q - a - b) {
                let approx: f64 = points
                    .iter()
                    .zip(weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                    .sum();
                let exact = monomial_integral(dim, [a, b, c]);
                worst = worst.max(((approx - exact) / exact).abs());
            }
        }
    }
    worst
}

#[test]
fn criterion_11_quadrature_sweep() {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for q in 0..=MAX_EXACTNESS {
            let rule = volume_quadrature(dim, q).unwrap();
            worst = worst.max(sweep(dim, &rule.points, &rule.weights, q));
            // face rules are rules on the (d-1)-simplex in barycentric form;
            // scale the weights to its reference measure
            let face = face_rule(dim, q).unwrap();
            let pts: Vec<[f64; 3]> = face.bary.iter().map(|b| [b[1], b[2], 0.0]).collect();
            let measure = if dim == 2 { 1.0 } else { 0.5 };
            let w: Vec<f64> = face.weights.iter().map(|w| w * measure).collect();
            worst = worst.max(if dim == 2 {
                sweep_segment(&pts, &w, q)
            } else {
                sweep(2, &pts, &w, q)
            });
        }
    }
    let pass = worst <= 1e-12;
    report(
        11,
        pass,
        &format!("monomial sweep, exactness 0..={MAX_EXACTNESS}: max relative error {worst:.2e} (≤ 1e-12)"),
    );
    assert!(pass);
}

/// `∫_0^1 t^a dt = 1/(a+1)`.
fn sweep_segment(points: &[[f64; 3]], weights: &[f64], exactness: usize) -> f64 {
    (0..=exactness as i32)
        .map(|a| {
            let approx: f64 = points.iter().zip(weights).map(|(p, w)| w * p[0].powi(a)).sum();
            let exact = 1.0 / f64::from(a + 1);
            ((approx - exact) / exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_12_rate_formula() {
    let r = convergence_rate(&[3.3747e-3, 4.5822e-4], &[192, 714], 2).unwrap();
    let oracle = oracle_rates(&[3.3747e-3, 4.5822e-4], &[192, 714], 2)[0];
    let pass = (r[0] - 3.04).abs() <= 0.01 && (r[0] - oracle).abs() < 1e-12;
    report(12, pass, &format!("published pair 192 → 714 dofs: rate {:.4} (3.04 ± 0.01)", r[0]));
    assert!(pass);
}

#[test]
fn shipped_coarse_ball_has_48_tetrahedra() {
    let mesh = isodg::mesh::load_gmsh(Path::new(&manifest().join("data/ball48.msh"))).unwrap();
    assert_eq!(mesh.num_elements(), 48);
    assert_eq!(mesh.dim(), 3);
    assert!(mesh.validate(Some(&ProblemId::Ball3d.geometry())).is_ok());
}
