use std::fmt::Write as _;
use std::path::PathBuf;

use super::{convergence_rate, dg_error, l2_error, rates_in_h, reference_projection, ProblemId, ProblemSetup, SolutionKind};
use crate::dg::{assemble, dg_norm_parts, stability_check, DGSpace};
use crate::error::{Error, Result};
use crate::fem;
use crate::geometry::{boundary_distance, build_isoparametric_map, mapped_measure, GeometricMap};
use crate::mesh::{load_gmsh, Mesh};
use crate::solver::{solve, SolverConfig};

pub const CSV_HEADER: &str = "level,nelem,ndof,l2_error,l2_rate,dg_error,dg_rate";

/// How `F_h` is built on each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryKind {
    /// Isoparametric map of the field degree.
    #[default]
    Curved,
    /// Affine map regardless of the field degree.
    Straight,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Built-in refinement levels of the problem's mesh family.
    Builtin(Vec<usize>),
    /// Gmsh files, coarsest first.
    Files(Vec<PathBuf>),
}

impl MeshSource {
    pub fn len(&self) -> usize {
        match self {
            Self::Builtin(l) => l.len(),
            Self::Files(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn level_label(&self, i: usize) -> usize {
        match self {
            Self::Builtin(l) => l[i],
            Self::Files(_) => i,
        }
    }

    fn mesh(&self, id: ProblemId, i: usize) -> Result<Mesh> {
        match self {
            Self::Builtin(l) => id.mesh(l[i]),
            Self::Files(f) => {
                let mesh = load_gmsh(&f[i])?;
                if mesh.dim() != id.dim() {
                    return Err(Error::InvalidInput(format!(
                        "{} is {}-dimensional, problem {} is {}-dimensional",
                        f[i].display(),
                        mesh.dim(),
                        id.name(),
                        id.dim()
                    )));
                }
                Ok(mesh)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadratureOverride {
    pub volume: Option<usize>,
    pub face: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemId,
    pub solution: SolutionKind,
    pub k: usize,
    pub mesh: MeshSource,
    pub geometry: GeometryKind,
    pub quadrature: QuadratureOverride,
    pub solver: SolverConfig,
    /// Parallel element and face loops.
    pub parallel: bool,
}

impl StudyConfig {
    pub fn new(problem: ProblemId, k: usize, levels: Vec<usize>) -> Self {
        Self {
            problem,
            solution: SolutionKind::Manufactured,
            k,
            mesh: MeshSource::Builtin(levels),
            geometry: GeometryKind::Curved,
            quadrature: QuadratureOverride::default(),
            solver: SolverConfig::default(),
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.len() < 2 {
            return Err(Error::ConfigParse {
                field: "levels".into(),
                message: "a study needs at least two levels".into(),
            });
        }
        if self.k == 0 || self.k > fem_max_degree() {
            return Err(Error::ConfigParse {
                field: "k".into(),
                message: format!("degree must be in 1..={}", fem_max_degree()),
            });
        }
        Ok(())
    }

    fn build_map(&self, mesh: &Mesh, setup: &ProblemSetup) -> Result<GeometricMap> {
        match self.geometry {
            GeometryKind::Curved => build_isoparametric_map(mesh, self.k, &setup.geometry),
            GeometryKind::Straight => GeometricMap::straight(mesh, &setup.geometry),
        }
    }

    fn space<'a>(&self, mesh: &'a Mesh, map: &'a GeometricMap) -> Result<DGSpace<'a>> {
        let v = self.quadrature.volume.unwrap_or(fem::default_volume_exactness(self.k));
        let f = self.quadrature.face.unwrap_or(fem::default_face_exactness(self.k));
        Ok(DGSpace::with_quadrature(mesh, map, self.k, v, f)?.with_parallel(self.parallel))
    }
}

fn fem_max_degree() -> usize {
    crate::geometry::MAX_MAP_DEGREE
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub nelem: usize,
    pub ndof: usize,
    pub l2_error: f64,
    pub l2_rate: Option<f64>,
    pub dg_error: f64,
    pub dg_rate: Option<f64>,
    /// Ratio of the two sides of the discrete stability bound.
    pub stability_ratio: Option<f64>,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

fn attach_rates(rows: &mut [StudyRow], dim: usize) -> Result<()> {
    if rows.len() < 2 {
        return Ok(());
    }
    let ndofs: Vec<usize> = rows.iter().map(|r| r.ndof).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
    let dg: Vec<f64> = rows.iter().map(|r| r.dg_error).collect();
    // Errors at round-off (exact problems) have no meaningful rate.
    let rates = |e: &[f64]| convergence_rate(e, &ndofs, dim).ok();
    if let Some(r) = rates(&l2) {
        for (row, rate) in rows[1..].iter_mut().zip(r) {
            row.l2_rate = Some(rate);
        }
    }
    if let Some(r) = rates(&dg) {
        for (row, rate) in rows[1..].iter_mut().zip(r) {
            row.dg_rate = Some(rate);
        }
    }
    Ok(())
}

fn at_level(level: usize) -> impl Fn(Error) -> Error {
    move |e| Error::AtLevel {
        level,
        source: Box::new(e),
    }
}

/// Solve on every level and measure the errors.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    config.validate()?;
    let setup = ProblemSetup::new(config.problem, config.solution);
    let mut rows = Vec::with_capacity(config.mesh.len());
    for i in 0..config.mesh.len() {
        let level = config.mesh.level_label(i);
        let row = (|| -> Result<StudyRow> {
            let mesh = config.mesh.mesh(config.problem, i)?;
            let map = config.build_map(&mesh, &setup)?;
            let space = config.space(&mesh, &map)?;
            let system = assemble(&space, &setup.problem)?;
            let out = solve(&system, &config.solver)?;
            let stab = stability_check(&space, &setup.problem, &out.solution)?;
            Ok(StudyRow {
                level,
                nelem: mesh.num_elements(),
                ndof: space.ndof(),
                l2_error: l2_error(&space, &out.solution, &setup.problem)?,
                l2_rate: None,
                dg_error: dg_error(&space, &setup.problem, &out.solution)?,
                dg_rate: None,
                stability_ratio: stab.ratio,
                residual: out.residual,
            })
        })()
        .map_err(at_level(level))?;
        log::info!(
            "{} k={} level {}: nelem={} ndof={} l2={:.4e} dg={:.4e}",
            config.problem.name(),
            config.k,
            level,
            row.nelem,
            row.ndof,
            row.l2_error,
            row.dg_error
        );
        rows.push(row);
    }
    attach_rates(&mut rows, config.problem.dim())?;
    Ok(rows)
}

/// Errors `‖Ĩ − ΛĨ‖` of the elementwise reference projection on every level.
pub fn projection_error_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    config.validate()?;
    let setup = ProblemSetup::new(config.problem, config.solution);
    let exact = setup.problem.exact.clone().ok_or(Error::MissingExactSolution)?;
    let mut rows = Vec::with_capacity(config.mesh.len());
    for i in 0..config.mesh.len() {
        let level = config.mesh.level_label(i);
        let row = (|| -> Result<StudyRow> {
            let mesh = config.mesh.mesh(config.problem, i)?;
            let map = config.build_map(&mesh, &setup)?;
            let space = config.space(&mesh, &map)?;
            let proj = reference_projection(&space, &*exact.value)?;
            let parts = dg_norm_parts(&space, &setup.problem, &|e, phi, x| {
                (exact.value)(x) - proj.eval_with(e, phi)
            })?;
            Ok(StudyRow {
                level,
                nelem: mesh.num_elements(),
                ndof: space.ndof(),
                l2_error: l2_error(&space, &proj, &setup.problem)?,
                l2_rate: None,
                dg_error: parts.norm(),
                dg_rate: None,
                stability_ratio: None,
                residual: 0.0,
            })
        })()
        .map_err(at_level(level))?;
        rows.push(row);
    }
    attach_rates(&mut rows, config.problem.dim())?;
    Ok(rows)
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|r| format!("{r:.5e}")).unwrap_or_default()
}

/// CSV with the fixed header; six significant digits in scientific notation,
/// empty rate cells on the first level.
pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.5e},{},{:.5e},{}",
            r.level,
            r.nelem,
            r.ndof,
            r.l2_error,
            fmt_rate(r.l2_rate),
            r.dg_error,
            fmt_rate(r.dg_rate)
        );
    }
    s
}

/// Geometric approximation quality of `F_h` on one level.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRow {
    pub level: usize,
    pub nelem: usize,
    /// Largest straight element diameter.
    pub h: f64,
    /// Largest `|φ(F_h(x̂))|` on boundary faces.
    pub boundary_distance: f64,
    /// `|meas(D_h) − meas(D)|`.
    pub measure_error: f64,
    pub boundary_rate: Option<f64>,
    pub measure_rate: Option<f64>,
}

/// Boundary distance and measure error of the isoparametric map of degree
/// `k` over built-in levels, with pairwise orders in `h`.
pub fn geometry_study(problem: ProblemId, k: usize, levels: &[usize]) -> Result<Vec<GeometryRow>> {
    let geometry = problem.geometry();
    let exact_measure = match problem {
        ProblemId::Polyhedron3dOnCurved => problem.mesh(0)?.straight_measure(),
        ProblemId::Square2d => 1.0,
        _ => geometry.exact_measure().expect("curved geometry has a measure"),
    };
    let order = 2 * k + 2;
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let row = (|| -> Result<GeometryRow> {
            let mesh = problem.mesh(level)?;
            let map = build_isoparametric_map(&mesh, k, &geometry)?;
            Ok(GeometryRow {
                level,
                nelem: mesh.num_elements(),
                h: mesh.mesh_size(),
                boundary_distance: boundary_distance(&map, &mesh, order)?,
                measure_error: (mapped_measure(&map, &mesh, order)? - exact_measure).abs(),
                boundary_rate: None,
                measure_rate: None,
            })
        })()
        .map_err(at_level(level))?;
        rows.push(row);
    }
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let bd: Vec<f64> = rows.iter().map(|r| r.boundary_distance).collect();
    let me: Vec<f64> = rows.iter().map(|r| r.measure_error).collect();
    if let Ok(r) = rates_in_h(&bd, &h) {
        for (row, rate) in rows[1..].iter_mut().zip(r) {
            row.boundary_rate = Some(rate);
        }
    }
    if let Ok(r) = rates_in_h(&me, &h) {
        for (row, rate) in rows[1..].iter_mut().zip(r) {
            row.measure_rate = Some(rate);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            StudyRow {
                level: 0,
                nelem: 24,
                ndof: 144,
                l2_error: 3.3747e-3,
                l2_rate: None,
                dg_error: 1.0,
                dg_rate: None,
                stability_ratio: None,
                residual: 0.0,
            },
            StudyRow {
                level: 1,
                nelem: 96,
                ndof: 576,
                l2_error: 4.5822e-4,
                l2_rate: Some(3.04054),
                dg_error: 0.25,
                dg_rate: Some(2.0),
                stability_ratio: None,
                residual: 0.0,
            },
        ];
        let csv = rows_to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "0,24,144,3.37470e-3,,1.00000e0,");
        assert_eq!(lines[2], "1,96,576,4.58220e-4,3.04054e0,2.50000e-1,2.00000e0");
    }

    #[test]
    fn needs_two_levels() {
        let c = StudyConfig::new(ProblemId::Disc2d, 2, vec![1]);
        assert!(matches!(run_study(&c), Err(Error::ConfigParse { .. })));
    }

    #[test]
    fn square_geometry_is_exact() {
        for row in geometry_study(ProblemId::Square2d, 2, &[0, 1]).unwrap() {
            assert!(row.boundary_distance <= 1e-12);
            assert!(row.measure_error <= 1e-12);
        }
    }

    #[test]
    fn constant_study_is_exact() {
        let mut c = StudyConfig::new(ProblemId::Disc2d, 2, vec![0, 1]);
        c.solution = SolutionKind::Constant;
        for row in run_study(&c).unwrap() {
            assert!(row.l2_error < 1e-10 && row.dg_error < 1e-10, "{row:?}");
        }
    }

    #[test]
    fn errors_carry_level_context() {
        let mut c = StudyConfig::new(ProblemId::Disc2d, 2, vec![0, 1]);
        c.quadrature.volume = Some(10_000);
        match run_study(&c) {
            Err(Error::AtLevel { level: 0, source }) => {
                assert!(matches!(*source, Error::UnsupportedDegree { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
