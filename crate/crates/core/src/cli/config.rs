//! Study configuration files.
//!
//! ```toml
//! problem = "disc2d"          # disc2d | ball3d | square2d | polyhedron3d-on-curved
//! k = 2
//! levels = [1, 2, 3, 4]       # or: mesh_files = ["a.msh", "b.msh"]
//! geometry_kind = "curved"    # curved | straight
//! solution = "manufactured"   # manufactured | constant | polynomial
//! polynomial_degree = 2       # only with solution = "polynomial"
//! study = "solve"             # solve | projection
//! output = "table1_k2.csv"
//! parallel = true
//!
//! [quadrature]
//! volume = 6
//! face = 7
//!
//! [solver]
//! method = "direct"           # direct | gmres
//! restart = 60
//! tolerance = 1e-12
//! max_iterations = 5000
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{GeometryKind, MeshSource, ProblemId, QuadratureOverride, SolutionKind, StudyConfig};
use crate::error::{Error, Result};
use crate::solver::{SolverConfig, SolverMethod, DEFAULT_RESTART};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    Solve,
    Projection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    pub study: StudyConfig,
    pub mode: StudyMode,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<String>,
    k: Option<i64>,
    levels: Option<Vec<i64>>,
    mesh_files: Option<Vec<PathBuf>>,
    geometry_kind: Option<String>,
    solution: Option<String>,
    polynomial_degree: Option<i64>,
    study: Option<String>,
    output: Option<PathBuf>,
    parallel: Option<bool>,
    quadrature: Option<RawQuadrature>,
    solver: Option<RawSolver>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    volume: Option<i64>,
    face: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<String>,
    restart: Option<i64>,
    tolerance: Option<f64>,
    max_iterations: Option<i64>,
}

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        field: field.into(),
        message: message.into(),
    }
}

fn nonneg(field: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| bad(field, format!("must be nonnegative, got {v}")))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Field named in a serde message such as "unknown field `x`".
fn field_in(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

pub fn parse_problem(s: &str) -> Result<ProblemId> {
    Ok(match s {
        "disc2d" => ProblemId::Disc2d,
        "ball3d" => ProblemId::Ball3d,
        "square2d" => ProblemId::Square2d,
        "polyhedron3d-on-curved" => ProblemId::Polyhedron3dOnCurved,
        _ => {
            return Err(bad(
                "problem",
                format!("unknown problem `{s}` (expected disc2d, ball3d, square2d or polyhedron3d-on-curved)"),
            ))
        }
    })
}

/// Parse a configuration; relative mesh paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<FileConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        let field = field_in(e.message()).unwrap_or("<document>").to_string();
        let message = match line {
            Some(l) => format!("line {l}: {}", e.message()),
            None => e.message().to_string(),
        };
        Error::ConfigParse { field, message }
    })?;

    let problem = parse_problem(raw.problem.as_deref().ok_or_else(|| bad("problem", "missing"))?)?;
    let k = nonneg("k", raw.k.ok_or_else(|| bad("k", "missing"))?)?;
    let mesh = match (raw.levels, raw.mesh_files) {
        (Some(_), Some(_)) => return Err(bad("levels", "give either `levels` or `mesh_files`, not both")),
        (Some(l), None) => MeshSource::Builtin(l.into_iter().map(|v| nonneg("levels", v)).collect::<Result<_>>()?),
        (None, Some(f)) => MeshSource::Files(f.into_iter().map(|p| base.join(p)).collect()),
        (None, None) => return Err(bad("levels", "missing (or give `mesh_files`)")),
    };
    let geometry = match raw.geometry_kind.as_deref() {
        None | Some("curved") => GeometryKind::Curved,
        Some("straight") => GeometryKind::Straight,
        Some(s) => return Err(bad("geometry_kind", format!("expected curved or straight, got `{s}`"))),
    };
    let solution = match raw.solution.as_deref() {
        None | Some("manufactured") => SolutionKind::Manufactured,
        Some("constant") => SolutionKind::Constant,
        Some("polynomial") => SolutionKind::Polynomial(nonneg(
            "polynomial_degree",
            raw.polynomial_degree
                .ok_or_else(|| bad("polynomial_degree", "required with solution = \"polynomial\""))?,
        )?),
        Some(s) => return Err(bad("solution", format!("expected manufactured, constant or polynomial, got `{s}`"))),
    };
    let mode = match raw.study.as_deref() {
        None | Some("solve") => StudyMode::Solve,
        Some("projection") => StudyMode::Projection,
        Some(s) => return Err(bad("study", format!("expected solve or projection, got `{s}`"))),
    };
    let quadrature = match raw.quadrature {
        None => QuadratureOverride::default(),
        Some(q) => QuadratureOverride {
            volume: q.volume.map(|v| nonneg("quadrature.volume", v)).transpose()?,
            face: q.face.map(|v| nonneg("quadrature.face", v)).transpose()?,
        },
    };
    let mut solver = SolverConfig::default();
    if let Some(s) = raw.solver {
        let restart = s.restart.map(|v| nonneg("solver.restart", v)).transpose()?;
        solver.method = match s.method.as_deref() {
            None | Some("direct") => SolverMethod::Direct,
            Some("gmres") => SolverMethod::Gmres {
                restart: restart.unwrap_or(DEFAULT_RESTART),
            },
            Some(m) => return Err(bad("solver.method", format!("expected direct or gmres, got `{m}`"))),
        };
        if let Some(t) = s.tolerance {
            if !(t > 0.0) {
                return Err(bad("solver.tolerance", format!("must be positive, got {t}")));
            }
            solver.tolerance = t;
        }
        solver.max_iterations = s.max_iterations.map(|v| nonneg("solver.max_iterations", v)).transpose()?;
    }
    let study = StudyConfig {
        problem,
        solution,
        k,
        mesh,
        geometry,
        quadrature,
        solver,
        parallel: raw.parallel.unwrap_or(true),
    };
    study.validate()?;
    Ok(FileConfig {
        study,
        mode,
        output: raw.output,
    })
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}
