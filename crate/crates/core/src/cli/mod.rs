//! Command-line front end.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};

use crate::analysis::{
    dg_error, geometry_study, l2_error, projection_error_study, rows_to_csv, run_study, GeometryRow, ProblemSetup,
    StudyRow,
};
use crate::dg::{assemble, stability_check, DGSpace};
use crate::error::{Error, Result};
use crate::geometry::{build_isoparametric_map, GeometricMap};
use crate::mesh::{load_gmsh, write_gmsh, Mesh};
use crate::solver::solve;
use config::{load_config, parse_problem, FileConfig, StudyMode};

#[derive(Debug, Parser)]
#[command(name = "isodg", version, about = "Isoparametric upwind DG transport solver")]
pub struct Cli {
    /// Worker threads for assembly (1 runs everything on the calling thread).
    #[arg(long, env = "ISODG_THREADS", global = true)]
    pub threads: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a refinement study and write the CSV table.
    Study {
        config: PathBuf,
        /// CSV path (defaults to the config's `output`, else `<config stem>.csv`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve on a single level and print errors and diagnostics.
    Solve {
        config: PathBuf,
        /// Index into the configured levels (default: the first).
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Write the coefficient vector, one value per line.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print mesh statistics for a Gmsh file or a built-in mesh.
    MeshInfo {
        /// Gmsh file to inspect.
        mesh: Option<PathBuf>,
        /// Built-in family instead of a file.
        #[arg(long, conflicts_with = "mesh")]
        problem: Option<String>,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Also write the mesh in MSH 2.2 format.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Report boundary-distance and measure errors of the geometric map.
    GeometryCheck {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Process exit code for an error: 2 configuration, 3 numerical failure,
/// 4 I/O or mesh input.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::ConfigParse { .. }
        | Error::InvalidInput(_)
        | Error::UnsupportedDegree { .. }
        | Error::UnsupportedDimension(_)
        | Error::NonUnitDirection(_)
        | Error::MissingExactSolution => 2,
        Error::ProjectionFailure { .. }
        | Error::DegenerateMap { .. }
        | Error::DegenerateElement(_)
        | Error::SingularMatrix
        | Error::MaxIterationsExceeded { .. }
        | Error::NonpositiveError(_)
        | Error::LengthMismatch(..) => 3,
        Error::Io(_)
        | Error::UnsupportedFormat(_)
        | Error::MixedElementTypes(_)
        | Error::DanglingVertexReference { .. }
        | Error::MeshParse { .. } => 4,
        Error::AtLevel { .. } => unreachable!("root strips level context"),
    }
}

fn fmt_opt(r: Option<f64>, width: usize) -> String {
    match r {
        Some(v) => format!("{v:>width$.4}"),
        None => format!("{:>width$}", "-"),
    }
}

pub fn format_table(rows: &[StudyRow]) -> String {
    let mut s = format!(
        "{:>5} {:>8} {:>9} {:>12} {:>7} {:>12} {:>7}\n",
        "level", "nelem", "ndof", "L2 error", "rate", "DG error", "rate"
    );
    for r in rows {
        s += &format!(
            "{:>5} {:>8} {:>9} {:>12.4e} {} {:>12.4e} {}\n",
            r.level,
            r.nelem,
            r.ndof,
            r.l2_error,
            fmt_opt(r.l2_rate, 7),
            r.dg_error,
            fmt_opt(r.dg_rate, 7)
        );
    }
    s
}

pub fn format_geometry_table(rows: &[GeometryRow]) -> String {
    let mut s = format!(
        "{:>5} {:>8} {:>10} {:>12} {:>7} {:>12} {:>7}\n",
        "level", "nelem", "h", "bdry dist", "order", "meas err", "order"
    );
    for r in rows {
        s += &format!(
            "{:>5} {:>8} {:>10.4e} {:>12.4e} {} {:>12.4e} {}\n",
            r.level,
            r.nelem,
            r.h,
            r.boundary_distance,
            fmt_opt(r.boundary_rate, 7),
            r.measure_error,
            fmt_opt(r.measure_rate, 7)
        );
    }
    s
}

fn geometry_csv(rows: &[GeometryRow]) -> String {
    let mut s = String::from("level,nelem,h,boundary_distance,boundary_rate,measure_error,measure_rate\n");
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.5e}")).unwrap_or_default();
    for r in rows {
        s += &format!(
            "{},{},{:.5e},{:.5e},{},{:.5e},{}\n",
            r.level,
            r.nelem,
            r.h,
            r.boundary_distance,
            rate(r.boundary_rate),
            r.measure_error,
            rate(r.measure_rate)
        );
    }
    s
}

fn csv_path(explicit: Option<PathBuf>, cfg: &FileConfig, config: &Path, suffix: &str) -> PathBuf {
    explicit.or_else(|| cfg.output.clone()).unwrap_or_else(|| {
        let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("study");
        PathBuf::from(format!("{stem}{suffix}.csv"))
    })
}

fn configure_threads(threads: Option<usize>, cfg: &mut FileConfig) {
    if let Some(n) = threads {
        if n == 1 {
            cfg.study.parallel = false;
        } else if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::warn!("thread pool already initialized; --threads {n} ignored");
        }
    }
}

/// Execute a parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Study { config, output } => {
            let mut cfg = load_config(&config)?;
            configure_threads(cli.threads, &mut cfg);
            let rows = match cfg.mode {
                StudyMode::Solve => run_study(&cfg.study)?,
                StudyMode::Projection => projection_error_study(&cfg.study)?,
            };
            let path = csv_path(output, &cfg, &config, "");
            std::fs::write(&path, rows_to_csv(&rows))?;
            write!(out, "{}", format_table(&rows))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::Solve { config, index, output } => {
            let mut cfg = load_config(&config)?;
            configure_threads(cli.threads, &mut cfg);
            solve_one(&cfg, index, output.as_deref(), out)?;
        }
        Command::MeshInfo {
            mesh,
            problem,
            level,
            write,
        } => {
            let m = match (mesh, problem) {
                (Some(path), _) => load_gmsh(&path)?,
                (None, Some(p)) => parse_problem(&p)?.mesh(level)?,
                (None, None) => return Err(Error::InvalidInput("give a mesh file or --problem".into())),
            };
            mesh_info(&m, out)?;
            if let Some(path) = write {
                std::fs::write(&path, write_gmsh(&m))?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
        Command::GeometryCheck { config, output } => {
            let cfg = load_config(&config)?;
            let levels = match &cfg.study.mesh {
                crate::analysis::MeshSource::Builtin(l) => l.clone(),
                crate::analysis::MeshSource::Files(_) => {
                    return Err(Error::ConfigParse {
                        field: "mesh_files".into(),
                        message: "geometry-check runs on built-in levels".into(),
                    })
                }
            };
            let rows = geometry_study(cfg.study.problem, cfg.study.k, &levels)?;
            write!(out, "{}", format_geometry_table(&rows))?;
            if let Some(path) = output {
                std::fs::write(&path, geometry_csv(&rows))?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
    }
    Ok(())
}

fn solve_one(cfg: &FileConfig, index: usize, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let study = &cfg.study;
    let setup = ProblemSetup::new(study.problem, study.solution);
    let mesh = match &study.mesh {
        crate::analysis::MeshSource::Builtin(l) => {
            let level = *l
                .get(index)
                .ok_or_else(|| Error::InvalidInput(format!("level index {index} out of range")))?;
            study.problem.mesh(level)?
        }
        crate::analysis::MeshSource::Files(f) => {
            let path = f
                .get(index)
                .ok_or_else(|| Error::InvalidInput(format!("mesh index {index} out of range")))?;
            load_gmsh(path)?
        }
    };
    let map = match study.geometry {
        crate::analysis::GeometryKind::Curved => build_isoparametric_map(&mesh, study.k, &setup.geometry)?,
        crate::analysis::GeometryKind::Straight => GeometricMap::straight(&mesh, &setup.geometry)?,
    };
    let v = study
        .quadrature
        .volume
        .unwrap_or(crate::fem::default_volume_exactness(study.k));
    let f = study.quadrature.face.unwrap_or(crate::fem::default_face_exactness(study.k));
    let space = DGSpace::with_quadrature(&mesh, &map, study.k, v, f)?.with_parallel(study.parallel);
    let system = assemble(&space, &setup.problem)?;
    let sol = solve(&system, &study.solver)?;
    let stab = stability_check(&space, &setup.problem, &sol.solution)?;
    writeln!(out, "problem      {}", study.problem.name())?;
    writeln!(out, "nelem        {}", mesh.num_elements())?;
    writeln!(out, "ndof         {}", space.ndof())?;
    writeln!(out, "nnz          {}", system.matrix.nnz())?;
    writeln!(out, "residual     {:.3e}", sol.residual)?;
    writeln!(out, "iterations   {}", sol.iterations)?;
    writeln!(out, "l2 error     {:.6e}", l2_error(&space, &sol.solution, &setup.problem)?)?;
    writeln!(out, "dg error     {:.6e}", dg_error(&space, &setup.problem, &sol.solution)?)?;
    if let Some(r) = stab.ratio {
        writeln!(out, "stability    {r:.6}")?;
    }
    if let Some(path) = output {
        let text: String = sol.solution.coeffs.iter().map(|c| format!("{c:e}\n")).collect();
        std::fs::write(path, text)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn mesh_info(m: &Mesh, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "dimension        {}", m.dim())?;
    writeln!(out, "vertices         {}", m.num_vertices())?;
    writeln!(out, "elements         {}", m.num_elements())?;
    writeln!(out, "faces            {}", m.faces().len())?;
    writeln!(out, "boundary faces   {}", m.boundary_faces().len())?;
    writeln!(out, "mesh size h      {:.6e}", m.mesh_size())?;
    writeln!(out, "diameter ratio   {:.4}", m.diameter_ratio())?;
    writeln!(out, "measure          {:.12}", m.straight_measure())?;
    writeln!(out, "connected        {}", m.is_connected())?;
    match m.validate(None) {
        Ok(()) => writeln!(out, "validation       ok")?,
        Err(msg) => writeln!(out, "validation       {msg}")?,
    }
    Ok(())
}

/// Binary entry point; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
