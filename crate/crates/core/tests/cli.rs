use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn isodg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isodg"))
        .args(args)
        .current_dir(dir)
        .env_remove("ISODG_THREADS")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

const SMALL: &str = "problem = \"disc2d\"\nk = 2\nlevels = [0, 1, 2]\n";

#[test]
fn study_writes_csv_with_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = isodg(&["study", "small.toml", "-o", "out.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,nelem,ndof,l2_error,l2_rate,dg_error,dg_rate");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(','), "first level has no rates: {}", lines[1]);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 7);
    }
    // the human-readable table goes to stdout
    assert!(String::from_utf8_lossy(&out.stdout).contains("L2 error"));
}

#[test]
fn single_threaded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = isodg(&["--threads", "1", "study", "small.toml", "-o", name], dir.path());
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_degree_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "problem = \"disc2d\"\nlevels = [1, 2]\n").unwrap();
    let out = isodg(&["study", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`k`") || err.contains(" k"), "{err}");
}

#[test]
fn unreadable_mesh_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = isodg(&["mesh-info", "missing.msh"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mesh_info_reads_the_shipped_coarse_ball() {
    let dir = tempfile::tempdir().unwrap();
    let path = data("ball48.msh");
    let out = isodg(&["mesh-info", path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["elements", "48"]), "{text}");
    assert!(text.contains("validation       ok"));
}

#[test]
fn written_mesh_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = isodg(&["mesh-info", "--problem", "ball3d", "--level", "0", "--write", "b.msh"], dir.path());
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("b.msh")).unwrap(), fs::read(data("ball48.msh")).unwrap());
}

#[test]
fn geometry_check_on_the_square_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sq.toml"), "problem = \"square2d\"\nk = 2\nlevels = [0, 1]\n").unwrap();
    let out = isodg(&["geometry-check", "sq.toml", "-o", "g.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (bd, me): (f64, f64) = (cols[3].parse().unwrap(), cols[5].parse().unwrap());
        assert!(bd <= 1e-12 && me <= 1e-12, "{line}");
    }
}
