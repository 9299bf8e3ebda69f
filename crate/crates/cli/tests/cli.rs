use std::path::Path;
use std::process::{Command, Output};

const COARSE: &str = "\
# small meshes so each run takes seconds
mesh.h = 0.08
mesh.origin_factor = 0.1
mesh.pole_factor = 0.01
mesh.reference_origin_h = 0.01
crack.ladder = 8, 16
crack.h_near = 0.1
crack.tip_h = 0.005
ray.directions_deg = 0
ray.t0 = 0.1
ray.samples = 5
";

fn abpole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abpole")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn continuous_spectrum_starts_at_the_first_bessel_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig");
    let o = abpole(&["eig", "--mode", "continuous", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lambda = column(&std::fs::read_to_string(out.join("eig.csv")).unwrap(), "lambda");
    assert!((lambda[0] - 14.681970642123893).abs() < 1.5e-2, "{}", lambda[0]);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("file = eig.csv sha256:"));
}

#[test]
fn nodal_tangent_profile_has_negative_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lp");
    let o = abpole(&["limit-profile", "--alpha", "0", "--j", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(out.join("crack.csv")).unwrap();
    assert!(csv.lines().last().unwrap().contains(",inf,"));
    assert!(column(&csv, "m_energy").iter().all(|&m| m < 0.0));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COARSE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let oa = abpole(&["verify", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stdout));
    let ob = abpole(&["verify", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(ob.status.code(), Some(0));
    for f in ["ray.csv", "summary.csv", "crack.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("alpha,j,fitted_exponent,g_star,minus2beta2mp,rel_err,sign_ok\n"));
    assert!(summary.lines().nth(1).unwrap().ends_with(",true"));
}

#[test]
fn failed_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{COARSE}verify.coefficient_tol = 1e-9\n"));
    let out = dir.path().join("v");
    let o = abpole(&["ray-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(out.join("summary.csv").exists());
}

#[test]
fn bad_config_lists_every_problem_and_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mesh.h = -1\nmesh.colour = red\nray.t0 = 0.2\nray.t0 = 0.1\nnonsense\n");
    let o = abpole(&["mesh", "--config", &cfg, "--out", dir.path().join("m").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for needle in ["mesh.h", "mesh.colour", "duplicate key `ray.t0`", "line 5"] {
        assert!(err.contains(needle), "missing `{needle}` in {err}");
    }
    assert!(!dir.path().join("m").exists());
}

#[test]
fn mesh_file_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COARSE);
    let out = dir.path().join("m");
    let o = abpole(&["mesh", "--config", &cfg, "--alpha", "0.3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("mesh.txt")).unwrap();
    let mesh = abpole::io::read_mesh(&text).unwrap();
    assert!(!mesh.slit_pairs().is_empty());
    assert_eq!(abpole::io::write_mesh(&mesh), text);
}
