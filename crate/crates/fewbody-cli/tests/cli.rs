use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fewbody(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fewbody"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn jacobi_check_equal_masses_has_tiny_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fewbody(&["jacobi-check", "--out", "j"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&tmp.path().join("j"));
    let r = m["summary"]["max_residual"].as_f64().unwrap();
    assert!(r < 1e-12, "{r}");
    let csv = fs::read_to_string(tmp.path().join("j/jacobi_coefficients.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("alpha,beta,d,e,quad_a,quad_b,quad_c\n"));
}

#[test]
fn empty_config_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.toml"), "").unwrap();
    let out = fewbody(&["gap", "--config", "empty.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiment"));
}

#[test]
fn unknown_keys_and_bad_flags_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "experiment = \"x\"\nfoo = 1\n").unwrap();
    let out = fewbody(&["critical-coupling", "--config", "c.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));
    let out = fewbody(&["critical-coupling", "--d", "7"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = fewbody(&["tau", "--d", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn energy_inside_the_continuum_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "experiment = \"deep\"\ncoupling_factor = 1.5\n[schedule]\nvalues = [-0.1]\n",
    )
    .unwrap();
    let out = fewbody(&["faddeev-count", "--config", "c.toml", "--d", "4"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn efimov_scan_plateau_in_four_and_growth_in_three_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["3", "4"] {
        let dir = format!("e{d}");
        let out = fewbody(&["efimov-scan", "--d", d, "--out", &dir, "--workers", "4"], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(tmp.path().join(&dir).join("counting_curve.csv")).unwrap();
        assert!(csv.starts_with("z,count,top_eigenvalue,gap_to_one\n"));
        assert_eq!(csv.lines().count(), 8);
        let fit = &manifest(&tmp.path().join(&dir))["summary"]["fit"];
        let expect = if d == "3" { "log-slope" } else { "plateau" };
        assert_eq!(fit["mode"], expect);
        assert!(fit["non_decreasing_towards_zero"].as_bool().unwrap());
    }
}

#[test]
fn reruns_produce_identical_csv_bodies() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = fewbody(&["bs-scan", "--d", "4", "--out", dir], tmp.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(tmp.path().join("a/bs_scan.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/bs_scan.csv")).unwrap();
    assert_eq!(a, b);
    assert!(manifest(&tmp.path().join("a"))["timestamp_unix"].as_u64().is_some());
}

#[test]
fn oracle_count_matches_on_a_small_basis() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "experiment = \"oracle\"\ncoupling_factor = 0.5\n[basis]\nsize = 60\n",
    )
    .unwrap();
    let out = fewbody(&["oracle-count", "--config", "c.toml", "--d", "4", "--seed", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&tmp.path().join("out/oracle"));
    assert_eq!(m["summary"]["basis"]["seed"], 3);
    assert!(m["summary"]["all_match"].as_bool().unwrap());
}
