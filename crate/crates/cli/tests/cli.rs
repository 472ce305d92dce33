use std::path::Path;
use std::process::{Command, Output};

fn wiem(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiem"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_urp_lists_fourteen_exact_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let o = wiem(&["verify-urp"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.trim_end().ends_with("ok")).count(), 14);
    assert_eq!(json(&dir.path().join("verify_urp.json"))["passed"], true);
}

#[test]
fn render_fractal_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = wiem(&["render-fractal", "--letter", "3", "--depth", "8"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fractal_3.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let (nums, path) = line.split_once(",\"").unwrap();
        let cols: Vec<f64> = nums.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols.len() == 2 && cols.iter().all(|c| c.is_finite()));
        assert!(path.ends_with('"') && !path[..path.len() - 1].contains('"'));
        rows += 1;
    }
    assert!(rows > 0);
    let svg = std::fs::read_to_string(dir.path().join("fractal_3.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn build_affine_passes_off_the_symmetric_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let o = wiem(&["build-affine", "--theta", "0.3", "--N", "5000"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("build_affine.json"))["passed"], true);
    assert!(dir.path().join("affine.json").exists());
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"tol": -1}"#).unwrap();
    let o = wiem(&["verify-ifs", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = wiem(&["render-fractal", "--letter", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = wiem(&["build-affine", "--N", "2000"], dir.path());
    let first = std::fs::read(dir.path().join("build_affine.json")).unwrap();
    let b = wiem(&["build-affine", "--N", "2000"], dir.path());
    let second = std::fs::read(dir.path().join("build_affine.json")).unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, second);
}
