use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn symtile(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symtile"))
        .arg("run")
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{name}.report.json"))).unwrap()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let s: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = schema().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn single_triangle_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let tri = fixture("tri.obj");
    let o = symtile(
        &["--mode", "disk-isosceles", "--input", &tri, "--marks", "0,1,2", "--weights", "uniform", "--method", "both"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("crosscheck relative RMS"));
    let r = report(dir.path(), "tri");
    assert!(r["crosscheck"]["relative_rms"].as_f64().unwrap() <= 1e-7);
    assert_eq!(r["passed"], true);
    assert_valid(&r);
    for ext in ["uv.obj", "svg"] {
        assert!(dir.path().join(format!("tri.{ext}")).exists());
    }
}

#[test]
fn tetrahedron_sixty_three_copies() {
    let dir = tempfile::tempdir().unwrap();
    let tet = fixture("tet.obj");
    let o = symtile(
        &["--mode", "sphere-3fold", "--input", &tet, "--pO", "0", "--sigma", "0,2,3,1", "--seed-target", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "tet");
    assert_valid(&r);
    let table: Vec<(u64, u64)> = r["branch_table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["local_degree"].as_u64().unwrap(), e["preimages"].as_u64().unwrap()))
        .collect();
    assert_eq!(table, vec![(1, 63), (3, 21), (3, 21), (3, 21)]);
    let svg = fs::read_to_string(dir.path().join("tet.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="tile""#).count(), 63);
}

#[test]
fn detected_symmetry_on_the_sphere_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let s = fixture("sphere.obj");
    let o = symtile(
        &["--mode", "sphere-3fold", "--input", &s, "--pO", "0", "--sigma", "detect", "--seed-target", "2", "--weights", "uniform"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid(&report(dir.path(), "sphere"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let tri = fixture("tri.obj");
    let tet = fixture("tet.obj");
    for args in [
        vec!["--mode", "disk-rectangle", "--input", &tri, "--marks", "0,1,2"],
        vec!["--mode", "disk-isosceles", "--input", &tri],
        vec!["--mode", "sphere-3fold", "--input", &tet, "--pO", "0", "--sigma", "0,2,3,1", "--seed-target", "1", "--method", "direct"],
        vec!["--mode", "disk-isosceles", "--input", "/nonexistent.obj", "--marks", "0,1,2"],
        vec!["--mode", "disk-isosceles", "--input", &tri, "--marks", "0,1,7"],
        vec!["--mode", "sphere-3fold", "--input", &tet, "--pO", "0", "--sigma", "0,1,2,3", "--seed-target", "1"],
        vec!["--mode", "triangle", "--input", &tri, "--marks", "0,1,2"],
    ] {
        let o = symtile(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    fs::write(&cfg, r#"{"tolerances": {"residual": 0.0, "symmetry": -1.0}}"#).unwrap();
    let o = symtile(
        &["--mode", "disk-isosceles", "--input", &fixture("disk50.obj"), "--marks", "0,8,17", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path(), "disk50");
    assert_eq!(r["passed"], false);
    assert_eq!(r["checks"]["reflection_H"], false);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let cfg_text = serde_json::json!({
        "mode": "disk-rectangle",
        "input": fixture("quad.obj"),
        "marks": [0, 1, 2, 3],
        "weights": "uniform",
        "aspect": 2.0,
        "name": "from-config"
    });
    fs::write(&cfg, cfg_text.to_string()).unwrap();
    let o = symtile(&["--config", cfg.to_str().unwrap(), "--weights", "cotan", "--method", "both"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "from-config");
    assert_eq!(r["weights"], "cotan");
    assert_eq!(r["method"], "both");
    assert_eq!(r["construction"], "disk-rectangle");
    assert_valid(&r);
}

#[test]
fn runs_are_byte_identical() {
    let disk = fixture("disk50.obj");
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = symtile(
                &["--mode", "disk-equilateral", "--input", &disk, "--marks", "0,8,17", "--method", "both"],
                dir.path(),
            );
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            (
                fs::read(dir.path().join("disk50.report.json")).unwrap(),
                fs::read(dir.path().join("disk50.svg")).unwrap(),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn direct_only_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = symtile(
        &["--mode", "disk-equilateral", "--input", &fixture("disk50.obj"), "--marks", "0,8,17", "--method", "direct"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "disk50");
    assert_valid(&r);
    assert_eq!(r["energies"].as_array().unwrap().len(), 0);
    assert_eq!(r["flips"], 0);
}
