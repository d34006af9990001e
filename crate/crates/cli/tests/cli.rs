use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catoptrica::output::diagnostics_path;
use tempfile::TempDir;

const CIRCLE: &str =
    r#"{"profile":{"type":"circle","R":1},"v_range":[-1,1],"u_samples":16,"v_samples":5}"#;

fn catoptrica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catoptrica"))
        .args(args)
        .output()
        .expect("run catoptrica")
}

fn setup(config: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    (dir, cfg)
}

fn run_to(dir: &Path, cfg: &Path, cmd: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(format!("{cmd}.out"));
    let mut args = vec![
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (catoptrica(&args), out)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn focal_circle_points() {
    let (dir, cfg) = setup(CIRCLE);
    let (o, out) = run_to(dir.path(), &cfg, "focal", &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(table[0], ["u", "v", "branch", "virtual", "x1", "x2", "x3"]);
    assert_eq!(table.len(), 1 + 16 * 5 * 2);
    for row in &table[1..] {
        let x: Vec<f64> = row[4..].iter().map(|s| s.parse().unwrap()).collect();
        let r = x[0].hypot(x[1]);
        match row[2].as_str() {
            "curve" => assert!((r - 2.0).abs() < 1e-12 && x[2] == 0.0, "{row:?}"),
            "surface" => assert!(r < 1e-12, "{row:?}"),
            b => panic!("unexpected branch {b}"),
        }
    }
    // diagnostics are always written, header only when nothing failed
    let diag = std::fs::read_to_string(diagnostics_path(&out)).unwrap();
    assert_eq!(diag, "u,v,code,detail\n");
}

#[test]
fn numeric_and_signs_add_rows() {
    let (dir, cfg) = setup(CIRCLE);
    let (o, out) = run_to(dir.path(), &cfg, "focal", &["--numeric", "--signs", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(table[0][3], "signs");
    let numeric = table.iter().filter(|r| r[2].starts_with("numeric")).count();
    assert_eq!(numeric, 16 * 5 * 4 * 2);
}

#[test]
fn json_output() {
    let (dir, cfg) = setup(CIRCLE);
    let (o, out) = run_to(dir.path(), &cfg, "reflect", &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["columns"][0], "u");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 16 * 5);
}

#[test]
fn wavefront_of_circle_normals_is_constant() {
    let (dir, cfg) = setup(CIRCLE);
    let (o, out) = run_to(dir.path(), &cfg, "wavefront", &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let table = rows(&std::fs::read_to_string(&out).unwrap());
    let col = table[0].iter().position(|c| c == "r").unwrap();
    for row in &table[1..] {
        let r: f64 = row[col].parse().unwrap();
        assert!((r.abs() - 1.0).abs() < 1e-8, "{row:?}");
    }
}

#[test]
fn verify_passes_and_fault_is_caught() {
    let (dir, cfg) = setup(CIRCLE);
    let (o, out) = run_to(dir.path(), &cfg, "verify", &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("check,max_residual,tolerance,samples,status\n"));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        stdout
            .lines()
            .take_while(|l| l.contains(','))
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );

    let (o, _) = run_to(
        dir.path(),
        &cfg,
        "verify",
        &["--inject-fault", "reflection-sign"],
    );
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("reflection_law_vs_oracle") && l.ends_with(",fail")));
}

#[test]
fn config_errors_exit_one() {
    let (dir, cfg) = setup(r#"{"profile":{"type":"circle","R":-1}}"#);
    let (o, _) = run_to(dir.path(), &cfg, "focal", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("R"));

    let missing = dir.path().join("nope.json");
    let (o, _) = run_to(dir.path(), &missing, "focal", &[]);
    assert_eq!(o.status.code(), Some(1));

    let (o, _) = run_to(dir.path(), &cfg, "refract", &[]);
    assert_eq!(o.status.code(), Some(1));

    let (dir, cfg) = setup(CIRCLE);
    let o = catoptrica(&["focal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "no output path");
    let (o, _) = run_to(dir.path(), &cfg, "focal", &["--threads", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
