use std::path::Path;
use std::process::Command;

use lowrank_harness::plot::plot_dir;
use lowrank_harness::runner::Manifest;
use lowrank_harness::trace_csv::{parse_trace, HEADER};

const SPEC: &str = r#"
[problem]
n = 6
r = 2
r_star = [2, 1]
kappa = [1, 5]
m_factor = 4

[solver]
algorithms = ["projgd", "fgd", "scaledgd"]
eta = [0.4, 3.0]

[run]
seed_count = 2
master_seed = 7
max_iters = 60

[output]
formats = ["csv", "svg", "json"]
"#;

fn lowrank(args: &[&str], root: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lowrank"))
        .args(args)
        .env("LOWRANK_OUTPUT_DIR", root)
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv") && n != "summary.csv")
        .collect();
    v.sort();
    v
}

#[test]
fn run_writes_a_complete_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("small.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let out = lowrank(&["run", spec.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let dir = tmp.path().join("small");
    let files = csv_files(&dir);
    assert_eq!(files.len(), 3 * 2 * 2 * 2 * 2);
    for name in &files {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        assert!(text.starts_with(HEADER));
        assert!(!parse_trace(&text).unwrap().is_empty());
    }
    let manifest = Manifest::load(&dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.cells.len(), files.len());
    assert!(manifest.cells.iter().any(|c| c.status == "diverged"));
    assert!(dir.join("panel_k1_rs2.svg").exists());
    assert!(dir.join("summary.csv").exists());
    let leftovers = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.starts_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("small.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(lowrank(&["run", spec.to_str().unwrap(), "--out", a.to_str().unwrap()], tmp.path()).status.success());
    let manifest = a.join("manifest.json");
    assert!(lowrank(&["run", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()], tmp.path()).status.success());
    let files = csv_files(&a);
    assert_eq!(files, csv_files(&b));
    for name in files.iter().chain(["manifest.json".to_string(), "panel_k5_rs1.svg".to_string()].iter()) {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_override_changes_runs_and_format_override_limits_output() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("small.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let out = tmp.path().join("csv-only");
    let res = lowrank(
        &["run", spec.to_str().unwrap(), "--seed", "8", "--format", "csv", "--jobs", "2", "--out", out.to_str().unwrap()],
        tmp.path(),
    );
    assert!(res.status.success());
    assert!(!out.join("manifest.json").exists());
    assert!(!out.join("panel_k1_rs2.svg").exists());
    let default = tmp.path().join("default");
    lowrank(&["run", spec.to_str().unwrap(), "--format", "csv", "--out", default.to_str().unwrap()], tmp.path());
    assert_ne!(csv_files(&out), csv_files(&default));
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("typo.toml");
    std::fs::write(&spec, SPEC.replace("max_iters", "max_iter")).unwrap();
    let out = lowrank(&["run", spec.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_iter"));

    std::fs::write(&spec, SPEC.replace("eta = [0.4, 3.0]", "eta = [0.4, 0.0]")).unwrap();
    assert_eq!(lowrank(&["run", spec.to_str().unwrap()], tmp.path()).status.code(), Some(2));
    assert_eq!(lowrank(&["preset", "fig9"], tmp.path()).status.code(), Some(2));
    assert_eq!(lowrank(&["frobnicate"], tmp.path()).status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.toml");
    assert_eq!(lowrank(&["run", missing.to_str().unwrap()], tmp.path()).status.code(), Some(3));
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let spec = tmp.path().join("small.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let out = lowrank(&["run", spec.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn plot_renders_single_series_and_truncates_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("projgd_k1_rs2_eta0.4_s1.csv"),
        format!("{HEADER}\n0,1.0,1.0,1.0,0.0,1.0,init\n1,0.5,0.5,0.1,0.3,1.0,gradient\n2,0.1,0.1,0.01,0.1,1.0,gradient\n"),
    )
    .unwrap();
    std::fs::write(
        dir.join("fgd_k1_rs1_eta2_s1.csv"),
        format!("{HEADER}\n0,1.0,1.0,1.0,0.0,1.0,init\n1,9.0,9.0,30.0,3.0,1.0,gradient\n2,90.0,90.0,300.0,30.0,1.0,gradient\n"),
    )
    .unwrap();
    std::fs::write(dir.join("fgd_k1_rs1_eta1_s1.csv"), format!("{HEADER}\n")).unwrap();
    let written = plot_dir(dir, 1e2).unwrap();
    assert_eq!(written.len(), 2);
    let single = std::fs::read_to_string(dir.join("panel_k1_rs2.svg")).unwrap();
    assert_eq!(single.matches("<polyline").count(), 1);
    let diverged = std::fs::read_to_string(dir.join("panel_k1_rs1.svg")).unwrap();
    let line = diverged.lines().find(|l| l.starts_with("<polyline")).unwrap();
    assert_eq!(line.split_whitespace().filter(|p| p.contains(',')).count(), 3);

    plot_dir(dir, 1e2).unwrap();
    assert_eq!(std::fs::read_to_string(dir.join("panel_k1_rs2.svg")).unwrap(), single);

    let out = lowrank(&["plot", dir.to_str().unwrap()], dir);
    assert!(out.status.success());
}

#[test]
fn probe_reports_stationary_points() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("tiny.toml");
    std::fs::write(
        &spec,
        r#"
[problem]
n = 3
r = 1
r_star = [1]
kappa = [1]
m_factor = 6

[probe]
levels = 3
frames = 4
"#,
    )
    .unwrap();
    let out = lowrank(&["probe", spec.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("tiny").join("probe.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points[0]["classification"], "SecondOrderMinimizer");
    assert!(points[0]["f_value"].as_f64().unwrap() < 1e-12);

    std::fs::write(&spec, std::fs::read_to_string(&spec).unwrap().replace("n = 3", "n = 6")).unwrap();
    assert_eq!(lowrank(&["probe", spec.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}
