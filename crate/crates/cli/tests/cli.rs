use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn amdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("sim");
    let o = amdc(&[
        "simulate",
        "--scenario",
        "state-low",
        "--n-sequences",
        "30",
        "--seq-len",
        "80",
        "--seed",
        "5",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("sequences.csv")
}

#[test]
fn missing_input_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = amdc(&[
        "cluster",
        "--input",
        "no/such/file.csv",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/file.csv"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(amdc(&["cluster", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        amdc(&["benchmark", "--scenario", "dur9-low", "--out-dir", "x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_data_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ragged.csv");
    fs::write(&input, "id,group_id,states\na,g,AAB\nb,g,AB\n").unwrap();
    let o = amdc(&[
        "cluster",
        "--input",
        path(&input),
        "--out-dir",
        path(&dir.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cluster_writes_declared_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path());
    let out = dir.path().join("cl");
    let o = amdc(&[
        "cluster",
        "--input",
        path(&input),
        "--p-grid",
        "2:4",
        "--seed",
        "7",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "assignments.csv",
        "model.json",
        "metrics.csv",
        "manifest.json",
        "cluster_0.svg",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let assignments = fs::read_to_string(out.join("assignments.csv")).unwrap();
    assert!(assignments.starts_with("id,cluster\n"));
    assert_eq!(assignments.lines().count(), 31);
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(
        metrics.lines().next().unwrap(),
        "h,p,d,d_w,d_b,wss,bss,d_standard"
    );
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path());
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "[cluster]\ninput = {:?}\np_grid = \"2:3\"\nseed = 1\nrender = false\n",
            path(&input)
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = amdc(&[
        "--config",
        path(&config),
        "cluster",
        "--seed",
        "9",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["config"]["p_grid"], "2:3");
    assert!(!out.join("cluster_0.svg").exists());
}

#[test]
fn manifest_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path());
    let first = dir.path().join("a");
    let o = amdc(&[
        "baseline",
        "--input",
        path(&input),
        "--p-grid",
        "2:4",
        "--out-dir",
        path(&first),
    ]);
    assert!(o.status.success());
    let second = dir.path().join("b");
    let o = amdc(&[
        "--config",
        path(&first.join("manifest.json")),
        "baseline",
        "--out-dir",
        path(&second),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["assignments.csv", "dunn.csv", "model.json", "manifest.json"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
    let wrong = amdc(&[
        "--config",
        path(&first.join("manifest.json")),
        "cluster",
        "--out-dir",
        path(&second),
    ]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn render_needs_every_sequence_assigned() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path());
    let partial = dir.path().join("partial.csv");
    fs::write(&partial, "id,cluster\nseq0000,0\n").unwrap();
    let o = amdc(&[
        "render",
        "--input",
        path(&input),
        "--assignments",
        path(&partial),
        "--out-dir",
        path(&dir.path().join("r")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seq0001"));
}
