use std::path::Path;
use std::process::{Command, Output};

fn plap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap")).args(args).output().unwrap()
}

fn write_k2(dir: &Path) -> String {
    let path = dir.join("k2.txt");
    std::fs::write(&path, "2\n1 2\n").unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(plap(&["spectrum", "--catalog", "nope"]).status.code(), Some(2));
    assert_eq!(plap(&["spectrum", "--edges", "/nonexistent/graph.txt"]).status.code(), Some(2));
    assert_eq!(plap(&["homology", "--catalog", "c8"]).status.code(), Some(3));
    assert_eq!(plap(&["spectrum", "--catalog", "g6"]).status.code(), Some(0));
}

#[test]
fn spectrum_json_is_exact_and_deterministic() {
    let a = plap(&["spectrum", "--catalog", "g6", "--json"]);
    let b = plap(&["spectrum", "--catalog", "g6", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let got: Vec<&str> = v["eigenvalues"].as_array().unwrap().iter().map(|e| e["lambda"].as_str().unwrap()).collect();
    assert_eq!(got, ["0/1", "2/5", "5/9", "3/5", "2/3", "5/7", "3/4", "7/9", "1/1"]);
}

#[test]
fn k2_sweep_follows_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_k2(dir.path());
    let csv = dir.path().join("k2.csv");
    let out = plap(&["sweep", "--edges", &edges, "--pmin", "1.5", "--pmax", "3", "--steps", "6", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("branch_id,p,lambda,residual"));
    let mut seen = 0;
    for line in lines.filter(|l| l.starts_with("k2-")) {
        let f: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!((f[1] - 2f64.powf(f[0] - 1.0)).abs() < 1e-9, "{line}");
        seen += 1;
    }
    assert!(seen >= 12);
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = plap(&["homology", "--catalog", "c8", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn cheeger_reports_diagram() {
    let out = plap(&["cheeger", "--catalog", "p6", "--p", "1", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("1/5"));
}
