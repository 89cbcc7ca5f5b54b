use std::path::Path;
use std::process::{Command, Output};

fn lmsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmsd")).args(args).output().expect("binary runs")
}

fn without_wall_time(csv: &str) -> Vec<String> {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quad_run_succeeds() {
    let out = lmsd(&["quad", "--omega", "1.1", "--n", "50", "--engine", "lmsd-g-qr", "--memory", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converged"));
}

#[test]
fn nonlinear_run_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    let out = lmsd(&["nonlinear", "--problem", "trigonometric", "--n", "20", "--engine", "lmsd-pert", "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("lmsd-pert,5,trigonometric"));
}

#[test]
fn bench_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &Path| {
        vec!["bench", "--engine", "lmsd-g,lmsd-hy-svd,abb-bon", "--memory", "3,5", "--problem", "fig3,random", "--n", "60", "--seed", "9", "--out"]
            .into_iter()
            .map(String::from)
            .chain([path(p).to_string()])
            .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_lmsd")).args(args(p)).output().unwrap();
        assert!(matches!(out.status.code(), Some(0) | Some(2)));
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 1 + 3 * 2 * 16);
    assert_eq!(without_wall_time(&ta), without_wall_time(&tb));
}

#[test]
fn profile_reads_bench_output() {
    let dir = tempfile::tempdir().unwrap();
    let (runs, curves, sweeps) = (dir.path().join("runs.csv"), dir.path().join("curves.csv"), dir.path().join("sweeps.csv"));
    let out = lmsd(&["bench", "--engine", "lmsd-g,lmsd-g-qr", "--memory", "5", "--out", path(&runs)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lmsd(&["profile", "--input", path(&runs), "--metric", "nge", "--out", path(&curves), "--sweeps", path(&sweeps)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("method,tau,fraction\n"));
    assert!(text.contains("lmsd-g/m5,") && text.contains("lmsd-g-qr/m5,"));
    assert!(std::fs::read_to_string(&sweeps).unwrap().starts_with("method,sweep_length,fraction\n"));
}

#[test]
fn exit_codes() {
    // configuration errors
    assert_eq!(lmsd(&["quad", "--engine", "lmsd-nope"]).status.code(), Some(1));
    assert_eq!(lmsd(&["quad", "--memory", "0"]).status.code(), Some(1));
    assert_eq!(lmsd(&["profile", "--input", "/nonexistent/runs.csv"]).status.code(), Some(1));
    assert_eq!(lmsd(&["profile", "--input", "x.csv", "--metric", "flops"]).status.code(), Some(1));
    // the matrix completes but a run hits the iteration limit
    let out = lmsd(&["bench", "--engine", "lmsd-g", "--problem", "geometric", "--omega", "1.3", "--max-iter", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);
}
