use std::process::Command;

fn regbisect(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_regbisect")).args(args).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

#[test]
fn tree_writes_schedule_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let (code, text) = regbisect(&["tree", "--eps", "0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    for f in ["schedule.json", "tree_summary.csv", "tree_report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("tree_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["d"], 5);
    assert_eq!(report["schedule_sha256"].as_str().unwrap().len(), 64);

    // replay the written schedule on graphs
    let g_out = dir.path().join("g");
    let (code, text) = regbisect(&[
        "graph",
        "--n",
        "2000",
        "--reps",
        "2",
        "--schedule",
        out.join("schedule.json").to_str().unwrap(),
        "--out",
        g_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(g_out.join("graph_runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn precondition_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(regbisect(&["tree", "--eps", "2", "--out", out]).0, 2);
    assert_eq!(regbisect(&["graph", "--n", "7", "--d", "5", "--out", out]).0, 2);
    assert_eq!(regbisect(&["graph", "--schedule", "/nonexistent/schedule.json", "--out", out]).0, 2);
    // no reference values for this row
    assert_eq!(regbisect(&["tree", "--eps", "0.05", "--check", "--out", out]).0, 2);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "config_version = 99\n[common]\n").unwrap();
    assert_eq!(regbisect(&["cycles", "--config", bad.to_str().unwrap(), "--out", out]).0, 2);
}

#[test]
fn failed_checks_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // tiny graphs are far from the tree values
    let (code, text) = regbisect(&[
        "graph", "--eps", "0.05", "--n", "200", "--reps", "2", "--check", "--out", out,
    ]);
    assert_eq!(code, 3, "{text}");
    assert!(text.contains("FAIL"));
}

#[test]
fn passing_checks_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, text) = regbisect(&["cycles", "--n", "2000", "--reps", "30", "--kmax", "5", "--check", "--out", out]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("cycles_stats.csv").exists());
}
