use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decomp-forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&o.stdout)
        )
    })
}

#[test]
fn generate_decompose_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let k9 = dir.path().join("k9.json");
    let cert = dir.path().join("k9.cert.json");
    assert!(run(&["generate", "complete", "--n", "9", "--out", p(&k9)])
        .status
        .success());

    let o = run(&[
        "decompose",
        "--method",
        "algebraic",
        "--input",
        p(&k9),
        "--seed",
        "5",
        "--out",
        p(&cert),
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = stdout_json(&o);
    assert_eq!(v["outcome"]["status"], "success");
    assert_eq!(v["seed"], 5);

    let o = run(&[
        "verify",
        "--input",
        p(&k9),
        "--certificate",
        p(&cert),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["accepted"], true);

    // A certificate for a different instance is rejected with exit code 1.
    let k7 = dir.path().join("k7.json");
    assert!(run(&["generate", "complete", "--n", "7", "--out", p(&k7)])
        .status
        .success());
    let o = run(&["verify", "--input", p(&k7), "--certificate", p(&cert)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generation_is_seeded() {
    let a = run(&[
        "generate",
        "dense",
        "--n",
        "15",
        "--fraction",
        "0.8",
        "--seed",
        "3",
    ]);
    let b = run(&[
        "generate",
        "dense",
        "--n",
        "15",
        "--fraction",
        "0.8",
        "--seed",
        "3",
    ]);
    let c = run(&[
        "generate",
        "dense",
        "--n",
        "15",
        "--fraction",
        "0.8",
        "--seed",
        "4",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k5 = dir.path().join("k5.json");
    assert!(run(&["generate", "complete", "--n", "5", "--out", p(&k5)])
        .status
        .success());
    // The exact oracle's NONE is a definite answer.
    let o = run(&[
        "decompose",
        "--method",
        "exact",
        "--input",
        p(&k5),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["outcome"]["status"], "infeasible");
    // K5 is not tridivisible.
    let o = run(&["decompose", "--method", "iterative", "--input", p(&k5)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "decompose",
        "--method",
        "exact",
        "--input",
        p(&dir.path().join("missing.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["decompose", "--method", "magic", "--input", p(&k5)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["lp", "pm", "--input", p(&k5)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_failure_exits_one() {
    // Tridivisible, every edge in a triangle, yet not decomposable (checked
    // by the exact oracle below), so the algebraic pipeline must fail.
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let edges = [
        [0, 1],
        [0, 2],
        [0, 3],
        [0, 4],
        [0, 5],
        [0, 6],
        [1, 2],
        [1, 4],
        [1, 5],
        [2, 3],
        [2, 6],
        [3, 4],
        [3, 5],
        [4, 6],
        [5, 6],
    ];
    std::fs::write(
        &g,
        serde_json::json!({"n": 7, "r": 2, "edges": edges}).to_string(),
    )
    .unwrap();
    let o = run(&[
        "decompose",
        "--method",
        "exact",
        "--input",
        p(&g),
        "--format",
        "json",
    ]);
    assert_eq!(stdout_json(&o)["outcome"]["status"], "infeasible");
    let o = run(&[
        "decompose",
        "--method",
        "algebraic",
        "--input",
        p(&g),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["outcome"]["status"], "failed");
}

#[test]
fn matching_and_lp() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    assert!(run(&[
        "generate",
        "codegree",
        "--n",
        "12",
        "--fraction",
        "0.55",
        "--seed",
        "1",
        "--out",
        p(&h)
    ])
    .status
    .success());
    let o = run(&[
        "match",
        "--method",
        "codegree",
        "--input",
        p(&h),
        "--seed",
        "2",
        "--format",
        "json",
    ]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let o = run(&[
        "match",
        "--method",
        "nibble",
        "--input",
        p(&h),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["certificate_body"]["kind"], "matching");
    let o = run(&["lp", "pm", "--input", p(&h), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["outcome"]["status"], "success");
}

#[test]
fn barriers_build_and_detect() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("parity.json");
    assert!(
        run(&["barriers", "build", "--parity", "9,3", "--out", p(&b)])
            .status
            .success()
    );
    let o = run(&[
        "barriers",
        "detect",
        "--input",
        p(&b),
        "--search",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["barrier"], true);
    assert_eq!(v["verdict"]["index"], 2);
    let o = run(&["barriers", "build", "--parity", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_runs_and_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({
        "method": "algebraic",
        "instance": {"generator": "complete", "n": 7},
        "seeds": [1, 2, 3],
        "output": out,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let o = run(&["experiment", "--config", p(&cfg), "--format", "json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let reports = stdout_json(&o);
    assert_eq!(reports.as_array().unwrap().len(), 3);
    assert!(out.join("reports.json").exists());

    std::fs::write(
        &cfg,
        r#"{"method":"exact","instance":{"generator":"complete","n":7},"seeds":[],"output":"x"}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["experiment", "--config", p(&cfg)]).status.code(),
        Some(2)
    );
    std::fs::write(
        &cfg,
        r#"{"method":"guess","instance":{"generator":"complete","n":7},"seeds":[1],"output":"x"}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["experiment", "--config", p(&cfg)]).status.code(),
        Some(2)
    );
}
