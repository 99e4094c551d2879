use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sizebias-lab"));
    c.args(args).env_remove("SIZEBIAS_LAB_SEED");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn body(out: &Output) -> String {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# generated"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bounds_happy_path() {
    let out = run(
        &[
            "bounds",
            "--process",
            "runs",
            "--n",
            "100",
            "--m",
            "2",
            "--p",
            "0.5",
            "--t",
            "0:5:0.1",
            "--out",
            "csv",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# generated "));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,bound_left,bound_right,family");
    assert_eq!(rows.len(), 52);
    assert!(rows[1].starts_with("0,1.000000000000e0,1.000000000000e0"));
}

#[test]
fn coupling_audit_json() {
    let out = run(
        &[
            "verify-coupling",
            "--process",
            "urn",
            "--n",
            "3",
            "--m",
            "2",
            "--samples",
            "100000",
            "--seed",
            "7",
            "--out",
            "json",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["audit"]["passed"], true);
    assert_eq!(v["audit"]["bound_violations"], 0);
    assert_eq!(v["run"]["seed"], 7);
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        &["oracle", "--process", "graph", "--n", "6", "--p", "2.0"][..],
        &["bounds", "--process", "nope", "--n", "3"],
        &[
            "bounds",
            "--process",
            "runs",
            "--n",
            "10",
            "--m",
            "2",
            "--p",
            "0.5",
            "--t",
            "0:x:0.1",
        ],
        &["simulate", "--process", "poisson", "--lambda", "2", "--samples", "10"],
        &["oracle", "--process", "runs", "--n", "40", "--m", "2", "--p", "0.5"],
        &["frobnicate"],
    ] {
        let out = run(args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn repeated_runs_have_identical_bodies() {
    let args = [
        "simulate",
        "--process",
        "poisson",
        "--lambda",
        "4",
        "--samples",
        "50000",
        "--t",
        "0:3:0.5",
    ];
    let a = run(&args, &[("SIZEBIAS_LAB_SEED", "5")]);
    let b = run(&args, &[("SIZEBIAS_LAB_SEED", "5")]);
    let c = run(&[&args[..], &["--seed", "5"]].concat(), &[]);
    let d = run(&args, &[("SIZEBIAS_LAB_SEED", "6")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(body(&a), body(&b));
    assert_eq!(body(&a), body(&c));
    assert_ne!(body(&a), body(&d));
    let quiet = run(&[&args[..], &["--seed", "5", "--no-timestamp"]].concat(), &[]);
    assert_eq!(String::from_utf8(quiet.stdout).unwrap().trim_end(), body(&a));
}

#[test]
fn config_file_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"process":{"process":"graph","n":5,"p":0.3},"t_grid":"0:3:0.5","format":"json"}"#,
    )
    .unwrap();
    let exact = dir.path().join("exact.json");
    let out = run(
        &[
            "oracle",
            "--config",
            cfg.to_str().unwrap(),
            "--coupling",
            "-o",
            exact.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&exact).unwrap()).unwrap();
    assert!(v["tv_ys"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["verdict"]["passed"], true);

    let report = run(&["report", exact.to_str().unwrap(), "--no-timestamp"], &[]);
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(report.stdout).unwrap().lines().next(),
        Some("process,side,points,checked,failures,max_ratio,verdict")
    );

    // a result file holding a failed point makes the report exit 1
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "process,side,t,N,estimate,ci_low,ci_high,bound,verdict\nruns,right,1,1000,0.5,0.4,0.6,0.3,fail\n",
    )
    .unwrap();
    let report = run(&["report", exact.to_str().unwrap(), bad.to_str().unwrap()], &[]);
    assert_eq!(report.status.code(), Some(1));
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.contains("runs,right,1,1,1,1.333333e0,fail"), "{text}");
}
