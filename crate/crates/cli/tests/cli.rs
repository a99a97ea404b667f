use std::process::{Command, Output};

use heis_core::convexity::Witness;
use heis_core::{Point, ScalarField};
use serde_json::Value;

fn heis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heis"))
        .args(args)
        .env_remove("HEIS_THREADS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn convexity_pass_example() {
    let out = heis(&["convexity", "--field", "x^2+y^2", "--box", "-1:1,-1:1,-1:1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["status"], "pass");
}

#[test]
fn rockafellar_example() {
    let out = heis(&[
        "rockafellar",
        "--field",
        "x^2+y^2",
        "--from",
        "0,0,0",
        "--to",
        "1,0,0",
        "--eps",
        "1e-3",
    ]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    let value = r["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() <= 1e-3);
    assert!(r["gap"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn subdiff_example_is_a_segment_csv() {
    let out = heis(&["subdiff", "--field", "abs(x)", "--at", "0,0,0", "--dirs", "360"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,p1,p2"));
    let pts: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect();
    assert_eq!(pts.len(), 2);
    for (a, b) in pts {
        assert!((a.abs() - 1.0).abs() < 0.05 && b.abs() < 0.05);
    }
}

#[test]
fn refine_closes_the_wedge_at_an_unsampled_kink() {
    let run = |extra: &[&str]| {
        let mut args = vec![
            "subdiff",
            "--field",
            "abs(x-y)+x^2",
            "--at",
            "0,0,0",
            "--dirs",
            "180",
            "--format",
            "json",
        ];
        args.extend_from_slice(extra);
        let out = heis(&args);
        assert_eq!(code(&out), 0);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["shape"].as_str().unwrap().to_string()
    };
    assert_eq!(run(&[]), "polygon");
    assert_eq!(run(&["--refine", "1e-8"]), "segment");
}

#[test]
fn failing_verdicts_ship_replayable_witnesses() {
    for mode in ["hessian", "segments"] {
        let out = heis(&["convexity", mode, "--field", "-x^2", "--samples", "200", "--seed", "4"]);
        assert_eq!(code(&out), 1, "{mode}");
        let v = json(&out);
        assert_eq!(v["status"], "fail");
        let w = &v["result"]["witness"];
        let pt = |k: &str| serde_json::from_value::<Point>(w[k].clone()).unwrap();
        let u = ScalarField::parse("-x^2").unwrap();
        let replayed = match w["kind"].as_str().unwrap() {
            "hessian" => Witness::Hessian {
                point: pt("point"),
                min_eigenvalue: w["min_eigenvalue"].as_f64().unwrap(),
            }
            .replay(&u)
            .unwrap(),
            "segment" => -Witness::Segment {
                g: pt("g"),
                gp: pt("gp"),
                lambda: w["lambda"].as_f64().unwrap(),
                violation: w["violation"].as_f64().unwrap(),
            }
            .replay(&u)
            .unwrap(),
            k => panic!("unexpected witness kind {k}"),
        };
        assert!(replayed < 0.0, "{mode}: {replayed}");
    }
}

#[test]
fn subgradient_verify_fails_with_witness() {
    let out = heis(&[
        "subdiff", "verify", "--field", "abs(x)", "--at", "0,0,0", "--p", "0,0.3",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert!(v["result"]["witness"].is_object());
    assert!(v["result"]["worst_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn usage_errors_exit_2() {
    let out = heis(&["convexity", "--field", "x+*y"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 2"));
    assert_eq!(code(&heis(&["frobnicate"])), 2);
    assert_eq!(code(&heis(&["convexity", "--field", "x", "--box", "1:1,0:1,0:1"])), 2);
    assert_eq!(code(&heis(&["subdiff", "--field", "x"])), 2);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = [
        "convexity",
        "segments",
        "--field",
        "((x^2+y^2)^2+t^2)^(1/4)",
        "--samples",
        "500",
        "--seed",
        "9",
    ];
    let a = heis(&args);
    let b = heis(&args);
    let mut one = vec!["--threads", "1"];
    one.extend_from_slice(&args);
    let c = heis(&one);
    let d = Command::new(env!("CARGO_BIN_EXE_heis"))
        .args(args)
        .env("HEIS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(a.stdout, d.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("heis-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# chain run\nfield = x^2+y^2\nto = 1,0,0\neps = 1e-1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_cfg = json(&heis(&["rockafellar", "--config", cfg]));
    assert_eq!(from_cfg["input"]["eps"], 0.1);
    let out_path = dir.join("out.json");
    let out = heis(&[
        "rockafellar",
        "--config",
        cfg,
        "--eps",
        "1e-3",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["input"]["eps"], 0.001);
    assert_eq!(v["result"]["n_used"], 1024);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn chain_csv_columns() {
    let out = heis(&[
        "rockafellar",
        "build",
        "--field",
        "x^2+y^2",
        "--to",
        "0,0,1",
        "--n",
        "4",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("i,x,y,t,p1,p2\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 4 + 1);
}

#[test]
fn verify_suite_report() {
    let out = heis(&["verify"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}
