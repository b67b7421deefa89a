use std::process::{Command, Output};

use serde_json::Value;

fn bertini(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bertini")).args(args).env_remove("BERTINI_BUDGET").output().expect("spawn bertini")
}

fn json(args: &[&str]) -> Value {
    let out = bertini(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn predict_plane_density() {
    let v = json(&["predict", "--field", "2^1", "--n", "2", "--k", "1", "--r", "12"]);
    assert_eq!(v["zeta_inverse"]["exact"], "21/64");
    assert_eq!(v["tail_bound"]["exact"], "1/512");
    assert_eq!(v["pi"]["exact"], "3/7");
}

#[test]
fn predict_p3_curves() {
    let v = json(&["predict", "--n", "3", "--k", "2", "--degrees", "3,3"]);
    assert_eq!(v["pi"]["exact"], "7/39");
    assert_eq!(v["curve_average"]["value"]["exact"], "35/13");
    assert_eq!(v["curve_average"]["literature_value"]["exact"], "37/13");
    assert!(v["curve_average"]["note"].as_str().unwrap().contains("37/13"));
}

#[test]
fn predict_top_codimension_matches_k1() {
    let a = json(&["predict", "--n", "2", "--k", "1"]);
    let b = json(&["predict", "--n", "2", "--k", "3"]);
    assert_eq!(a["truncated_density"], b["truncated_density"]);
}

#[test]
fn exhaustive_lines_are_seven_eighths() {
    let v = json(&["run", "--n", "2", "--degrees", "1", "--mode", "exhaustive"]);
    assert_eq!(v["smooth_fraction"], "7/8");
    assert_eq!(v["summary"]["attempted"], 8);
}

#[test]
fn runs_are_deterministic_and_stats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let records = path(&format!("r{i}.jsonl"));
        let summary = path(&format!("s{i}.csv"));
        let out = path(&format!("o{i}.json"));
        let status = bertini(&[
            "run", "--n", "2", "--degrees", "4", "--trials", "300", "--seed", "11", "--threads", threads,
            "--contain", "0,0,1", "--count-ext", "2", "--records", &records, "--summary", &summary, "--out", &out,
        ])
        .status;
        assert!(status.success());
        outputs.push((std::fs::read(&records).unwrap(), std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&summary).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
    assert_eq!(outputs[0].0.iter().filter(|&&b| b == b'\n').count(), 300);
    assert!(outputs[0].2.starts_with("metric,"));

    let run: Value = serde_json::from_str(&outputs[0].1).unwrap();
    let stats = json(&["stats", "--n", "2", "--records", &path("r0.jsonl")]);
    assert_eq!(run["summary"], stats["summary"]);
    assert_eq!(run["comparison"], stats["comparison"]);
}

#[test]
fn bad_flags_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["predict", "--n", "2", "--k", "1", "--field", "6^1"],
        &["predict", "--n", "2", "--k", "4"],
        &["predict", "--n", "2", "--k", "2", "--degrees", "3"],
        &["run", "--n", "2", "--degrees", "2", "--mode", "until-smooth"],
        &["run", "--n", "2", "--degrees", "2", "--smooth-target", "5"],
        &["run", "--n", "2", "--degrees", "2,3", "--k", "3"],
        &["run", "--n", "2", "--degrees", "2", "--contain", "0,0"],
        &["run", "--n", "2", "--degrees", "2", "--hypersurface", "x0*x1"],
        &["run", "--n", "2", "--degrees", "2", "--oracle", "magic"],
    ];
    for args in cases {
        assert_eq!(bertini(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budget_env_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_bertini"))
        .args(["run", "--n", "2", "--degrees", "2", "--trials", "5"])
        .env("BERTINI_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tiny_budget_trips_the_undecided_alarm() {
    let out = Command::new(env!("CARGO_BIN_EXE_bertini"))
        .args(["run", "--n", "2", "--degrees", "4", "--trials", "50"])
        .env("BERTINI_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["undecided_alarm"], true);
}

#[test]
fn verify_passes() {
    let out = bertini(&["verify"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
