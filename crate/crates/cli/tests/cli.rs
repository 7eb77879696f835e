use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collider-audit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synthetic(dir: &Path, n: &str) {
    ok(dir, &["gen", "--n", n, "--seed", "1", "--out", "train.csv"]);
    ok(dir, &["gen", "--n", "2000", "--seed", "2", "--out", "test.csv"]);
}

const SYNTH_INPUTS: [&str; 14] = [
    "--dag", "test.csv.dag", "--data", "test.csv", "--train", "train.csv", "--protected", "A", "--outcome", "Y",
    "--fit-dist-from", "train.csv", "--bins", "10",
];

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--n", "1000", "--seed", "7", "--out", "a.csv"]);
    ok(d, &["gen", "--n", "1000", "--seed", "7", "--out", "b.csv"]);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    let text = fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("A,X1,"));
    assert!(d.join("a.csv.dag").exists());

    let manifest = json(&d.join("a.csv.manifest.json"));
    assert_eq!(manifest["seeds"]["generator"], 7);
    assert_eq!(manifest["command"], "gen");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn bad_arguments_exit_one() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["gen", "--n", "0", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));

    synthetic(d, "500");
    let mut args = vec!["audit"];
    args.extend(SYNTH_INPUTS);
    args.extend(["--model", "lr", "--out", "r"]);
    let out = run(d, &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--alpha"));

    args.extend(["--alpha", "1.5"]);
    assert_eq!(run(d, &args).status.code(), Some(1));
}

#[test]
fn missing_descendant_distribution_is_rejected() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic(d, "500");
    let out = run(
        d,
        &[
            "audit", "--dag", "test.csv.dag", "--data", "test.csv", "--train", "train.csv", "--protected", "A",
            "--outcome", "Y", "--model", "lr", "--alpha", "0.1", "--out", "r",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--fit-dist-from"));
}

#[test]
fn external_model_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic(d, "500");
    let mut args = vec!["audit"];
    args.extend(SYNTH_INPUTS);
    args.extend(["--model", "external:echo broken >&2; exit 3", "--alpha", "0.1", "--out", "r"]);
    let out = run(d, &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken"));
}

#[test]
fn alpha_one_flags_nobody() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic(d, "2000");
    let mut args = vec!["audit"];
    args.extend(SYNTH_INPUTS);
    args.extend(["--model", "knn", "--alpha", "1.0", "--out", "r"]);
    ok(d, &args);
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "id,nds,ds,p0,p1,flagged");
    assert_eq!(csv.lines().count(), 2001);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")));
    let report = json(&d.join("r.json"));
    assert_eq!(report["flagged"], serde_json::json!([]));

    let manifest = json(&d.join("r.manifest.json"));
    assert!(manifest["inputs"].as_array().unwrap().len() >= 3);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn check_dag_reports_the_collider() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("g.dag"), "Race -> Suburb\nSalary -> Suburb\nRace -> Salary\n").unwrap();
    let text = ok(d, &["check-dag", "--dag", "g.dag", "--protected", "Race", "--outcome", "Salary"]);
    assert!(text.contains("colliders: Suburb"), "{text}");

    let js = ok(d, &["check-dag", "--dag", "g.dag", "--protected", "Race", "--outcome", "Salary", "--json", "--out", "c.json"]);
    let v: Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["colliders"], serde_json::json!(["Suburb"]));
    assert_eq!(json(&d.join("c.json")), v);

    fs::write(d.join("cyc.dag"), "Race -> Salary\nSalary -> Race\n").unwrap();
    let out = run(d, &["check-dag", "--dag", "cyc.dag", "--protected", "Race", "--outcome", "Salary"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn demo_outputs_replay_through_audit() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let text = ok(d, &["demo-collider", "--n", "300", "--seed", "4", "--out", "demo"]);
    assert!(text.contains("unbiased test flags 0"), "{text}");

    ok(
        d,
        &[
            "audit", "--dag", "demo.dag", "--data", "demo.data.csv", "--protected", "Race", "--outcome", "Salary",
            "--model", "lookup:demo.lookup.json", "--dist", "demo.dist.json", "--alpha", "0.05", "--out", "replay",
        ],
    );
    let replay = fs::read_to_string(d.join("replay.csv")).unwrap();
    assert_eq!(replay, fs::read_to_string(d.join("demo.report.csv")).unwrap());
    for line in replay.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1].abs() > 0.1, "nds {line}");
        assert!(f[2] < 1e-12, "ds {line}");
    }
}

#[test]
fn eval_ranks_unbiased_ahead_and_matches_without_collider() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic(d, "10000");
    let mut args = vec!["eval"];
    args.extend(SYNTH_INPUTS);
    args.extend(["--model", "lr", "--out", "e"]);
    let table = ok(d, &args);
    assert!(table.contains("lr"));
    let report = json(&d.join("e.json"));
    let lr = &report["models"][0];
    let (nst, ust) = (lr["nst"]["rmse"].as_f64().unwrap(), lr["ust"]["rmse"].as_f64().unwrap());
    assert!(ust < nst, "ust {ust} nst {nst}");
    let records = fs::read_to_string(d.join("e.records.csv")).unwrap();
    assert_eq!(records.lines().count(), 2001);

    let mut args = vec!["eval"];
    args.extend(SYNTH_INPUTS);
    args.extend(["--model", "lr", "--features", "A,X1,X2,X5,X6,X7,X8", "--out", "f"]);
    ok(d, &args);
    let report = json(&d.join("f.json"));
    let lr = &report["models"][0];
    let (nst, ust) = (lr["nst"]["rmse"].as_f64().unwrap(), lr["ust"]["rmse"].as_f64().unwrap());
    assert!((nst - ust).abs() < 1e-12, "ust {ust} nst {nst}");
}

#[test]
fn fit_dist_feeds_audit() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synthetic(d, "3000");
    ok(d, &["fit-dist", "--data", "train.csv", "--dag", "test.csv.dag", "--protected", "A", "--outcome", "Y", "--out", "c.json"]);
    let dist = json(&d.join("c.json"));
    assert_eq!(dist["variables"], serde_json::json!(["C"]));

    let base = [
        "audit", "--dag", "test.csv.dag", "--data", "test.csv", "--train", "train.csv", "--protected", "A",
        "--outcome", "Y", "--model", "nb", "--alpha", "0.1",
    ];
    let mut a = base.to_vec();
    a.extend(["--dist", "c.json", "--out", "a"]);
    ok(d, &a);
    let mut b = base.to_vec();
    b.extend(["--fit-dist-from", "train.csv", "--out", "b"]);
    ok(d, &b);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
}
