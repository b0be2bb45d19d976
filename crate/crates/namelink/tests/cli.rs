use std::path::Path;
use std::process::{Command, Output};

fn namelink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_namelink")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> serde_json::Value {
    let out = namelink(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn metrics_of_identical_names() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(dir.path(), &["metrics", "--a", "ACME SPA", "--b", "ACME SPA"]);
    assert_eq!(v["levenshtein"], 0.0);
    for k in ["indel_ratio", "jaro_winkler", "token_set_ratio", "jaccard"] {
        assert_eq!(v[k], 1.0, "{k}");
    }
}

#[test]
fn unknown_flags_exit_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = namelink(dir.path(), &["metrics", "--a", "X", "--b", "Y", "--nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(namelink(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failures_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = namelink(dir.path(), &["eval", "--model", "missing.json", "--test", "missing.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
}

#[test]
fn synth_train_predict_eval_split() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "600", "--seed", "1", "--out", "train.csv"]);
    ok(d, &["synth", "--n", "300", "--seed", "2", "--out", "test.csv"]);
    ok(d, &["train", "--train", "train.csv", "--learner", "forest", "--seed", "3", "--out", "forest.json"]);
    let report = ok(d, &["eval", "--model", "forest.json", "--test", "test.csv"]);
    let total = ["tp", "tn", "fp", "fn_"].iter().map(|k| report[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(total, 300);
    assert!(report["ba"].as_f64().unwrap() > 0.8);
    let jo = ok(d, &["eval", "--model", "forest.json", "--test", "test.csv", "--jo"]);
    // 60 positives exist, so all of them plus 100 negatives
    assert_eq!(["tp", "tn", "fp", "fn_"].iter().map(|k| jo[k].as_u64().unwrap()).sum::<u64>(), 160);

    let p = ok(d, &["predict", "--model", "forest.json", "--a", "ACME SPA", "--b", "ACME S.P.A."]);
    assert!((0.0..=1.0).contains(&p["probability"].as_f64().unwrap()));
    ok(d, &["predict", "--model", "forest.json", "--pairs", "test.csv", "--out", "pred.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("pred.csv")).unwrap().lines().count(), 301);

    ok(d, &["train", "--train", "train.csv", "--learner", "siamese", "--epochs", "1", "--out", "s.json", "--loss-history", "loss.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("loss.csv")).unwrap().lines().count(), 3);

    ok(d, &["split", "--data", "train.csv", "--k", "3", "--seed", "4", "--out-dir", "folds"]);
    for f in 0..3 {
        for part in ["test_ro", "test_jo", "train_large", "train_medium", "train_small"] {
            assert!(d.join(format!("folds/fold{f}_{part}.csv")).exists());
        }
    }
}

#[test]
fn al_run_histories_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "6000", "--seed", "9", "--out", "pool.csv"]);
    ok(d, &["synth", "--n", "500", "--seed", "10", "--out", "test.csv"]);
    std::fs::write(
        d.join("run.json"),
        r#"{"pairs": "pool.csv", "tests": [{"name": "ro", "path": "test.csv"}], "seed": 3}"#,
    )
    .unwrap();
    ok(d, &["al-run", "--config", "run.json", "--out", "h1.csv"]);
    ok(d, &["al-run", "--config", "run.json", "--out", "h2.csv"]);
    let h1 = std::fs::read(d.join("h1.csv")).unwrap();
    assert_eq!(h1, std::fs::read(d.join("h2.csv")).unwrap());
    let text = String::from_utf8(h1).unwrap();
    let n: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(n, ["100", "200", "400", "800", "1600", "2400", "3200", "4600", "6000"]);
    assert!(text.starts_with("step,n_labelled,ba_pre,ba_post,ba_pool,ba_test_ro\n"));

    ok(d, &["al-run", "--config", "run.json", "--seed", "4", "--out", "h3.csv"]);
    assert_ne!(std::fs::read(d.join("h3.csv")).unwrap(), text.as_bytes());
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"pairs": "p.csv", "sead": 3}"#).unwrap();
    let out = namelink(dir.path(), &["al-run", "--config", "run.json", "--out", "h.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
