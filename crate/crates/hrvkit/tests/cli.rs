mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{hrvkit_bin, small_layout, write_dataset};
use hrvkit::tables::{read_csv, FeatureTable};
use hrvkit_core::classify::{confusion_metrics, ConfusionMatrix};
use hrvkit_core::dataset::Label;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(hrvkit_bin()).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// The JSON error report is the last line on stderr, after any log output.
fn error_report(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn vtvf_extract_has_fifty_columns_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(
        dir.path(),
        &small_layout(1, &[Label::Vt, Label::Con]),
        330.0,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "extract",
            "--manifest",
            s(&manifest),
            "--preset",
            "ch5",
            "--out",
            s(out),
            "--jobs",
            "2",
        ]);
    }
    let table = FeatureTable::read(&a.join("features.csv")).unwrap();
    assert_eq!(table.names.len(), 50);
    assert_eq!(table.rows.len(), 2);
    assert_eq!(
        fs::read(a.join("features.csv")).unwrap(),
        fs::read(b.join("features.csv")).unwrap()
    );
}

#[test]
fn paf_extract_has_thirty_six_columns() {
    let dir = tempfile::tempdir().unwrap();
    let layout = small_layout(1, &[Label::PafPre, Label::Normal, Label::Vt]);
    let manifest = write_dataset(dir.path(), &layout, 330.0);
    let out = dir.path().join("out");
    ok(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--preset",
        "ch6",
        "--out",
        s(&out),
    ]);
    let table = FeatureTable::read(&out.join("features.csv")).unwrap();
    assert_eq!(table.names.len(), 36);
    assert_eq!(table.rows.len(), 2);
    let skipped = read_csv(&out.join("skipped.csv")).unwrap();
    assert_eq!(skipped.rows.len(), 1);
    assert!(skipped.rows[0][1].contains("VT"), "{:?}", skipped.rows);
}

#[test]
fn short_records_are_listed_in_skipped_csv() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), &small_layout(2, &[Label::Vt]), 100.0);
    let out = dir.path().join("out");
    let res = run(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--preset",
        "ch5",
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(error_report(&res)["error"], "data");
    let skipped = read_csv(&out.join("skipped.csv")).unwrap();
    assert_eq!(skipped.rows.len(), 2);
    assert!(
        skipped.rows.iter().all(|r| r[1].contains("duration")),
        "{:?}",
        skipped.rows
    );
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let res = run(&[
        "extract",
        "--manifest",
        s(&missing),
        "--preset",
        "ch5",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(error_report(&res)["exit_code"], 3);

    let manifest = write_dataset(dir.path(), &small_layout(1, &[Label::Vt]), 330.0);
    let res = run(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--preset",
        "ch5",
        "--window",
        "-5",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(2));

    let res = run(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--preset",
        "ch9",
        "--out",
        "x",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

fn extracted(dir: &Path, patients: usize) -> std::path::PathBuf {
    let layout = small_layout(patients, &[Label::Vt, Label::Con]);
    let manifest = write_dataset(dir, &layout, 330.0);
    let out = dir.join("x");
    ok(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--preset",
        "ch4",
        "--out",
        s(&out),
        "--jobs",
        "4",
    ]);
    out.join("features.csv")
}

#[test]
fn rank_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let features = extracted(dir.path(), 8);
    let rank_dir = dir.path().join("rank");
    ok(&[
        "rank",
        "--features",
        s(&features),
        "--alpha",
        "1",
        "--max-k",
        "5",
        "--out",
        s(&rank_dir),
        "--seed",
        "1",
    ]);
    let ranking = read_csv(&rank_dir.join("ranking.csv")).unwrap();
    assert_eq!(ranking.rows.len(), 50, "alpha = 1 keeps every feature");
    let curve = read_csv(&rank_dir.join("curve.csv")).unwrap();
    assert_eq!(curve.header, ["k", "accuracy"]);
    assert_eq!(curve.rows.len(), 5);
    let threshold: Value =
        serde_json::from_str(&fs::read_to_string(rank_dir.join("threshold.json")).unwrap())
            .unwrap();
    let k = threshold["k"].as_u64().unwrap() as usize;
    assert!((1..=5).contains(&k));

    let eval_dir = dir.path().join("eval");
    let out = ok(&[
        "evaluate",
        "--features",
        s(&features),
        "--ranking",
        s(&rank_dir.join("ranking.csv")),
        "--top-k",
        "3",
        "--classifier",
        "svm-linear",
        "--cv",
        "kfold:4",
        "--seed",
        "2",
        "--out",
        s(&eval_dir),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("SN") && stdout.contains("AUC"), "{stdout}");

    let report: Value =
        serde_json::from_str(&fs::read_to_string(eval_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["command"], "evaluate");
    let r = &report["report"];
    assert_eq!(r["features"].as_array().unwrap().len(), 3);
    let c = &r["pooled"];
    let pooled = ConfusionMatrix {
        tp: c["tp"].as_u64().unwrap() as usize,
        tn: c["tn"].as_u64().unwrap() as usize,
        fp: c["fp"].as_u64().unwrap() as usize,
        fn_: c["fn"].as_u64().unwrap() as usize,
    };
    let m = confusion_metrics(&pooled).unwrap();
    assert_eq!(m.sn, r["sn"].as_f64().unwrap());
    assert_eq!(m.sp, r["sp"].as_f64().unwrap());
    assert_eq!(m.acc, r["acc"].as_f64().unwrap());
    assert_eq!(pooled.total(), 16);

    let roc = read_csv(&eval_dir.join("roc.csv")).unwrap();
    assert_eq!(roc.header, ["fpr", "tpr", "threshold"]);
    assert_eq!(roc.config.unwrap()["command"], "evaluate");
}

#[test]
fn every_classifier_runs_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let features = extracted(dir.path(), 6);
    for classifier in ["knn", "svm-linear", "svm-rbf", "rf"] {
        let out = dir.path().join(classifier);
        ok(&[
            "evaluate",
            "--features",
            s(&features),
            "--classifier",
            classifier,
            "--seed",
            "3",
            "--out",
            s(&out),
        ]);
        let report: Value =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        let acc = report["report"]["acc"].as_f64().unwrap();
        assert!(acc >= 0.75, "{classifier}: acc {acc}");
    }
}
