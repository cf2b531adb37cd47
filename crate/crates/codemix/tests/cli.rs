mod common;

use std::path::Path;

use codemix::cli::{grid_cells, run};

fn codemix(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("codemix").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_corpus(dir: &Path, name: &str, n: usize, seed: u64) -> String {
    let path = dir.join(name);
    std::fs::write(&path, common::to_tsv(&common::planted_corpus(n, seed))).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_usage_errors() {
    let (code, out, _) = codemix(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("evaluate"));
    let (code, _, err) = codemix(&["evaluate", "--data", "x.tsv", "--frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(codemix(&[]).0, 1);
    assert_eq!(codemix(&["train", "--data", "x", "--model", "svm", "-o", "m"]).0, 1);
}

#[test]
fn exit_codes_for_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_corpus(dir.path(), "d.tsv", 40, 1);
    let (code, _, err) = codemix(&["stats", "--data", "/nonexistent/file.tsv"]);
    assert_eq!(code, 2, "{err}");

    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(codemix(&["stats", "--data", empty.to_str().unwrap()]).0, 2);

    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1\tfine\tNOT\n2\tnot fine\tMEH\n").unwrap();
    let (code, _, err) = codemix(&["stats", "--data", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("row 2"), "{err}");

    let (code, _, _) = codemix(&["evaluate", "--data", &data, "--word-ngrams", "2", "1"]);
    assert_eq!(code, 1);
    let (code, _, _) = codemix(&["evaluate", "--data", &data, "--test-fraction", "1.5"]);
    assert_eq!(code, 1);

    let single = dir.path().join("single.tsv");
    std::fs::write(&single, "1\ta b\tNOT\n2\tc d\tNOT\n3\te f\tNOT\n").unwrap();
    let out = dir.path().join("m.model");
    let (code, _, err) = codemix(&["train", "--data", single.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn stats_reports_counts_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    std::fs::write(&a, "1\tx\tNOT\n2\ty\tOFF\n3\tz\tNOT\n").unwrap();
    let report = dir.path().join("s.json");
    let a = a.to_str().unwrap();
    let (code, out, _) = codemix(&["stats", "--data", a, "--data", a, "--report", report.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("2 (66.67%)"), "{out}");
    assert!(out.lines().last().unwrap().starts_with("total"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["datasets"][2]["total"], 6);
    assert_eq!(v["datasets"][0]["OFF"]["percent"], 33.33);
}

#[test]
fn evaluate_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_corpus(dir.path(), "d.tsv", 120, 4);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        let (code, _, err) = codemix(&[
            "evaluate",
            "--data",
            &data,
            "--model",
            "lr",
            "--report",
            r.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(&r1).unwrap();
    assert_eq!(a, std::fs::read(&r2).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["cv"]["folds"].as_array().unwrap().len(), 5);
    assert_eq!(v["holdout"]["n_test"], 36);
    for key in ["accuracy", "per_class", "macro", "weighted_f1"] {
        assert!(!v["holdout"]["metrics"][key].is_null(), "{key}");
    }
    assert!(v["cv"]["summary"]["mean"]["macro_f1"].is_number());
}

#[test]
fn seed_comes_from_the_environment_when_the_flag_is_absent() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_corpus(dir.path(), "d.tsv", 60, 5);
    let run_with = |env: Option<&str>, flag: Option<&str>, name: &str| {
        let exe = env!("CARGO_BIN_EXE_codemix");
        let report = dir.path().join(name);
        let mut cmd = std::process::Command::new(exe);
        cmd.args([
            "evaluate", "--mode", "holdout", "--model", "mnb", "--data", &data, "--report",
        ])
        .arg(&report)
        .env_remove("CODEMIX_SEED");
        if let Some(s) = env {
            cmd.env("CODEMIX_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
        v["pipeline"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run_with(None, None, "a.json"), 0);
    assert_eq!(run_with(Some("17"), None, "b.json"), 17);
    assert_eq!(run_with(Some("17"), Some("3"), "c.json"), 3);
}

#[test]
fn train_then_predict_one_line_per_record() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_corpus(dir.path(), "d.tsv", 100, 6);
    let model = dir.path().join("m.model");
    let model = model.to_str().unwrap();
    let (code, out, err) = codemix(&["train", "--data", &data, "--model", "svc", "-o", model]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("trained svc"));

    let unlabeled = dir.path().join("u.tsv");
    let mut text = String::new();
    for (i, r) in common::planted_corpus(37, 8).records.iter().enumerate() {
        text.push_str(&format!("q{i}\t{}\n", r.text));
    }
    text.push_str("q37\t@only #noise 123\n");
    std::fs::write(&unlabeled, &text).unwrap();
    let (code, out, err) = codemix(&["predict", "--model-file", model, "--data", unlabeled.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), text.lines().count());
    for (i, l) in lines.iter().enumerate() {
        let (id, label) = l.split_once('\t').unwrap();
        assert_eq!(id, format!("q{i}"));
        assert!(label == "NOT" || label == "OFF");
    }

    // labeled files are accepted too; the label column is ignored
    let (code, out, _) = codemix(&["predict", "--model-file", model, "--data", &data]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 100);
}

#[test]
fn grid_has_one_row_per_cell() {
    assert_eq!(grid_cells().len(), 16);
    let dir = tempfile::tempdir().unwrap();
    let data = write_corpus(dir.path(), "d.tsv", 60, 2);
    let report = dir.path().join("g.json");
    let (code, out, err) = codemix(&[
        "grid",
        "--data",
        &data,
        "--trees",
        "5",
        "--embed-dim",
        "4",
        "--epochs",
        "2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1 + 16);
    assert!(out.lines().last().unwrap().starts_with("nn"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn concatenated_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_corpus(dir.path(), "a.tsv", 40, 1);
    let b = write_corpus(dir.path(), "b.tsv", 30, 2);
    let report = dir.path().join("r.json");
    let (code, _, err) = codemix(&[
        "evaluate",
        "--data",
        &a,
        "--data",
        &b,
        "--mode",
        "cv",
        "--model",
        "mnb",
        "--word-ngrams",
        "1",
        "6",
        "--char-ngrams",
        "1",
        "8",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["records"], 70);
    assert!(v["holdout"].is_null());
    assert_eq!(v["pipeline"]["char_ngrams"], serde_json::json!([1, 8]));
}
