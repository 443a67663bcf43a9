use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glycosim_core::dataset::SubjectRecord;
use glycosim_core::estimation::{synthetic_subject, FitConfig};
use glycosim_core::model::{EstimatedParameters, FixedParameters};
use serde_json::Value;

fn glycosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glycosim")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn manifest(path: &Path) -> Value {
    let name = format!("{}.manifest.json", path.file_name().unwrap().to_str().unwrap());
    json(&path.with_file_name(name))
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn theta(k_abs: f64, k_min: f64) -> EstimatedParameters<f64> {
    EstimatedParameters::from_array([k_min, 0.07, k_abs, 0.06, 0.75, 0.004, 2.0, 0.004, 0.009, 0.02, 6e-4])
}

fn subject(id: &str, th: &EstimatedParameters<f64>, gb: f64) -> SubjectRecord {
    let times: Vec<f64> = (0..=8).map(|k| 15.0 * k as f64).collect();
    synthetic_subject(id, &FixedParameters::default(), th, gb, &times, &FitConfig::default()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_defaults_cover_two_hours() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = glycosim(&["simulate", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t_min,G,I,EGP,Ra,S,U,E,Qsto,Qgut,X,Ipo");
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2401);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[2400][0], 120.0);
    assert_eq!(rows[0][1], 90.0);

    let m = manifest(&out);
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["config"]["parameters"]["theta"]["ki"], 0.001);
    assert_eq!(m["outputs"][0], arg(&out));
    assert!(m["duration_s"].as_f64().unwrap() >= 0.0);
    assert!(m["version"].is_string());
}

#[test]
fn simulate_without_meal_stays_basal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat.csv");
    let o = glycosim(&["simulate", "--dose", "0", "--basal-consistency", "--gb", "95", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for row in csv_rows(&out) {
        assert!((row[1] - 95.0).abs() < 1e-9, "G = {}", row[1]);
    }
}

#[test]
fn simulate_step_sets_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fine.csv");
    assert!(glycosim(&["simulate", "--dt", "0.025", "--out", arg(&out)]).status.success());
    assert_eq!(csv_rows(&out).len(), 4801);
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"simulate": {"horizon": 60, "dt": 0.1}, "parameters": {"Gb": 85}}"#);
    let out = dir.path().join("t.csv");
    let o = glycosim(&["--config", arg(&cfg), "simulate", "--dt", "0.5", "--seed", "42", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 121);
    assert_eq!(rows[0][1], 85.0);
    let m = manifest(&out);
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["simulate"]["dt"], 0.5);
    assert_eq!(m["config"]["simulate"]["horizon"], 60.0);

    // replaying the manifest reproduces the output
    let again = dir.path().join("again.csv");
    let mpath = dir.path().join("t.csv.manifest.json");
    assert!(glycosim(&["--config", arg(&mpath), "simulate", "--out", arg(&again)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    std::fs::write(&params, r#"{"fixed": {"VG": -1.0}}"#).unwrap();
    let out = dir.path().join("x.csv");
    let o = glycosim(&["simulate", "--params", arg(&params), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    assert_eq!(glycosim(&["simulate", "--dt", "-1", "--out", arg(&out)]).status.code(), Some(1));
    assert_eq!(glycosim(&["simulate"]).status.code(), Some(1));
    assert_eq!(glycosim(&["bogus"]).status.code(), Some(1));
    let cfg = write_config(dir.path(), r#"{"nope": 1}"#);
    assert_eq!(glycosim(&["--config", arg(&cfg), "simulate", "--out", arg(&out)]).status.code(), Some(1));
}

#[test]
fn numerical_blow_up_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    // transfer rates far beyond the stability limit of the explicit step
    std::fs::write(&params, r#"{"fixed": {"k1": 500.0, "k2": 500.0}}"#).unwrap();
    let out = dir.path().join("x.csv");
    let o = glycosim(&["simulate", "--params", arg(&params), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_corpus(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir).unwrap();
    let mut ids = serde_json::Map::new();
    for k in 0..n {
        let th = theta(0.1 + 0.005 * k as f64, 0.008 + 0.0003 * k as f64);
        let s = subject(&format!("s{k:02}"), &th, 85.0 + k as f64 * 0.3);
        let name = format!("file{k:02}.csv");
        s.save(&dir.join(&name)).unwrap();
        ids.insert(name, Value::String(format!("subject{:02}", k + 1)));
    }
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec(&ids).unwrap()).unwrap();
}

#[test]
fn fit_one_subject_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    subject("one", &theta(0.2, 0.012), 92.0).save(&input).unwrap();
    let out = dir.path().join("results.json");
    let o = glycosim(&["fit", "--subject", arg(&input), "--jobs", "1", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = json(&out);
    let results = results.as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["status"], "ok");
    assert_eq!(results[0]["subject"], "one");
    assert!(results[0]["loss"].as_f64().unwrap() <= 1e-2);
    assert!(results[0]["evals"].as_u64().unwrap() <= 5500);
    let schema = json(&dir.path().join("results.schema.json"));
    assert!(schema["items"].is_object());
    assert_eq!(manifest(&out)["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_directory_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 35);
    let cfg = write_config(dir.path(), r#"{"fit": {"max_evals": 25}}"#);
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("r{jobs}.json"));
        let o = glycosim(&[
            "--config",
            arg(&cfg),
            "fit",
            "--dir",
            arg(&corpus),
            "--max-evals",
            "40",
            "--jobs",
            jobs,
            "--out",
            arg(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&out).unwrap());
        assert_eq!(manifest(&out)["config"]["fit"]["max_evals"], 40);
    }
    assert_eq!(outputs[0], outputs[1]);
    let results: Value = serde_json::from_slice(&outputs[0]).unwrap();
    let results = results.as_array().unwrap();
    assert_eq!(results.len(), 35);
    assert_eq!(results[0]["subject"], "subject01");
    assert!(results.iter().all(|r| r["status"] == "ok" && r["evals"].as_u64().unwrap() <= 40));
}

#[test]
fn malformed_file_becomes_an_error_entry() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 3);
    std::fs::write(corpus.join("zz_bad.csv"), "t_min,glucose_mg_dl\n0,90\n15,-4\n").unwrap();
    let out = dir.path().join("r.json");
    let o = glycosim(&["fit", "--dir", arg(&corpus), "--max-evals", "20", "--jobs", "2", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let results = json(&out);
    let results = results.as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(results.iter().filter(|r| r["status"] == "ok").count(), 3);
    let bad = &results[3];
    assert_eq!(bad["status"], "failed");
    assert_eq!(bad["subject"], "zz_bad");
    assert_eq!(bad["kind"], "validation");
}

fn fitted(id: &str, kabs: f64, kmin: f64, kmax: f64, b: f64) -> Value {
    let th = EstimatedParameters::from_array([kmin, kmax, kabs, 0.06, b, 0.004, 2.0, 0.004, 0.009, 0.02, 6e-4]);
    serde_json::json!({
        "status": "ok", "subject": id, "Gb": 90.0, "theta": th, "loss": 0.0, "mse": 0.0, "evals": 1,
        "converged": true, "stop_reason": "loss_below_tol", "min_egp": 1.0, "peak": null
    })
}

/// Three early peaks, two mid, two late, one plateau-shaped outlier and one
/// sharp late outlier, plus a failed fit.
fn results_file(dir: &Path) -> PathBuf {
    let entries = vec![
        fitted("g1a", 0.28, 0.001, 0.09, 0.85),
        fitted("g1b", 0.29, 0.001, 0.09, 0.85),
        fitted("g1c", 0.30, 0.001, 0.09, 0.85),
        fitted("g2a", 0.13, 0.004, 0.06, 0.7),
        fitted("g2b", 0.12, 0.004, 0.06, 0.7),
        fitted("g3a", 0.07, 0.02, 0.04, 0.7),
        fitted("g3b", 0.075, 0.02, 0.04, 0.7),
        fitted("plateau", 0.29, 0.008, 0.06, 0.7),
        fitted("sharp", 0.29, 0.015, 0.04, 0.85),
        serde_json::json!({"status": "failed", "subject": "lost", "kind": "numerical", "error": "x"}),
    ];
    let p = dir.join("results.json");
    std::fs::write(&p, serde_json::to_vec_pretty(&entries).unwrap()).unwrap();
    p
}

fn groups_of(path: &Path) -> Vec<(String, String)> {
    json(path)["subjects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["subject"].as_str().unwrap().to_string(), s["group"].as_str().unwrap().to_string()))
        .collect()
}

fn group_of(groups: &[(String, String)], id: &str) -> String {
    groups.iter().find(|(s, _)| s == id).unwrap().1.clone()
}

#[test]
fn classify_flags_and_reclassifies() {
    let dir = tempfile::tempdir().unwrap();
    let results = results_file(dir.path());
    let out = dir.path().join("groups.json");
    let o = glycosim(&["classify", "--results", arg(&results), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = groups_of(&out);
    assert_eq!(g.len(), 9);
    assert_eq!(group_of(&g, "g1a"), "group1");
    assert_eq!(group_of(&g, "g2a"), "group2");
    assert_eq!(group_of(&g, "g3b"), "group3");
    assert_eq!(group_of(&g, "plateau"), "group1");
    assert_eq!(group_of(&g, "sharp"), "outlier");
    let doc = json(&out);
    assert_eq!(doc["skipped"][0], "lost");
    assert_eq!(doc["tol_g"], 2.6);
    let plateau = doc["subjects"].as_array().unwrap().iter().find(|s| s["subject"] == "plateau").unwrap();
    assert_eq!(plateau["flagged"], "outlier");
    assert_eq!(plateau["reclassified"], true);
    assert!(plateau["peak_time"].as_f64().unwrap() < 30.0);
    assert!(plateau["peak"]["t_peak"].as_f64().unwrap() >= 30.0);

    let csv = std::fs::read_to_string(dir.path().join("groups.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "subject,group,peak_time,peak_value,t_bio,kabs,kgri,b");
    assert_eq!(csv.lines().count(), 10);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("group1") && stdout.contains("Kabs"));
    assert_eq!(manifest(&out)["command"], "classify");
}

#[test]
fn zero_tolerance_disables_reclassification() {
    let dir = tempfile::tempdir().unwrap();
    let results = results_file(dir.path());
    let out = dir.path().join("groups.json");
    assert!(glycosim(&["classify", "--results", arg(&results), "--tolg", "0", "--out", arg(&out)]).status.success());
    let g = groups_of(&out);
    assert_eq!(group_of(&g, "plateau"), "outlier");
    assert_eq!(g.iter().filter(|(_, l)| l == "group1").count(), 3);
    assert_eq!(g.iter().filter(|(_, l)| l == "outlier").count(), 2);
}

#[test]
fn classify_needs_fitted_subjects() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.json");
    std::fs::write(&p, "[]").unwrap();
    let o = glycosim(&["classify", "--results", arg(&p), "--out", arg(&dir.path().join("g.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

fn classified(dir: &Path, extra: &[&str]) -> PathBuf {
    let results = results_file(dir);
    let out = dir.join("groups.json");
    let mut args = vec!["classify", "--results", arg(&results), "--out", arg(&out)];
    args.extend_from_slice(extra);
    assert!(glycosim(&args).status.success());
    out
}

#[test]
fn stats_compare_three_groups() {
    let dir = tempfile::tempdir().unwrap();
    // a threshold above every Kabs leaves no outliers
    let groups = classified(dir.path(), &["--kabs-threshold", "1"]);
    let out = dir.path().join("stats.json");
    let o = glycosim(&["stats", "--groups", arg(&groups), "--metric", "kabs", "--spread", "sem", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out);
    assert_eq!(doc["groups"].as_array().unwrap().len(), 3);
    assert_eq!(doc["spread"], "sem");
    assert_eq!(doc["unit"], "1/min");
    let sig = &doc["significance"];
    assert_eq!(sig["pairwise"].as_array().unwrap().len(), 3);
    assert_eq!(sig["anova"]["df_between"], 2);
    let report = std::fs::read_to_string(dir.path().join("stats.significance.txt")).unwrap();
    assert!(report.contains("one-way ANOVA"));
    assert!(report.contains("group1 vs group2"));
}

#[test]
fn stats_on_identical_groups() {
    let dir = tempfile::tempdir().unwrap();
    let groups = classified(dir.path(), &["--kabs-threshold", "1"]);
    let mut doc = json(&groups);
    for s in doc["subjects"].as_array_mut().unwrap() {
        s["kabs"] = Value::from(0.2);
    }
    std::fs::write(&groups, serde_json::to_vec(&doc).unwrap()).unwrap();
    let out = dir.path().join("stats.json");
    assert!(glycosim(&["stats", "--groups", arg(&groups), "--out", arg(&out)]).status.success());
    let sig = &json(&out)["significance"];
    assert_eq!(sig["anova"]["f"], 0.0);
    assert_eq!(sig["anova"]["p"], 1.0);
    assert!(sig["pairwise"].as_array().unwrap().iter().all(|c| c["stars"] == ""));
}

#[test]
fn stats_group1_split() {
    let dir = tempfile::tempdir().unwrap();
    let groups = classified(dir.path(), &[]);
    let out = dir.path().join("split.json");
    let o = glycosim(&["stats", "--groups", arg(&groups), "--metric", "b", "--split", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out);
    let rows = doc["groups"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["group"], "group1_gbio_le_155");
    let n: u64 = rows.iter().map(|r| r["n"].as_u64().unwrap()).sum();
    assert_eq!(n, 4);
    // only one bucket is populated here, so there is nothing to test
    if rows.iter().any(|r| r["n"] == 0) {
        assert!(doc["significance"].is_null());
        assert!(doc["significance_error"].is_string());
    }
}
