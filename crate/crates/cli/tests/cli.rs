mod common;

use std::path::Path;
use std::process::{Command, Output};

use repurpose::pipeline::RunManifest;
use repurpose_cli::api::PredictResponse;

use common::{bundled_db, bundled_db_path, SMALL_CONFIG_TOML};

fn repurpose(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repurpose"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = repurpose(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A synthetic dataset and the small training config in a scratch dir.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--out", "data"]);
    std::fs::write(dir.path().join("small.toml"), SMALL_CONFIG_TOML).unwrap();
    dir
}

fn dataset_hash(dir: &Path) -> String {
    repurpose::hetnet::Dataset::from_manifest_path(&dir.join("data/manifest.toml"))
        .unwrap()
        .content_hash()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(repurpose(d, &["--help"]).status.code(), Some(0));
    assert_eq!(repurpose(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(repurpose(d, &["cv"]).status.code(), Some(1));
    assert_eq!(repurpose(d, &["synth", "--out", "x", "--noise", "2"]).status.code(), Some(1));

    let o = repurpose(d, &["cv", "--manifest", "missing/manifest.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));

    let db = bundled_db_path();
    let db = db.to_str().unwrap();
    let o = repurpose(d, &["predict", "--db", db, "--smiles", "C1CC"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset 1"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);

    std::fs::write(d.join("prior.tsv"), "NOPE\n").unwrap();
    let o = repurpose(d, &["predict", "--db", db, "--smiles", "C", "--prior", "prior.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NOPE"));
}

#[test]
fn divergence_is_a_numeric_failure() {
    let w = workspace();
    let cfg = format!("{SMALL_CONFIG_TOML}learning_rate = 1e300\n");
    std::fs::write(w.path().join("big.toml"), cfg).unwrap();
    let o = repurpose(w.path(), &["train", "--manifest", "data/manifest.toml", "--config", "big.toml", "--out", "m"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn cv_prints_fold_table() {
    let w = workspace();
    let out = ok(
        w.path(),
        &["cv", "--manifest", "data/manifest.toml", "--config", "small.toml", "--k", "10", "--epochs", "20", "--out", "cv"],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("fold"));
    assert_eq!(lines.len(), 1 + 10 + 2, "{out}");
    assert!(lines[11].starts_with("mean"));
    assert!(lines[12].starts_with("std"));
    for l in &lines[1..] {
        let vals: Vec<f64> = l.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 7, "{l}");
    }
    let m = RunManifest::read(&w.path().join("cv")).unwrap();
    assert_eq!(m.command, "cv");
    assert_eq!(m.dataset_hash, dataset_hash(w.path()));
    assert!(w.path().join("cv/cv_folds.tsv").is_file());
}

#[test]
fn predict_writes_one_row_per_disease() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let db = bundled_db();
    let path = bundled_db_path();
    ok(d, &["predict", "--db", path.to_str().unwrap(), "--smiles", "CC(=O)O", "--json", "out.json"]);
    let csv = std::fs::read_to_string(d.join("quick_predict.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), db.n_diseases() + 1);
    assert_eq!(lines[0], "disease_id,disease_name,score");

    // The CSV carries the JSON scores to six decimals.
    let json: PredictResponse = serde_json::from_str(&std::fs::read_to_string(d.join("out.json")).unwrap()).unwrap();
    for (row, line) in json.ranking.iter().zip(&lines[1..]) {
        let score: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((score - row.score).abs() <= 5e-7);
        assert!(line.starts_with(&row.disease_id));
    }
    let m = RunManifest::read(d).unwrap();
    assert_eq!(m.command, "predict");
    assert_eq!(m.dataset_hash, db.provenance);
}

#[test]
fn train_coldstart_and_analysis_round_trip() {
    let w = workspace();
    let d = w.path();
    let hash = dataset_hash(d);
    ok(d, &["ingest", "--manifest", "data/manifest.toml", "--out", "ingest"]);
    assert_eq!(RunManifest::read(&d.join("ingest")).unwrap().dataset_hash, hash);

    ok(d, &["train", "--manifest", "data/manifest.toml", "--config", "small.toml", "--out", "model"]);
    for f in ["db.json", "embeddings.txt", "losses.tsv", "run_manifest.json"] {
        assert!(d.join("model").join(f).is_file(), "{f}");
    }
    let m = RunManifest::read(&d.join("model")).unwrap();
    assert_eq!((m.command.as_str(), m.dataset_hash.as_str(), m.seed), ("train", hash.as_str(), 1));

    ok(d, &["coldstart-split", "--manifest", "data/manifest.toml", "--ratio", "0.9", "--seed", "3", "--out", "cs"]);
    ok(d, &["train", "--manifest", "cs/train/manifest.toml", "--config", "small.toml", "--out", "cs/model"]);
    let out = ok(
        d,
        &["coldstart-eval", "--train-db", "cs/model/db.json", "--test-manifest", "cs/test/manifest.toml", "--out", "cs/eval"],
    );
    assert!(out.starts_with("threshold 0.24"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("cs/eval/coldstart_report.json")).unwrap()).unwrap();
    assert_eq!(report["test_drugs"], 4);

    ok(d, &["analyze", "tsne", "--db", "model/db.json", "--out", "an/tsne.tsv", "--perplexity", "5", "--iterations", "300"]);
    ok(d, &["analyze", "kmeans", "--db", "model/db.json", "--k", "4", "--out", "an/km"]);
    ok(d, &["analyze", "pairscore", "--manifest", "data/manifest.toml", "--out", "an/pairs.tsv"]);
    ok(
        d,
        &["analyze", "heatmap", "--train-db", "cs/model/db.json", "--test-manifest", "cs/test/manifest.toml", "--out", "an/heat.tsv"],
    );
    let tsne = std::fs::read_to_string(d.join("an/tsne.tsv")).unwrap();
    assert_eq!(tsne.lines().count(), 1 + 40);
    assert!(d.join("an/km/cluster_similarity.tsv").is_file());
    assert!(RunManifest::read(&d.join("an")).is_ok());
}
