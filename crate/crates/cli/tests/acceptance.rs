//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Run with `cargo test -p repurpose-cli --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repurpose::chem::{fingerprint, morgan_sentence, parse_smiles, write_smiles};
use repurpose::coldstart::{embed_query, recommend, run_coldstart, EmbeddingDatabase, DEFAULT_THRESHOLD};
use repurpose::embed::EmbeddingTable;
use repurpose::evaluate::{aupr, metrics_report, roc_auc, run_ablation, run_cv, thresholded_metrics, CvConfig, CvSummary};
use repurpose::hetnet::{Dataset, DiseaseEntry, DrugEntry, Edge, GraphConfig, RelationKind};
use repurpose::model::{loss_and_gradients, GraphTensors, ModelState};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{prepare, PipelineConfig};
use repurpose::synthetic::{generate, SyntheticConfig};
use repurpose_cli::api::{predict, PredictRequest};

use common::{bundled_db, bundled_db_path, data_dir, small_config};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- P1

fn edge(src: usize, dst: usize) -> Edge {
    Edge { src, dst, weight: 1.0 }
}

fn micro_dataset() -> Dataset {
    let smiles = ["CCO", "CCN", "c1ccccc1O", "c1ccccc1N", "CC(=O)O"];
    let mut ds = Dataset {
        drugs: smiles
            .iter()
            .enumerate()
            .map(|(i, s)| DrugEntry { id: format!("D{i}"), smiles: s.to_string() })
            .collect(),
        proteins: vec!["P0".into(), "P1".into(), "P2".into()],
        genes: vec!["G0".into(), "G1".into()],
        pathways: vec!["W0".into(), "W1".into()],
        diseases: (0..4).map(|i| DiseaseEntry { id: format!("S{i}"), name: format!("disease {i}") }).collect(),
        ..Default::default()
    };
    let rel = &mut ds.relations;
    rel.insert(RelationKind::DrugDisease, vec![edge(0, 0), edge(1, 0), edge(2, 1), edge(3, 2), edge(4, 3)]);
    rel.insert(RelationKind::DrugProtein, vec![edge(0, 0), edge(2, 1), edge(4, 2)]);
    rel.insert(RelationKind::ProteinGene, vec![edge(0, 0), edge(1, 1)]);
    rel.insert(RelationKind::GenePathway, vec![edge(0, 0), edge(1, 1)]);
    rel.insert(RelationKind::PathwayDisease, vec![edge(0, 0), edge(1, 2)]);
    ds.disease_similarity = Some(
        Matrix::from_rows(&[[1.0, 0.7, 0.2, 0.1], [0.7, 1.0, 0.3, 0.2], [0.2, 0.3, 1.0, 0.6], [0.1, 0.2, 0.6, 1.0]])
            .unwrap(),
    );
    ds
}

fn p1_gradients() -> Check {
    let mut c = PipelineConfig {
        graph: GraphConfig { drug_similarity_threshold: 0.5, disease_similarity_threshold: 0.5 },
        ..Default::default()
    };
    c.skipgram.dim = 12;
    c.skipgram.min_count = 1;
    c.skipgram.epochs = 3;
    c.model.drug_dim = 12;
    c.model.hidden_dim = 8;
    c.model.embed_dim = 8;
    c.model.dropout = 0.0;
    c.model.seed = 3;
    let ds = micro_dataset();
    let edges: usize = RelationKind::ALL.iter().map(|&k| ds.relation(k).len()).sum();
    if edges > 20 {
        return Err(format!("micro graph has {edges} edges"));
    }
    let p = prepare(&ds, &c, None).map_err(|e| e.to_string())?;
    let state = ModelState::init(&c.model, &p.graph).map_err(|e| e.to_string())?;
    let tensors = GraphTensors::new(&p.graph);
    let labels = Arc::new(p.dataset.association_matrix());
    let mask = Arc::new(Matrix::filled(labels.rows(), labels.cols(), 1.0));
    let loss_at = |s: &ModelState| loss_and_gradients(s, &tensors, &p.drug_vectors, &labels, &mask, None).unwrap();
    let (_, grads) = loss_at(&state);

    let h = 1e-5;
    let (mut worst, mut checked) = (0.0f64, 0usize);
    let (mut max_diff, mut max_grad) = (0.0f64, 0.0f64);
    let mut probe = state.clone();
    for (k, grad) in grads.iter().enumerate() {
        for i in 0..grad.len() {
            let orig = state.params.values()[k].as_slice()[i];
            probe.params.values_mut()[k].as_mut_slice()[i] = orig + h;
            let up = loss_at(&probe).0;
            probe.params.values_mut()[k].as_mut_slice()[i] = orig - h;
            let down = loss_at(&probe).0;
            probe.params.values_mut()[k].as_mut_slice()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grad.as_slice()[i];
            let diff = (numeric - analytic).abs();
            max_diff = max_diff.max(diff);
            max_grad = max_grad.max(analytic.abs());
            // absolute floor for entries whose true gradient is zero
            if diff > 1e-9 {
                worst = worst.max(diff / numeric.abs().max(analytic.abs()));
            }
            checked += 1;
        }
    }
    ensure(worst < 1e-3, format!(
            "{checked} entries over {edges} edges, worst relative error {worst:.2e} (max abs diff {max_diff:.1e}, max |grad| {max_grad:.2})"
        ))
}

// ---------------------------------------------------------------- P2

fn auc_oracle(s: &[f64], l: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in (0..s.len()).filter(|&i| l[i]) {
        for j in (0..s.len()).filter(|&j| !l[j]) {
            pairs += 1.0;
            if s[i] > s[j] {
                wins += 1.0;
            } else if s[i] == s[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Each positive scores the precision among everything at or above it.
fn aupr_oracle(s: &[f64], l: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut pos = 0;
    for i in (0..s.len()).filter(|&i| l[i]) {
        pos += 1;
        let above: Vec<usize> = (0..s.len()).filter(|&j| s[j] >= s[i]).collect();
        let tp = above.iter().filter(|&&j| l[j]).count();
        total += tp as f64 / above.len() as f64;
    }
    total / pos as f64
}

fn p2_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.random_range(2..=200);
        let levels = if case % 3 == 0 { rng.random_range(2..6) } else { 0 };
        let mut s: Vec<f64> = (0..n)
            .map(|_| if levels > 0 { rng.random_range(0..levels) as f64 / levels as f64 } else { rng.random() })
            .collect();
        let mut l: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        l[0] = true;
        l[1] = false;
        if case % 7 == 0 {
            s.iter_mut().for_each(|v| *v = 0.5);
        }
        let a = roc_auc(&s, &l).map_err(|e| e.to_string())?;
        let p = aupr(&s, &l).map_err(|e| e.to_string())?;
        worst = worst.max((a - auc_oracle(&s, &l)).abs()).max((p - aupr_oracle(&s, &l)).abs());
    }
    if worst > 1e-12 {
        return Err(format!("ranking metrics off by {worst:.2e}"));
    }

    // Hand-worked confusions: (scores, labels, threshold, tp, fp, tn, fn).
    let fixed: [(&[f64], &[bool], f64, [usize; 4]); 5] = [
        (&[0.9, 0.8, 0.3, 0.1], &[true, false, true, false], 0.5, [1, 1, 1, 1]),
        (&[0.5, 0.5, 0.5], &[true, false, true], 0.5, [0, 0, 1, 2]),
        (&[0.6, 0.7, 0.2, 0.1, 0.9], &[true, true, false, false, true], 0.24, [3, 0, 2, 0]),
        (&[1.0, 0.0], &[false, true], 0.0, [0, 1, 0, 1]),
        (&[0.25, 0.24, 0.23], &[true, true, false], 0.24, [1, 0, 1, 1]),
    ];
    let mut cases = 0;
    for (s, l, t, [tp, fp, tn, fn_]) in fixed {
        let c = thresholded_metrics(s, l, t).map_err(|e| e.to_string())?;
        if (c.tp, c.fp, c.tn, c.fn_) != (tp, fp, tn, fn_) {
            return Err(format!("confusion {c:?} for {s:?} at {t}"));
        }
        cases += 1;
    }
    // Generated cases checked against direct counting and the textbook ratios.
    for k in 0..45 {
        let n = 4 + k % 9;
        let s: Vec<f64> = (0..n).map(|i| ((i * 7 + k * 3) % 11) as f64 / 10.0).collect();
        let l: Vec<bool> = (0..n).map(|i| (i + k) % 3 == 0).collect();
        let t = (k % 10) as f64 / 10.0;
        let c = thresholded_metrics(&s, &l, t).map_err(|e| e.to_string())?;
        let count = |pred: bool, truth: bool| (0..n).filter(|&i| (s[i] > t) == pred && l[i] == truth).count();
        let (tp, fp, tn, fn_) = (count(true, true), count(true, false), count(false, false), count(false, true));
        if (c.tp, c.fp, c.tn, c.fn_) != (tp, fp, tn, fn_) {
            return Err(format!("generated case {k}: {c:?}"));
        }
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (prec, rec) = (div(tp, tp + fp), div(tp, tp + fn_));
        let f1 = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
        let want = [div(tp + tn, n), f1, prec, rec, div(tn, tn + fp)];
        let got = [c.accuracy(), c.f1(), c.precision(), c.recall(), c.specificity()];
        if want.iter().zip(got).any(|(a, b)| (a - b).abs() > 1e-15) {
            return Err(format!("generated case {k}: ratios {got:?} vs {want:?}"));
        }
        if l.iter().any(|&x| x) && l.iter().any(|&x| !x) {
            let r = metrics_report(&s, &l, t).map_err(|e| e.to_string())?;
            if r.confusion != c || r.metrics.recall != rec {
                return Err(format!("generated case {k}: report disagrees"));
            }
        }
        cases += 1;
    }
    ensure(cases == 50, format!("1000 ranking instances within {worst:.1e}, {cases} confusion cases"))
}

// ---------------------------------------------------------------- P3

const FRAGMENTS: &[&str] = &[
    "C", "CC", "N", "O", "S", "F", "Cl", "Br", "C(=O)", "C(=O)O", "C#N", "c1ccccc1", "c1ccncc1", "c1ccsc1",
    "C1CCCCC1", "C1CC1", "C(C)(C)", "[NH3+]", "[O-]", "N(C)C", "c1ccc2ccccc2c1", "C=C", "OC", "S(=O)(=O)",
];

/// Random molecule built by chaining fragments, some as side branches.
fn random_molecule(rng: &mut ChaCha8Rng) -> String {
    let parts = rng.random_range(2..=6);
    let mut s = String::from(*FRAGMENTS.choose(rng).unwrap());
    for _ in 1..parts {
        let f = *FRAGMENTS.choose(rng).unwrap();
        if rng.random_bool(0.3) && !s.ends_with(')') {
            s = format!("{s}({f})");
        } else {
            s.push_str(f);
        }
    }
    s
}

fn p3_fingerprints() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut molecules, mut spellings) = (0, 0);
    while molecules < 100 {
        let s = random_molecule(&mut rng);
        // Charged fragments can land where they make no valid molecule; skip those.
        let Ok(g) = parse_smiles(&s) else { continue };
        let fp = fingerprint(&g);
        let mut sent: Vec<u32> = morgan_sentence(&g).hashes().collect();
        sent.sort_unstable();
        for root in 0..g.atoms.len() {
            let w = write_smiles(&g, root);
            let h = parse_smiles(&w).map_err(|e| format!("`{w}` (from `{s}`): {e}"))?;
            let mut other: Vec<u32> = morgan_sentence(&h).hashes().collect();
            other.sort_unstable();
            if fingerprint(&h) != fp || other != sent {
                return Err(format!("`{s}` respelled as `{w}` changes its fingerprint"));
            }
            spellings += 1;
        }
        molecules += 1;
    }
    Ok(format!("{molecules} molecules, {spellings} respellings"))
}

// ---------------------------------------------------------------- P4, P5

fn planted_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.model.epochs = 500;
    c
}

fn planted_cv() -> CvConfig {
    CvConfig { k: 5, ..Default::default() }
}

fn p4_planted(summary: &CvSummary) -> Check {
    let m = summary.mean;
    ensure(
        m.auc >= 0.90 && m.recall >= 0.70,
        format!("5-fold mean AUC {:.4} (std {:.4}), recall {:.4}", m.auc, summary.std.auc, m.recall),
    )
}

fn p5_sweep(base: &CvSummary) -> Check {
    let ds = generate(&SyntheticConfig::default());
    let c = planted_config();
    let p = prepare(&ds, &c, None).map_err(|e| e.to_string())?;
    let eps = [0.2, 0.4, 0.6, 0.8, 1.0];
    let rows = run_ablation(&p, &c.model, &planted_cv(), &eps, None).map_err(|e| e.to_string())?;
    let mut aucs = vec![base.mean.auc];
    aucs.extend(rows.iter().map(|r| r.summary.mean.auc));
    let text: Vec<String> = aucs.iter().map(|a| format!("{a:.4}")).collect();
    let drop = aucs[0] - aucs[5];
    let monotone = aucs.windows(2).all(|w| w[1] <= w[0] + 0.05);
    ensure(drop >= 0.20 && monotone, format!("AUC over eps 0..1: {} (drop {drop:.4})", text.join(" ")))
}

// ---------------------------------------------------------------- P6

fn dense_scores(q: &[f64], emb: &Matrix, a: &Matrix, prior: &[f64]) -> Vec<f64> {
    let mut raw = prior.to_vec();
    for i in 0..emb.rows() {
        let d = (0..q.len()).map(|k| (q[k] - emb.get(i, k)).powi(2)).sum::<f64>().sqrt();
        let rho = 1.0 / (d + 1e-8);
        for (j, r) in raw.iter_mut().enumerate() {
            *r += rho * a.get(i, j);
        }
    }
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.5 }).collect()
}

fn random_db(base: &EmbeddingDatabase, rng: &mut ChaCha8Rng) -> EmbeddingDatabase {
    let mut db = base.clone();
    let n = rng.random_range(2..=base.n_drugs());
    let dim = base.drug_embeddings.cols();
    db.drug_ids.truncate(n);
    db.drug_embeddings = Matrix::from_vec(n, dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let m = db.n_diseases();
    db.scores = Matrix::from_vec(n, m, (0..n * m).map(|_| rng.random()).collect()).unwrap();
    db
}

fn p6_formula() -> Check {
    let base = bundled_db();
    let queries = ["CC(=O)O", "c1ccccc1O", "CCN(CC)CC", "O=C(O)c1ccccc1", "CCOC(=O)C", "C1CCNCC1", "FC(F)(F)Cl"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let db = random_db(&base, &mut rng);
        let smiles = *queries.choose(&mut rng).unwrap();
        let mut prior = vec![0.0; db.n_diseases()];
        if rng.random_bool(0.5) {
            for _ in 0..rng.random_range(1..4) {
                prior[rng.random_range(0..db.n_diseases())] += rng.random_range(0.0..2.0);
            }
        }
        let r = recommend(smiles, Some(&prior), &db, None).map_err(|e| e.to_string())?;
        let q = embed_query(smiles, &db).map_err(|e| e.to_string())?;
        let want = dense_scores(&q.values, &db.drug_embeddings, &db.scores, &prior);
        for row in &r.ranking {
            worst = worst.max((row.score - want[row.index]).abs());
        }
        if r.ranking.len() != db.n_diseases() {
            return Err("ranking does not cover every disease".into());
        }
    }
    if worst > 1e-9 {
        return Err(format!("scores differ from dense recomputation by {worst:.2e}"));
    }

    // Duplicating a training drug recovers its dominant disease.
    let mut hits = 0;
    for t in 0..50 {
        let mut db = random_db(&base, &mut rng);
        let i = rng.random_range(0..db.n_drugs());
        let smiles = *queries.choose(&mut rng).unwrap();
        let q = embed_query(smiles, &db).map_err(|e| e.to_string())?;
        db.drug_embeddings.row_mut(i).copy_from_slice(&q.values);
        let top = rng.random_range(0..db.n_diseases());
        for r in 0..db.n_drugs() {
            for d in 0..db.n_diseases() {
                let v = if r == i && d == top { rng.random_range(0.9..1.0) } else { rng.random_range(0.0..0.1) };
                db.scores.set(r, d, v);
            }
        }
        let r = recommend(smiles, None, &db, None).map_err(|e| e.to_string())?;
        if r.ranking[0].index != top {
            return Err(format!("trial {t}: drug {i} top disease {top} ranked {}", r.ranking[0].index));
        }
        hits += 1;
    }
    Ok(format!("100 databases within {worst:.1e}, {hits}/50 duplicate queries recover the top disease"))
}

// ---------------------------------------------------------------- P7

fn p7_coldstart() -> Check {
    let ds = generate(&SyntheticConfig::default());
    let run = run_coldstart(&ds, &planted_config(), 0.9, 0, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    let r = &run.report.report;
    ensure(
        r.metrics.recall >= 0.70,
        format!(
            "{} held-out drugs, {} true pairs: recall {:.4}, AUC {:.4} at threshold {DEFAULT_THRESHOLD}",
            run.report.test_drugs, run.report.truth_pairs, r.metrics.recall, r.metrics.auc
        ),
    )
}

// ---------------------------------------------------------------- P8

fn p8_goldens() -> Check {
    let db = bundled_db();
    let req = PredictRequest { smiles: "CC(=O)O".into(), prior: vec![], top_k: None };
    let csv = predict(&db, &req).map_err(|e| e.message)?.csv();
    let golden = std::fs::read(data_dir().join("quick_predict.csv")).map_err(|e| e.to_string())?;
    if csv.as_bytes() != golden {
        return Err("quick_predict.csv differs from the committed golden".into());
    }

    let committed = std::fs::read_to_string(bundled_db_path()).map_err(|e| e.to_string())?;
    if db.to_json() != committed {
        return Err("database does not re-serialize to the same bytes".into());
    }
    let table_text = db.embedding_table.clone();
    let table = EmbeddingTable::from_text(&table_text).map_err(|e| e.to_string())?;
    if table.to_text() != table_text || EmbeddingTable::from_text(&table.to_text()).as_ref() != Ok(&table) {
        return Err("embedding table does not round-trip".into());
    }

    // Training from scratch reproduces the committed database.
    let rebuilt = common::build_db(&common::synthetic(), &small_config());
    ensure(
        rebuilt.to_json() == committed,
        format!("golden CSV {} bytes, database {} bytes, table {} tokens", golden.len(), committed.len(), table.len()),
    )
}

// ---------------------------------------------------------------- P9

fn p9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let bin = env!("CARGO_BIN_EXE_repurpose");
    let run = |args: &[&str]| -> Result<(), String> {
        let o = Command::new(bin).args(args).current_dir(d).output().map_err(|e| e.to_string())?;
        if o.status.success() {
            Ok(())
        } else {
            Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
        }
    };
    std::fs::write(d.join("small.toml"), common::SMALL_CONFIG_TOML).map_err(|e| e.to_string())?;
    run(&["synth", "--out", "data"])?;
    let mut summaries = Vec::new();
    for out in ["a", "b"] {
        run(&["cv", "--manifest", "data/manifest.toml", "--config", "small.toml", "--k", "5", "--seed", "4", "--out", out])?;
        summaries.push(std::fs::read(d.join(out).join("cv_summary.json")).map_err(|e| e.to_string())?);
    }
    if summaries[0] != summaries[1] {
        return Err("cv summaries differ between identical runs".into());
    }

    let db_path = bundled_db_path();
    let smiles = "O=C(O)c1ccccc1OC(C)=O";
    std::fs::write(d.join("prior.tsv"), "DS0003\t0.5\nDS0011\n").map_err(|e| e.to_string())?;
    run(&["predict", "--db", db_path.to_str().unwrap(), "--smiles", smiles, "--prior", "prior.tsv", "--json", "p.json"])?;
    let cli = std::fs::read(d.join("p.json")).map_err(|e| e.to_string())?;

    let body = serde_json::json!({"smiles": smiles, "prior": [{"id": "DS0003", "weight": 0.5}, "DS0011"]}).to_string();
    let app = repurpose_cli::server::router(Arc::new(bundled_db()), None);
    let rt = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    let api = rt.block_on(async {
        use http_body_util::BodyExt;
        use tower::ServiceExt;
        let req = axum::http::Request::post("/api/predict")
            .header("content-type", "application/json")
            .body(axum::body::Body::from(body))
            .unwrap();
        let resp = app.oneshot(req).await.unwrap();
        resp.into_body().collect().await.unwrap().to_bytes().to_vec()
    });
    ensure(
        cli == api,
        format!("cv summaries identical ({} bytes); CLI and API predictions identical ({} bytes)", summaries[0].len(), cli.len()),
    )
}

// ----------------------------------------------------------------

fn main() {
    let mut results: BTreeMap<&str, (Check, Duration)> = BTreeMap::new();
    let mut timed = |name: &'static str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let r = f();
        let line = report(name, &r, t.elapsed());
        println!("{line}");
        results.insert(name, (r, t.elapsed()));
    };
    timed("P1 gradient correctness", &p1_gradients);
    timed("P2 metric oracles", &p2_metrics);
    timed("P3 fingerprint invariance", &p3_fingerprints);

    let t = Instant::now();
    let planted = (|| {
        let ds = generate(&SyntheticConfig::default());
        let c = planted_config();
        let p = prepare(&ds, &c, None).map_err(|e| e.to_string())?;
        run_cv(&p, &c.model, &planted_cv(), None).map_err(|e| e.to_string())
    })();
    let cv_time = t.elapsed();
    match &planted {
        Ok(s) => {
            timed("P4 planted-structure cv", &|| p4_planted(s).map(|m| format!("{m}, cv {:.0?}", cv_time)));
            timed("P5 sparsity sweep", &|| p5_sweep(s));
        }
        Err(e) => {
            timed("P4 planted-structure cv", &|| Err(e.clone()));
            timed("P5 sparsity sweep", &|| Err(format!("no baseline: {e}")));
        }
    }
    timed("P6 cold-start formula", &p6_formula);
    timed("P7 cold-start recall", &p7_coldstart);
    timed("P8 byte goldens", &p8_goldens);
    timed("P9 determinism", &p9_determinism);

    let failed = results.values().filter(|(r, _)| r.is_err()).count();
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(name: &str, r: &Check, took: Duration) -> String {
    match r {
        Ok(d) => format!("PASS {name}: {d} [{took:.1?}]"),
        Err(d) => format!("FAIL {name}: {d} [{took:.1?}]"),
    }
}
