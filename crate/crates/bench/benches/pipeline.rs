use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repurpose::chem::{morgan_sentence, parse_smiles};
use repurpose::coldstart::recommend;
use repurpose::evaluate::{aupr, roc_auc};
use repurpose::model::{loss_and_gradients, GraphTensors, ModelState};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{drug_sentences, train_embeddings};
use repurpose_bench::{database, prepared, MOLECULES};

fn chemistry(c: &mut Criterion) {
    c.bench_function("parse_smiles", |b| {
        b.iter(|| MOLECULES.iter().map(|s| parse_smiles(black_box(s)).unwrap().atoms.len()).sum::<usize>())
    });
    let graphs: Vec<_> = MOLECULES.iter().map(|s| parse_smiles(s).unwrap()).collect();
    c.bench_function("morgan_sentence", |b| {
        b.iter(|| graphs.iter().map(|g| morgan_sentence(black_box(g)).len()).sum::<usize>())
    });
}

fn embedding(c: &mut Criterion) {
    let (p, cfg) = prepared(1);
    let sentences = drug_sentences(&p.dataset).unwrap();
    let mut g = c.benchmark_group("skipgram");
    g.sample_size(10);
    g.bench_function("synthetic_corpus", |b| b.iter(|| train_embeddings(&sentences, &cfg.skipgram).unwrap().len()));
    g.finish();
}

fn model(c: &mut Criterion) {
    let (p, cfg) = prepared(1);
    let state = ModelState::init(&cfg.model, &p.graph).unwrap();
    let tensors = GraphTensors::new(&p.graph);
    let labels = Arc::new(p.dataset.association_matrix());
    let mask = Arc::new(Matrix::filled(labels.rows(), labels.cols(), 1.0));
    c.bench_function("loss_and_gradients", |b| {
        b.iter(|| loss_and_gradients(&state, &tensors, &p.drug_vectors, &labels, &mask, None).unwrap().0)
    });
}

fn query(c: &mut Criterion) {
    let db = database(20);
    let mut g = c.benchmark_group("recommend");
    for s in ["CCO", MOLECULES[0]] {
        g.bench_with_input(BenchmarkId::from_parameter(s), s, |b, s| {
            b.iter(|| recommend(black_box(s), None, &db, None).unwrap().ranking.len())
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 10_000;
    let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.1)).collect();
    c.bench_function("roc_auc_10k", |b| b.iter(|| roc_auc(black_box(&scores), &labels).unwrap()));
    c.bench_function("aupr_10k", |b| b.iter(|| aupr(black_box(&scores), &labels).unwrap()));
}

criterion_group!(benches, chemistry, embedding, model, query, metrics);
criterion_main!(benches);
