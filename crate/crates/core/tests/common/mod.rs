#![allow(dead_code)]

use std::sync::Arc;

use repurpose::hetnet::{Dataset, DiseaseEntry, DrugEntry, Edge, GraphConfig, RelationKind};
use repurpose::model::{loss_and_gradients, GraphTensors, ModelConfig, ModelState};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{prepare, PipelineConfig, Prepared};

fn e(src: usize, dst: usize) -> Edge {
    Edge {
        src,
        dst,
        weight: 1.0,
    }
}

/// 5 drugs, 4 diseases, 3 proteins, 2 genes, 2 pathways.
pub fn micro_dataset() -> Dataset {
    let smiles = ["CCO", "CCN", "c1ccccc1O", "c1ccccc1N", "CC(=O)O"];
    let mut ds = Dataset {
        drugs: smiles
            .iter()
            .enumerate()
            .map(|(i, s)| DrugEntry {
                id: format!("D{i}"),
                smiles: s.to_string(),
            })
            .collect(),
        proteins: vec!["P0".into(), "P1".into(), "P2".into()],
        genes: vec!["G0".into(), "G1".into()],
        pathways: vec!["W0".into(), "W1".into()],
        diseases: (0..4)
            .map(|i| DiseaseEntry {
                id: format!("S{i}"),
                name: format!("disease {i}"),
            })
            .collect(),
        ..Default::default()
    };
    let rel = &mut ds.relations;
    rel.insert(RelationKind::DrugDisease, vec![e(0, 0), e(1, 0), e(2, 1), e(3, 2), e(4, 3)]);
    rel.insert(RelationKind::DrugProtein, vec![e(0, 0), e(2, 1), e(4, 2)]);
    rel.insert(RelationKind::ProteinGene, vec![e(0, 0), e(1, 1)]);
    rel.insert(RelationKind::GenePathway, vec![e(0, 0), e(1, 1)]);
    rel.insert(RelationKind::PathwayDisease, vec![e(0, 0), e(1, 2)]);
    ds.disease_similarity = Some(
        Matrix::from_rows(&[
            [1.0, 0.7, 0.2, 0.1],
            [0.7, 1.0, 0.3, 0.2],
            [0.2, 0.3, 1.0, 0.6],
            [0.1, 0.2, 0.6, 1.0],
        ])
        .unwrap(),
    );
    ds
}

pub fn micro_config() -> PipelineConfig {
    let mut c = PipelineConfig {
        graph: GraphConfig {
            drug_similarity_threshold: 0.5,
            disease_similarity_threshold: 0.5,
        },
        ..Default::default()
    };
    c.skipgram.dim = 12;
    c.skipgram.min_count = 1;
    c.skipgram.epochs = 3;
    c.model.drug_dim = 12;
    c.model.hidden_dim = 8;
    c.model.embed_dim = 8;
    c.model.dropout = 0.0;
    c.model.epochs = 50;
    c.model.seed = 3;
    c
}

pub fn micro_prepared() -> (Prepared, PipelineConfig) {
    let c = micro_config();
    (prepare(&micro_dataset(), &c, None).unwrap(), c)
}

pub fn full_supervision(p: &Prepared) -> (Arc<Matrix>, Arc<Matrix>) {
    let labels = p.dataset.association_matrix();
    let mask = Matrix::filled(labels.rows(), labels.cols(), 1.0);
    (Arc::new(labels), Arc::new(mask))
}

/// Worst relative disagreement between analytic and central-difference
/// gradients over every parameter entry, with entries whose absolute
/// difference is below `1e-9` counted as agreeing.
pub fn gradient_check(prepared: &Prepared, config: &ModelConfig, h: f64) -> (f64, usize) {
    let state = ModelState::init(config, &prepared.graph).unwrap();
    let tensors = GraphTensors::new(&prepared.graph);
    let (labels, mask) = full_supervision(prepared);
    let (_, grads) =
        loss_and_gradients(&state, &tensors, &prepared.drug_vectors, &labels, &mask, None).unwrap();
    let loss_at = |s: &ModelState| {
        loss_and_gradients(s, &tensors, &prepared.drug_vectors, &labels, &mask, None)
            .unwrap()
            .0
    };
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut probe = state.clone();
    for (p, grad) in grads.iter().enumerate() {
        for i in 0..grad.len() {
            let orig = state.params.values()[p].as_slice()[i];
            probe.params.values_mut()[p].as_mut_slice()[i] = orig + h;
            let up = loss_at(&probe);
            probe.params.values_mut()[p].as_mut_slice()[i] = orig - h;
            let down = loss_at(&probe);
            probe.params.values_mut()[p].as_mut_slice()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grad.as_slice()[i];
            let diff = (numeric - analytic).abs();
            if diff > 1e-9 {
                worst = worst.max(diff / numeric.abs().max(analytic.abs()));
            }
            checked += 1;
        }
    }
    (worst, checked)
}
