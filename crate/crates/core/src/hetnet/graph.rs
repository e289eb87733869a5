use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Edge, HetnetError, NodeClass, RelationKind};
use crate::chem::{fingerprint, parse_smiles, tanimoto, Fingerprint};
use crate::numerics::{CsrMatrix, Matrix};

/// Similarity-edge thresholds: a derived drug–drug or disease–disease edge is
/// added for every pair whose similarity is strictly above the threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub drug_similarity_threshold: f64,
    pub disease_similarity_threshold: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            drug_similarity_threshold: 0.0,
            disease_similarity_threshold: 0.0,
        }
    }
}

/// Node classes laid out in one index space (drugs, proteins, genes,
/// pathways, diseases), typed edges and the initial node features.
///
/// Features are `N_drugs + N_diseases` wide: drug rows hold the drug–drug
/// similarity row in the first `N_drugs` columns, disease rows hold the
/// disease–disease similarity row in the last `N_diseases` columns, and all
/// other rows are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroGraph {
    counts: [usize; 5],
    pub edges: BTreeMap<RelationKind, Vec<Edge>>,
    pub features: CsrMatrix,
}

impl HeteroGraph {
    pub fn count(&self, class: NodeClass) -> usize {
        self.counts[class.position()]
    }

    pub fn n_drugs(&self) -> usize {
        self.count(NodeClass::Drug)
    }

    pub fn n_diseases(&self) -> usize {
        self.count(NodeClass::Disease)
    }

    pub fn num_nodes(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn feature_width(&self) -> usize {
        self.features.cols()
    }

    /// First global index of a class.
    pub fn offset(&self, class: NodeClass) -> usize {
        self.counts[..class.position()].iter().sum()
    }

    pub fn global(&self, class: NodeClass, local: usize) -> usize {
        self.offset(class) + local
    }

    pub fn relation(&self, kind: RelationKind) -> &[Edge] {
        self.edges.get(&kind).map_or(&[], Vec::as_slice)
    }

    /// Edges of a relation in global indices.
    pub fn global_edges(&self, kind: RelationKind) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let (sc, dc) = kind.endpoints();
        let (so, dof) = (self.offset(sc), self.offset(dc));
        self.relation(kind).iter().map(move |e| (so + e.src, dof + e.dst, e.weight))
    }

    pub fn drug_disease_pairs(&self) -> Vec<(usize, usize)> {
        self.relation(RelationKind::DrugDisease).iter().map(|e| (e.src, e.dst)).collect()
    }

    /// Copy without the given drug–disease edges; the receiver is untouched.
    pub fn mask_test_edges(&self, pairs: &[(usize, usize)]) -> HeteroGraph {
        if pairs.is_empty() {
            return self.clone();
        }
        let drop: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
        let mut out = self.clone();
        if let Some(edges) = out.edges.get_mut(&RelationKind::DrugDisease) {
            edges.retain(|e| !drop.contains(&(e.src, e.dst)));
        }
        out
    }
}

/// Fingerprints of every drug, in dataset order.
pub fn drug_fingerprints(dataset: &Dataset) -> Result<Vec<Fingerprint>, HetnetError> {
    dataset
        .drugs
        .iter()
        .map(|d| {
            parse_smiles(&d.smiles)
                .map(|m| fingerprint(&m))
                .map_err(|source| HetnetError::Smiles {
                    id: d.id.clone(),
                    source,
                })
        })
        .collect()
}

/// Pairwise Tanimoto similarity with a unit diagonal.
pub fn tanimoto_matrix(fps: &[Fingerprint]) -> Matrix {
    let n = fps.len();
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let s = tanimoto(&fps[i], &fps[j]);
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    m
}

pub fn build_graph(
    dataset: &Dataset,
    fingerprints: &[Fingerprint],
    config: &GraphConfig,
) -> Result<HeteroGraph, HetnetError> {
    let n_drugs = dataset.drugs.len();
    let n_diseases = dataset.diseases.len();
    if fingerprints.len() != n_drugs {
        return Err(HetnetError::InvalidParameter(format!(
            "{} fingerprints for {n_drugs} drugs",
            fingerprints.len()
        )));
    }
    let disease_sim = dataset
        .disease_similarity
        .as_ref()
        .ok_or(HetnetError::MissingSimilarityFile)?;
    let drug_sim = tanimoto_matrix(fingerprints);

    let counts = NodeClass::ALL.map(|c| dataset.count(c));
    let disease_offset: usize = counts[..4].iter().sum();
    let n_nodes: usize = counts.iter().sum();
    let mut triplets = Vec::new();
    for i in 0..n_drugs {
        for (j, &v) in drug_sim.row(i).iter().enumerate() {
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    for d in 0..n_diseases {
        for (j, &v) in disease_sim.row(d).iter().enumerate() {
            if v != 0.0 {
                triplets.push((disease_offset + d, n_drugs + j, v));
            }
        }
    }
    let features = CsrMatrix::from_triplets(n_nodes, n_drugs + n_diseases, triplets)
        .expect("feature indices in range");

    let mut edges = dataset.relations.clone();
    merge_similarity_edges(
        edges.entry(RelationKind::DrugDrug).or_default(),
        &drug_sim,
        config.drug_similarity_threshold,
    );
    merge_similarity_edges(
        edges.entry(RelationKind::DiseaseDisease).or_default(),
        disease_sim,
        config.disease_similarity_threshold,
    );
    edges.entry(RelationKind::DrugDisease).or_default();
    let graph = HeteroGraph {
        counts,
        edges,
        features,
    };
    assert_eq!(graph.feature_width(), n_drugs + n_diseases);
    Ok(graph)
}

/// Adds an undirected weighted edge for each off-diagonal pair above the
/// threshold; existing edges between the same pair keep the larger weight.
fn merge_similarity_edges(edges: &mut Vec<Edge>, sim: &Matrix, threshold: f64) {
    let mut by_pair: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in edges.iter() {
        if e.src == e.dst {
            continue;
        }
        let key = (e.src.min(e.dst), e.src.max(e.dst));
        let w = by_pair.entry(key).or_insert(e.weight);
        *w = w.max(e.weight);
    }
    for i in 0..sim.rows() {
        for j in i + 1..sim.cols() {
            let s = sim.get(i, j);
            if s > threshold {
                let w = by_pair.entry((i, j)).or_insert(s);
                *w = w.max(s);
            }
        }
    }
    *edges = by_pair
        .into_iter()
        .map(|((src, dst), weight)| Edge { src, dst, weight })
        .collect();
}

/// Removes `round(ε · |R_rd|)` drug–disease edges uniformly at random.
/// Returns the thinned graph and the removed pairs.
pub fn ablate_edges(
    graph: &HeteroGraph,
    epsilon: f64,
    seed: u64,
) -> Result<(HeteroGraph, Vec<(usize, usize)>), HetnetError> {
    let removed = super::ablate_pairs(&graph.drug_disease_pairs(), epsilon, seed)?;
    Ok((graph.mask_test_edges(&removed), removed))
}

pub(super) fn shuffled<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetnet::{DiseaseEntry, DrugEntry};

    fn tiny() -> Dataset {
        Dataset {
            drugs: vec![
                DrugEntry {
                    id: "a".into(),
                    smiles: "CCO".into(),
                },
                DrugEntry {
                    id: "b".into(),
                    smiles: "CCN".into(),
                },
            ],
            proteins: vec!["p".into()],
            diseases: vec![DiseaseEntry {
                id: "d".into(),
                name: "d".into(),
            }],
            disease_similarity: Some(Matrix::identity(1)),
            ..Default::default()
        }
    }

    #[test]
    fn feature_layout() {
        let ds = tiny();
        let fps = drug_fingerprints(&ds).unwrap();
        let g = build_graph(&ds, &fps, &GraphConfig::default()).unwrap();
        assert_eq!(g.feature_width(), 3);
        let s = tanimoto(&fps[0], &fps[1]);
        let dense = g.features.to_dense();
        assert_eq!(dense.row(0), &[1.0, s, 0.0]);
        assert_eq!(dense.row(1), &[s, 1.0, 0.0]);
        // protein row is zero, disease row carries its similarity block
        assert_eq!(dense.row(2), &[0.0, 0.0, 0.0]);
        assert_eq!(dense.row(3), &[0.0, 0.0, 1.0]);
        assert!(s > 0.0);
        assert_eq!(g.relation(RelationKind::DrugDrug).len(), 1);
    }

    #[test]
    fn missing_similarity() {
        let mut ds = tiny();
        ds.disease_similarity = None;
        let fps = drug_fingerprints(&ds).unwrap();
        assert_eq!(
            build_graph(&ds, &fps, &GraphConfig::default()),
            Err(HetnetError::MissingSimilarityFile)
        );
    }

    #[test]
    fn masking_and_ablation() {
        let mut ds = tiny();
        ds.relations.insert(
            RelationKind::DrugDisease,
            vec![
                Edge {
                    src: 0,
                    dst: 0,
                    weight: 1.0,
                },
                Edge {
                    src: 1,
                    dst: 0,
                    weight: 1.0,
                },
            ],
        );
        let fps = drug_fingerprints(&ds).unwrap();
        let g = build_graph(&ds, &fps, &GraphConfig::default()).unwrap();
        assert_eq!(g.mask_test_edges(&[]), g);
        let masked = g.mask_test_edges(&g.drug_disease_pairs());
        assert!(masked.relation(RelationKind::DrugDisease).is_empty());
        assert_eq!(g.relation(RelationKind::DrugDisease).len(), 2);
        let (same, removed) = ablate_edges(&g, 0.0, 1).unwrap();
        assert_eq!(same, g);
        assert!(removed.is_empty());
        let (none, removed) = ablate_edges(&g, 1.0, 1).unwrap();
        assert!(none.relation(RelationKind::DrugDisease).is_empty());
        assert_eq!(removed.len(), 2);
    }
}
