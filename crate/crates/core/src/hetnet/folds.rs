use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::graph::shuffled;
use super::{Dataset, Edge, HetnetError, NodeClass};
use crate::numerics::Matrix;

/// How unknown drug–disease pairs enter cross-validation as negatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NegativePolicy {
    /// Every unknown pair, split into the same k parts as the positives.
    #[default]
    AllUnknown,
    /// `round(ratio * |positives|)` unknown pairs drawn uniformly.
    Sampled { ratio: f64 },
}

/// k-fold assignment of positive and negative pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub n_drugs: usize,
    pub n_diseases: usize,
    pub policy: NegativePolicy,
    positives: Vec<(usize, usize)>,
    positive_fold: Vec<usize>,
    negatives: Vec<(usize, usize)>,
    negative_fold: Vec<usize>,
}

fn pick(pairs: &[(usize, usize)], folds: &[usize], keep: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .zip(folds)
        .filter(|(_, &f)| keep(f))
        .map(|(&p, _)| p)
        .collect()
}

impl FoldPlan {
    pub fn positives(&self) -> &[(usize, usize)] {
        &self.positives
    }

    pub fn negatives(&self) -> &[(usize, usize)] {
        &self.negatives
    }

    pub fn test_positives(&self, fold: usize) -> Vec<(usize, usize)> {
        pick(&self.positives, &self.positive_fold, |f| f == fold)
    }

    pub fn test_negatives(&self, fold: usize) -> Vec<(usize, usize)> {
        pick(&self.negatives, &self.negative_fold, |f| f == fold)
    }

    /// With k = 1 the single fold is both train and test.
    pub fn train_positives(&self, fold: usize) -> Vec<(usize, usize)> {
        if self.k == 1 {
            return self.positives.clone();
        }
        pick(&self.positives, &self.positive_fold, |f| f != fold)
    }

    pub fn train_negatives(&self, fold: usize) -> Vec<(usize, usize)> {
        if self.k == 1 {
            return self.negatives.clone();
        }
        pick(&self.negatives, &self.negative_fold, |f| f != fold)
    }

    /// Label and mask matrices (`N_drugs × N_diseases`) for training on a
    /// fold. Pairs in `excluded` are left out of the mask entirely.
    pub fn supervision(&self, fold: usize, excluded: &[(usize, usize)]) -> (Matrix, Matrix) {
        let excluded: BTreeSet<_> = excluded.iter().copied().collect();
        let mut labels = Matrix::zeros(self.n_drugs, self.n_diseases);
        let mut mask = Matrix::zeros(self.n_drugs, self.n_diseases);
        for (r, d) in self.train_positives(fold) {
            if !excluded.contains(&(r, d)) {
                labels.set(r, d, 1.0);
                mask.set(r, d, 1.0);
            }
        }
        for (r, d) in self.train_negatives(fold) {
            if !excluded.contains(&(r, d)) {
                mask.set(r, d, 1.0);
            }
        }
        (labels, mask)
    }
}

/// Shuffles the positives and deals them round-robin into `k` parts, so
/// part sizes differ by at most one. Negatives are dealt the same way.
pub fn make_folds(
    positives: &[(usize, usize)],
    n_drugs: usize,
    n_diseases: usize,
    k: usize,
    policy: NegativePolicy,
    seed: u64,
) -> Result<FoldPlan, HetnetError> {
    if k == 0 {
        return Err(HetnetError::InvalidParameter("k must be at least 1".into()));
    }
    let unique: BTreeSet<(usize, usize)> = positives.iter().copied().collect();
    if let Some(&(r, d)) = unique.iter().find(|&&(r, d)| r >= n_drugs || d >= n_diseases) {
        return Err(HetnetError::InvalidParameter(format!(
            "pair ({r}, {d}) outside {n_drugs}x{n_diseases}"
        )));
    }
    if unique.len() < k {
        return Err(HetnetError::TooFewPositives {
            needed: k,
            found: unique.len(),
        });
    }
    let sorted: Vec<_> = unique.iter().copied().collect();
    let positives = shuffled(&sorted, seed);
    let positive_fold = (0..positives.len()).map(|i| i % k).collect();

    let unknown: Vec<(usize, usize)> = (0..n_drugs)
        .flat_map(|r| (0..n_diseases).map(move |d| (r, d)))
        .filter(|p| !unique.contains(p))
        .collect();
    let mut negatives = shuffled(&unknown, seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    if let NegativePolicy::Sampled { ratio } = policy {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(HetnetError::InvalidParameter(format!(
                "negative ratio {ratio}"
            )));
        }
        let n = ((ratio * positives.len() as f64).round() as usize).min(negatives.len());
        negatives.truncate(n);
    }
    let negative_fold = (0..negatives.len()).map(|i| i % k).collect();
    Ok(FoldPlan {
        k,
        seed,
        n_drugs,
        n_diseases,
        policy,
        positives,
        positive_fold,
        negatives,
        negative_fold,
    })
}

/// Picks `round(ε · |pairs|)` pairs uniformly at random (half away from
/// zero), returned sorted.
pub fn ablate_pairs(
    pairs: &[(usize, usize)],
    epsilon: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>, HetnetError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(HetnetError::InvalidParameter(format!(
            "epsilon {epsilon} outside [0, 1]"
        )));
    }
    let n = (epsilon * pairs.len() as f64).round() as usize;
    let mut removed = shuffled(pairs, seed);
    removed.truncate(n);
    removed.sort_unstable();
    Ok(removed)
}

/// Drug-level partition for cold-start evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ColdStartSplit {
    /// Retained drugs with every relation among them.
    pub train: Dataset,
    /// Held-out drugs (SMILES only), the disease catalog and similarity;
    /// no relations.
    pub test: Dataset,
    /// Held-out drug–disease pairs, indexed into `test.drugs` and
    /// `test.diseases`.
    pub truth: Vec<(usize, usize)>,
    /// Original drug indices of `train.drugs` and `test.drugs`.
    pub train_drugs: Vec<usize>,
    pub test_drugs: Vec<usize>,
}

/// Splits drugs `ratio : 1 - ratio`; the test side gets
/// `round(n · (1 - ratio))` drugs chosen uniformly at random.
pub fn coldstart_split(
    dataset: &Dataset,
    ratio: f64,
    seed: u64,
) -> Result<ColdStartSplit, HetnetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(HetnetError::InvalidParameter(format!(
            "train ratio {ratio} outside (0, 1)"
        )));
    }
    let n = dataset.drugs.len();
    let n_test = (n as f64 * (1.0 - ratio)).round() as usize;
    let order: Vec<usize> = shuffled(&(0..n).collect::<Vec<_>>(), seed);
    let mut test_drugs = order[..n_test].to_vec();
    let mut train_drugs = order[n_test..].to_vec();
    test_drugs.sort_unstable();
    train_drugs.sort_unstable();

    let mut remap = vec![(false, 0usize); n];
    for (new, &old) in train_drugs.iter().enumerate() {
        remap[old] = (true, new);
    }
    for (new, &old) in test_drugs.iter().enumerate() {
        remap[old] = (false, new);
    }

    let mut train = Dataset {
        drugs: train_drugs.iter().map(|&i| dataset.drugs[i].clone()).collect(),
        proteins: dataset.proteins.clone(),
        genes: dataset.genes.clone(),
        pathways: dataset.pathways.clone(),
        diseases: dataset.diseases.clone(),
        disease_similarity: dataset.disease_similarity.clone(),
        ..Default::default()
    };
    let mut truth = Vec::new();
    for (&kind, edges) in &dataset.relations {
        let (sc, dc) = kind.endpoints();
        let mut kept = Vec::new();
        for e in edges {
            let mut e = *e;
            let mut keep = true;
            if sc == NodeClass::Drug {
                keep &= remap[e.src].0;
                e.src = remap[e.src].1;
            }
            if dc == NodeClass::Drug {
                keep &= remap[e.dst].0;
                e.dst = remap[e.dst].1;
            }
            if keep {
                kept.push(e);
            } else if kind == super::RelationKind::DrugDisease {
                truth.push((e.src, e.dst));
            }
        }
        train.relations.insert(kind, kept);
    }
    truth.sort_unstable();
    let test = Dataset {
        drugs: test_drugs.iter().map(|&i| dataset.drugs[i].clone()).collect(),
        diseases: dataset.diseases.clone(),
        disease_similarity: dataset.disease_similarity.clone(),
        ..Default::default()
    };
    Ok(ColdStartSplit {
        train,
        test,
        truth,
        train_drugs,
        test_drugs,
    })
}

impl ColdStartSplit {
    /// Truth pairs as weighted edges (weight 1).
    pub fn truth_edges(&self) -> Vec<Edge> {
        self.truth
            .iter()
            .map(|&(src, dst)| Edge {
                src,
                dst,
                weight: 1.0,
            })
            .collect()
    }
}
