//! Generated planted-structure dataset: drug families with distinct
//! scaffolds, disease blocks, and bridging proteins, genes and pathways.
//!
//! Family `f` is associated with disease block `f`; each in-block pair is
//! dropped with probability `noise`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hetnet::{Dataset, DiseaseEntry, DrugEntry, Edge, RelationKind};
use crate::numerics::Matrix;

/// Ring systems shared within a family. `{}` is where the substituent goes.
const SCAFFOLDS: [&str; 6] = [
    "c1ccc2ccccc2c1{}",
    "C1CCC(CC1)C(=O)N{}",
    "N#Cc1ccsc1{}",
    "O=C1NC(=O)NC(=O)C1{}",
    "OP(=O)(O)OC{}",
    "C1CC2CCC1CC2{}",
];

const SUBSTITUENTS: [&str; 12] = [
    "C", "CC", "CCC", "CO", "CN", "CCl", "CF", "CBr", "CS", "CC=C", "CCO", "CCN",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub families: usize,
    pub drugs_per_family: usize,
    pub diseases_per_block: usize,
    pub bridges: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            families: 4,
            drugs_per_family: 10,
            diseases_per_block: 5,
            bridges: 10,
            noise: 0.1,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    /// Family of drug `i`.
    pub fn family(&self, drug: usize) -> usize {
        drug / self.drugs_per_family
    }

    /// Block of disease `d`.
    pub fn block(&self, disease: usize) -> usize {
        disease / self.diseases_per_block
    }
}

/// Builds the dataset. Entity IDs are zero-padded so sorted order equals
/// generation order.
pub fn generate(config: &SyntheticConfig) -> Dataset {
    assert!(config.families >= 1 && config.families <= SCAFFOLDS.len());
    assert!(config.drugs_per_family >= 1 && config.diseases_per_block >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = config.families;
    let n_drugs = k * config.drugs_per_family;
    let n_diseases = k * config.diseases_per_block;

    let drugs: Vec<DrugEntry> = (0..n_drugs)
        .map(|i| {
            let f = config.family(i);
            let j = i % config.drugs_per_family;
            let mut sub = SUBSTITUENTS[j % SUBSTITUENTS.len()].to_string();
            for _ in 0..j / SUBSTITUENTS.len() {
                sub.push('C');
            }
            DrugEntry {
                id: format!("DR{i:04}"),
                smiles: SCAFFOLDS[f].replace("{}", &sub),
            }
        })
        .collect();
    let diseases: Vec<DiseaseEntry> = (0..n_diseases)
        .map(|d| DiseaseEntry {
            id: format!("DS{d:04}"),
            name: format!("disease {} of block {}", d % config.diseases_per_block, config.block(d)),
        })
        .collect();
    let bridge_ids = |prefix: &str| -> Vec<String> {
        (0..config.bridges).map(|i| format!("{prefix}{i:04}")).collect()
    };

    let mut relations: BTreeMap<RelationKind, Vec<Edge>> = BTreeMap::new();
    let edge = |src, dst| Edge {
        src,
        dst,
        weight: 1.0,
    };
    let mut assoc = Vec::new();
    for r in 0..n_drugs {
        for d in 0..n_diseases {
            if config.family(r) == config.block(d) && rng.random::<f64>() >= config.noise {
                assoc.push(edge(r, d));
            }
        }
    }
    relations.insert(RelationKind::DrugDisease, assoc);

    if config.bridges > 0 {
        // Bridge j serves block j mod k.
        let of_block = |b: usize| (0..config.bridges).filter(move |j| j % k == b);
        let mut dp = Vec::new();
        for r in 0..n_drugs {
            let own: Vec<usize> = of_block(config.family(r)).collect();
            if !own.is_empty() {
                dp.push(edge(r, own[rng.random_range(0..own.len())]));
            }
        }
        relations.insert(RelationKind::DrugProtein, dp);
        relations.insert(
            RelationKind::ProteinGene,
            (0..config.bridges).map(|j| edge(j, j)).collect(),
        );
        relations.insert(
            RelationKind::GenePathway,
            (0..config.bridges).map(|j| edge(j, j)).collect(),
        );
        let mut wd = Vec::new();
        for j in 0..config.bridges {
            for d in 0..n_diseases {
                if config.block(d) == j % k {
                    wd.push(edge(j, d));
                }
            }
        }
        relations.insert(RelationKind::PathwayDisease, wd);
    }

    let mut sim = Matrix::identity(n_diseases);
    for a in 0..n_diseases {
        for b in a + 1..n_diseases {
            let base = if config.block(a) == config.block(b) { 0.6 } else { 0.1 };
            let s: f64 = base + rng.random_range(-0.05..0.05);
            sim.set(a, b, s);
            sim.set(b, a, s);
        }
    }

    Dataset {
        drugs,
        proteins: bridge_ids("PR"),
        genes: bridge_ids("GE"),
        pathways: bridge_ids("PW"),
        diseases,
        relations,
        disease_similarity: Some(sim),
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn shape_and_parse() {
        let c = SyntheticConfig::default();
        let ds = generate(&c);
        assert_eq!(ds.drugs.len(), 40);
        assert_eq!(ds.diseases.len(), 20);
        assert_eq!(ds.proteins.len(), 10);
        for d in &ds.drugs {
            parse_smiles(&d.smiles).unwrap();
        }
        let n = ds.relation(RelationKind::DrugDisease).len();
        assert!(n > 150 && n < 200, "{n}");
        for e in ds.relation(RelationKind::DrugDisease) {
            assert_eq!(c.family(e.src), c.block(e.dst));
        }
        assert_eq!(generate(&c), ds);
    }
}
