//! Glue from a loaded dataset to model inputs, and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chem::{morgan_sentence, parse_smiles, Fingerprint, MolSentence};
use crate::embed::{build_corpus, molecule_vector, train_skipgram, EmbeddingTable, Pooling, SkipGramConfig};
use crate::hetnet::{build_graph, Dataset, GraphConfig, HeteroGraph, HetnetError};
use crate::model::ModelConfig;
use crate::numerics::Matrix;
use crate::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub graph: GraphConfig,
    pub skipgram: SkipGramConfig,
    pub pooling: Pooling,
    pub model: ModelConfig,
}

/// Everything derived from a dataset before training.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub sentences: Vec<MolSentence>,
    pub fingerprints: Vec<Fingerprint>,
    pub table: EmbeddingTable,
    /// `N_drugs × dim` pooled substructure vectors.
    pub drug_vectors: Matrix,
    pub graph: HeteroGraph,
}

/// Substructure sentences of every drug, in dataset order.
pub fn drug_sentences(dataset: &Dataset) -> Result<Vec<MolSentence>, HetnetError> {
    dataset
        .drugs
        .iter()
        .map(|d| {
            parse_smiles(&d.smiles)
                .map(|m| morgan_sentence(&m))
                .map_err(|source| HetnetError::Smiles {
                    id: d.id.clone(),
                    source,
                })
        })
        .collect()
}

pub fn train_embeddings(sentences: &[MolSentence], config: &SkipGramConfig) -> Result<EmbeddingTable, Error> {
    let corpus = build_corpus(sentences, config.min_count)?;
    Ok(train_skipgram(&corpus, config))
}

pub fn drug_vector_matrix(
    sentences: &[MolSentence],
    table: &EmbeddingTable,
    pooling: Pooling,
) -> Result<Matrix, Error> {
    let mut m = Matrix::zeros(sentences.len(), table.dim());
    for (i, s) in sentences.iter().enumerate() {
        let v = molecule_vector(s, table, pooling)?;
        m.row_mut(i).copy_from_slice(&v.values);
    }
    Ok(m)
}

/// Parses every drug, trains (or reuses) the substructure embeddings on the
/// full drug corpus and builds the graph.
pub fn prepare(
    dataset: &Dataset,
    config: &PipelineConfig,
    table: Option<EmbeddingTable>,
) -> Result<Prepared, Error> {
    let sentences = drug_sentences(dataset)?;
    let fingerprints: Vec<Fingerprint> = sentences.iter().map(|s| s.hashes().collect()).collect();
    let table = match table {
        Some(t) => t,
        None => train_embeddings(&sentences, &config.skipgram)?,
    };
    if table.dim() != config.model.drug_dim {
        return Err(Error::Invalid(format!(
            "embedding dimension {} does not match model drug_dim {}",
            table.dim(),
            config.model.drug_dim
        )));
    }
    let drug_vectors = drug_vector_matrix(&sentences, &table, config.pooling)?;
    let graph = build_graph(dataset, &fingerprints, &config.graph)?;
    Ok(Prepared {
        dataset: dataset.clone(),
        sentences,
        fingerprints,
        table,
        drug_vectors,
        graph,
    })
}

/// Provenance written next to every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub dataset_hash: String,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "run_manifest.json";

    pub fn new(command: &str, seed: u64, dataset_hash: &str, config: &impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            dataset_hash: dataset_hash.to_string(),
            config: serde_json::to_value(config).expect("serializable config"),
            created_at: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, Error> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(Self::FILE_NAME);
        let text = serde_json::to_string_pretty(self).expect("serializable manifest");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self, Error> {
        let path = dir.join(Self::FILE_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }
}
