//! Scoring drugs that were never part of the graph.
//!
//! A query molecule is embedded with the drug MLP alone. Its similarity to
//! each known drug `i` is `ρ[i] = 1 / (‖E_α − E_R[i]‖ + δ)`, the raw disease
//! scores are `ρ · Â + prior`, and the result is min-max normalized.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chem::{morgan_sentence, parse_smiles, SmilesError};
use crate::embed::{molecule_vector, EmbeddingTable, Pooling};
use crate::evaluate::{metrics_report, MetricsReport};
use crate::hetnet::{coldstart_split, Dataset, DiseaseEntry};
use crate::model::{drug_mlp, score_matrix, train, GraphTensors, ModelConfig, ModelState};
use crate::numerics::{Matrix, ParamSet};
use crate::pipeline::{prepare, PipelineConfig};
use crate::Error;

/// Zero-distance guard in the similarity weights.
pub const DISTANCE_GUARD: f64 = 1e-8;

/// Score above which a disease is reported as a likely indication.
pub const DEFAULT_THRESHOLD: f64 = 0.24;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ColdStartError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error("unknown disease `{0}`")]
    UnknownDisease(String),
    #[error("{what}: expected length {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("corrupt database: {0}")]
    CorruptDatabase(String),
}

/// Everything needed to answer queries without the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDatabase {
    pub format: String,
    pub version: u32,
    pub drug_ids: Vec<String>,
    /// `E_R`, one row per drug.
    pub drug_embeddings: Matrix,
    /// `Â`, drugs × diseases.
    pub scores: Matrix,
    pub diseases: Vec<DiseaseEntry>,
    /// Hash of the training dataset.
    pub provenance: String,
    pub model: ModelConfig,
    /// Drug MLP parameters by name.
    pub mlp: Vec<(String, Matrix)>,
    pub pooling: Pooling,
    /// Substructure embedding table in its text format.
    pub embedding_table: String,
    #[serde(skip)]
    table: Option<EmbeddingTable>,
}

impl EmbeddingDatabase {
    pub const FORMAT: &'static str = "repurpose-embedding-db";
    pub const VERSION: u32 = 1;

    /// Inference-mode embeddings and scores of a trained state.
    pub fn build(
        state: &ModelState,
        dataset: &Dataset,
        tensors: &GraphTensors,
        drug_vectors: &Matrix,
        table: &EmbeddingTable,
        pooling: Pooling,
    ) -> Result<Self, Error> {
        let emb = state.embeddings(tensors, drug_vectors)?;
        let scores = score_matrix(&emb.drugs, &emb.diseases)?;
        let mlp = state
            .params
            .iter()
            .filter(|(n, _)| n.starts_with("mlp"))
            .map(|(n, m)| (n.to_string(), m.clone()))
            .collect();
        Ok(Self {
            format: Self::FORMAT.into(),
            version: Self::VERSION,
            drug_ids: dataset.drugs.iter().map(|d| d.id.clone()).collect(),
            drug_embeddings: emb.drugs,
            scores,
            diseases: dataset.diseases.clone(),
            provenance: dataset.content_hash(),
            model: state.config.clone(),
            mlp,
            pooling,
            embedding_table: table.to_text(),
            table: Some(table.clone()),
        })
    }

    fn validate(mut self) -> Result<Self, ColdStartError> {
        let corrupt = |m: String| Err(ColdStartError::CorruptDatabase(m));
        if self.format != Self::FORMAT || self.version != Self::VERSION {
            return corrupt(format!("unsupported format {} v{}", self.format, self.version));
        }
        for m in [&self.drug_embeddings, &self.scores] {
            if m.as_slice().len() != m.rows() * m.cols() {
                return corrupt("matrix data does not match its shape".into());
            }
        }
        for (_, m) in &self.mlp {
            if m.as_slice().len() != m.rows() * m.cols() {
                return corrupt("matrix data does not match its shape".into());
            }
        }
        if self.drug_embeddings.rows() != self.drug_ids.len()
            || self.scores.rows() != self.drug_ids.len()
            || self.scores.cols() != self.diseases.len()
        {
            return corrupt("row counts disagree with the ID lists".into());
        }
        let table = EmbeddingTable::from_text(&self.embedding_table)
            .map_err(|e| ColdStartError::CorruptDatabase(e.to_string()))?;
        self.table = Some(table);
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable database") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, ColdStartError> {
        let db: Self = serde_json::from_str(text).map_err(|e| ColdStartError::CorruptDatabase(e.to_string()))?;
        db.validate()
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn table(&self) -> &EmbeddingTable {
        self.table.as_ref().expect("table parsed at construction")
    }

    pub fn n_drugs(&self) -> usize {
        self.drug_ids.len()
    }

    pub fn n_diseases(&self) -> usize {
        self.diseases.len()
    }

    /// Indicator prior over the catalog for the given disease IDs.
    pub fn prior_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<f64>, ColdStartError> {
        let weighted: Vec<(&str, f64)> = ids.iter().map(|id| (id.as_ref(), 1.0)).collect();
        self.prior_from_weights(&weighted)
    }

    /// Prior with the given value per disease ID; unlisted diseases get 0.
    pub fn prior_from_weights<S: AsRef<str>>(&self, entries: &[(S, f64)]) -> Result<Vec<f64>, ColdStartError> {
        let mut prior = vec![0.0; self.diseases.len()];
        for (id, w) in entries {
            let id = id.as_ref();
            let idx = self
                .diseases
                .iter()
                .position(|d| d.id == id)
                .ok_or_else(|| ColdStartError::UnknownDisease(id.to_string()))?;
            prior[idx] = *w;
        }
        Ok(prior)
    }
}

/// Query embedding and how many of its substructures were unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryEmbedding {
    pub values: Vec<f64>,
    pub tokens: usize,
    pub unknown: usize,
}

pub fn embed_query(smiles: &str, db: &EmbeddingDatabase) -> Result<QueryEmbedding, Error> {
    let mol = parse_smiles(smiles)?;
    let v = molecule_vector(&morgan_sentence(&mol), db.table(), db.pooling)?;
    let params = db.mlp.iter().fold(ParamSet::new(), |mut p, (n, m)| {
        p.insert(n.clone(), m.clone());
        p
    });
    let e = drug_mlp(&params, &db.model, &Matrix::row_vector(&v.values))?;
    Ok(QueryEmbedding {
        values: e.into_vec(),
        tokens: v.tokens,
        unknown: v.unknown,
    })
}

/// `ρ[i] = 1 / (‖query − E_R[i]‖ + δ)`.
pub fn similarity(query: &[f64], drugs: &Matrix) -> Result<Vec<f64>, ColdStartError> {
    if query.len() != drugs.cols() {
        return Err(ColdStartError::ShapeMismatch {
            what: "query embedding",
            expected: drugs.cols(),
            found: query.len(),
        });
    }
    Ok(drugs
        .iter_rows()
        .map(|row| {
            let d2: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            1.0 / (d2.sqrt() + DISTANCE_GUARD)
        })
        .collect())
}

/// `raw[d] = Σ_i ρ[i] · Â[i, d] + prior[d]`.
pub fn combine(rho: &[f64], scores: &Matrix, prior: &[f64]) -> Result<Vec<f64>, ColdStartError> {
    if rho.len() != scores.rows() {
        return Err(ColdStartError::ShapeMismatch {
            what: "similarity vector",
            expected: scores.rows(),
            found: rho.len(),
        });
    }
    if prior.len() != scores.cols() {
        return Err(ColdStartError::ShapeMismatch {
            what: "prior",
            expected: scores.cols(),
            found: prior.len(),
        });
    }
    let mut raw = prior.to_vec();
    for (&r, row) in rho.iter().zip(scores.iter_rows()) {
        for (o, &a) in raw.iter_mut().zip(row) {
            *o += r * a;
        }
    }
    Ok(raw)
}

/// Min-max scaling to `[0, 1]`; a constant vector maps to all `0.5`.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return vec![0.5; raw.len()];
    }
    raw.iter().map(|&x| ((x - min) / (max - min)).clamp(0.0, 1.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedDisease {
    pub rank: usize,
    pub index: usize,
    pub id: String,
    pub name: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdStartResult {
    pub embedding: Vec<f64>,
    pub rho: Vec<f64>,
    pub raw: Vec<f64>,
    /// Normalized score per catalog disease, in catalog order.
    pub scores: Vec<f64>,
    pub ranking: Vec<RankedDisease>,
    pub tokens: usize,
    pub unknown_tokens: usize,
}

/// Scores every catalog disease for a new drug. The ranking is descending
/// by score with ties broken by disease ID, truncated to `top_k` if given.
pub fn recommend(
    smiles: &str,
    prior: Option<&[f64]>,
    db: &EmbeddingDatabase,
    top_k: Option<usize>,
) -> Result<ColdStartResult, Error> {
    let q = embed_query(smiles, db)?;
    let zeros = vec![0.0; db.n_diseases()];
    let prior = prior.unwrap_or(&zeros);
    let rho = similarity(&q.values, &db.drug_embeddings).map_err(invalid)?;
    let raw = combine(&rho, &db.scores, prior).map_err(invalid)?;
    let scores = normalize(&raw);
    let ranking = rank(&scores, &db.diseases, top_k);
    Ok(ColdStartResult {
        embedding: q.values,
        rho,
        raw,
        scores,
        ranking,
        tokens: q.tokens,
        unknown_tokens: q.unknown,
    })
}

fn invalid(e: ColdStartError) -> Error {
    Error::Invalid(e.to_string())
}

pub fn rank(scores: &[f64], diseases: &[DiseaseEntry], top_k: Option<usize>) -> Vec<RankedDisease> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| diseases[a].id.cmp(&diseases[b].id))
    });
    order.truncate(top_k.unwrap_or(order.len()));
    order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| RankedDisease {
            rank: rank + 1,
            index: i,
            id: diseases[i].id.clone(),
            name: diseases[i].name.clone(),
            score: scores[i],
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `disease_id,disease_name,score` rows in ranking order, six decimals, LF
/// line endings.
pub fn quick_predict_csv(ranking: &[RankedDisease]) -> String {
    let mut out = String::from("disease_id,disease_name,score\n");
    for r in ranking {
        let _ = writeln!(out, "{},{},{:.6}", csv_field(&r.id), csv_field(&r.name), r.score);
    }
    out
}

pub fn write_quick_predict(ranking: &[RankedDisease], path: &Path) -> Result<(), Error> {
    std::fs::write(path, quick_predict_csv(ranking)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdStartReport {
    pub report: MetricsReport,
    pub test_drugs: usize,
    pub truth_pairs: usize,
}

/// Recommends for every held-out drug with a zero prior and scores the
/// normalized values against the held-out associations at `threshold`.
/// `test` must share the database's disease catalog.
pub fn evaluate_coldstart(
    db: &EmbeddingDatabase,
    test: &Dataset,
    truth: &[(usize, usize)],
    threshold: f64,
) -> Result<(ColdStartReport, Matrix), Error> {
    if test.diseases != db.diseases {
        return Err(Error::Invalid("test set and database disease catalogs differ".into()));
    }
    let n_d = db.n_diseases();
    let mut predicted = Matrix::zeros(test.drugs.len(), n_d);
    for (i, drug) in test.drugs.iter().enumerate() {
        let r = recommend(&drug.smiles, None, db, None)?;
        predicted.row_mut(i).copy_from_slice(&r.scores);
    }
    let mut labels = vec![false; test.drugs.len() * n_d];
    for &(r, d) in truth {
        labels[r * n_d + d] = true;
    }
    let report = metrics_report(predicted.as_slice(), &labels, threshold)
        .map_err(|e| Error::Invalid(format!("cold-start evaluation: {e}")))?;
    Ok((
        ColdStartReport {
            report,
            test_drugs: test.drugs.len(),
            truth_pairs: truth.len(),
        },
        predicted,
    ))
}

/// Artifacts of a full cold-start experiment.
#[derive(Clone, Debug)]
pub struct ColdStartRun {
    pub split: crate::hetnet::ColdStartSplit,
    pub db: EmbeddingDatabase,
    pub report: ColdStartReport,
    /// Normalized scores, test drugs × diseases.
    pub predicted: Matrix,
    pub losses: Vec<f64>,
}

/// Splits drugs `ratio : 1 − ratio`, trains on the retained side with every
/// pair supervised (embeddings and similarities from retained drugs only),
/// then evaluates the held-out drugs.
pub fn run_coldstart(
    dataset: &Dataset,
    config: &PipelineConfig,
    ratio: f64,
    seed: u64,
    threshold: f64,
) -> Result<ColdStartRun, Error> {
    let split = coldstart_split(dataset, ratio, seed)?;
    let prepared = prepare(&split.train, config, None)?;
    let labels = prepared.dataset.association_matrix();
    let mask = Matrix::filled(labels.rows(), labels.cols(), 1.0);
    let outcome = train(&prepared.graph, &prepared.drug_vectors, &labels, &mask, &config.model)?;
    let tensors = GraphTensors::new(&prepared.graph);
    let db = EmbeddingDatabase::build(
        &outcome.state,
        &prepared.dataset,
        &tensors,
        &prepared.drug_vectors,
        &prepared.table,
        config.pooling,
    )?;
    let (report, predicted) = evaluate_coldstart(&db, &split.test, &split.truth, threshold)?;
    Ok(ColdStartRun {
        split,
        db,
        report,
        predicted,
        losses: outcome.losses,
    })
}
