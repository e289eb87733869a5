//! Request and response bodies shared by the `predict` command and the
//! HTTP service, so both produce the same numbers from the same code.

use serde::{Deserialize, Serialize};

use repurpose::chem::{parse_smiles, MolecularGraph, SmilesError};
use repurpose::coldstart::{recommend, ColdStartError, EmbeddingDatabase, RankedDisease};
use repurpose::hetnet::DiseaseEntry;
use repurpose::model::ModelConfig;
use repurpose::Error;

/// A prior entry: a bare disease ID (weight 1) or an ID with a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorEntry {
    Id(String),
    Weighted { id: String, weight: f64 },
}

impl PriorEntry {
    fn pair(&self) -> (&str, f64) {
        match self {
            PriorEntry::Id(id) => (id, 1.0),
            PriorEntry::Weighted { id, weight } => (id, *weight),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseRequest {
    pub smiles: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub smiles: String,
    #[serde(default)]
    pub prior: Vec<PriorEntry>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictRow {
    pub rank: usize,
    pub disease_id: String,
    pub disease_name: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub smiles: String,
    pub ranking: Vec<PredictRow>,
    pub tokens: usize,
    pub unknown_tokens: usize,
}

impl PredictResponse {
    pub fn ranked(&self) -> Vec<RankedDisease> {
        self.ranking
            .iter()
            .map(|r| RankedDisease {
                rank: r.rank,
                index: r.rank - 1,
                id: r.disease_id.clone(),
                name: r.disease_name.clone(),
                score: r.score,
            })
            .collect()
    }

    pub fn csv(&self) -> String {
        repurpose::coldstart::quick_predict_csv(&self.ranked())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub format: String,
    pub version: u32,
    pub provenance: String,
    pub drugs: usize,
    pub diseases: usize,
    pub embedding_dim: usize,
    pub model: ModelConfig,
}

impl ModelInfo {
    pub fn of(db: &EmbeddingDatabase) -> Self {
        Self {
            format: db.format.clone(),
            version: db.version,
            provenance: db.provenance.clone(),
            drugs: db.n_drugs(),
            diseases: db.n_diseases(),
            embedding_dim: db.drug_embeddings.cols(),
            model: db.model.clone(),
        }
    }
}

/// Structured failure; `status` is the HTTP status the service uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl ApiError {
    pub fn bad_request(error: &str, message: impl Into<String>) -> Self {
        Self {
            status: 400,
            error: error.to_string(),
            message: message.into(),
            offset: None,
        }
    }

    fn smiles(e: &SmilesError) -> Self {
        Self {
            status: 400,
            error: e.kind().to_string(),
            message: e.to_string(),
            offset: e.offset(),
        }
    }
}

pub fn parse(smiles: &str) -> Result<MolecularGraph, ApiError> {
    parse_smiles(smiles).map_err(|e| ApiError::smiles(&e))
}

pub fn diseases(db: &EmbeddingDatabase) -> &[DiseaseEntry] {
    &db.diseases
}

pub fn predict(db: &EmbeddingDatabase, req: &PredictRequest) -> Result<PredictResponse, ApiError> {
    let pairs: Vec<(&str, f64)> = req.prior.iter().map(PriorEntry::pair).collect();
    if let Some((id, w)) = pairs.iter().find(|(_, w)| !w.is_finite()) {
        return Err(ApiError::bad_request("InvalidPrior", format!("prior weight {w} for `{id}` is not finite")));
    }
    let prior = db.prior_from_weights(&pairs).map_err(|e| match e {
        ColdStartError::UnknownDisease(id) => ApiError {
            status: 422,
            error: "UnknownDisease".into(),
            message: format!("unknown disease `{id}`"),
            offset: None,
        },
        other => ApiError::bad_request("InvalidPrior", other.to_string()),
    })?;
    let result = recommend(&req.smiles, Some(&prior), db, req.top_k).map_err(|e| match &e {
        Error::Smiles(s) => ApiError::smiles(s),
        _ => ApiError {
            status: 500,
            error: "PredictionFailed".into(),
            message: e.to_string(),
            offset: None,
        },
    })?;
    Ok(PredictResponse {
        smiles: req.smiles.clone(),
        ranking: result
            .ranking
            .into_iter()
            .map(|r| PredictRow {
                rank: r.rank,
                disease_id: r.id,
                disease_name: r.name,
                score: r.score,
            })
            .collect(),
        tokens: result.tokens,
        unknown_tokens: result.unknown_tokens,
    })
}
