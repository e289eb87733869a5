//! Structure-enhanced drug–disease association prediction.
//!
//! The pipeline parses drug SMILES into circular substructure identifiers,
//! learns substructure embeddings with skip-gram, encodes diseases with a
//! heterogeneous graph neural network over drugs, proteins, genes, pathways
//! and diseases, and scores every drug–disease pair as
//! `sigmoid(E_R · E_Dᵀ)`. New drugs are scored from structure alone by
//! weighting the learned association matrix with embedding similarity.

pub mod analysis;
pub mod chem;
pub mod coldstart;
pub mod embed;
pub mod evaluate;
pub mod hetnet;
pub mod model;
pub mod numerics;
pub mod pipeline;
pub mod synthetic;

use std::path::Path;

use thiserror::Error;

/// Any failure surfaced by the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Smiles(#[from] chem::SmilesError),
    #[error(transparent)]
    Embed(#[from] embed::EmbedError),
    #[error(transparent)]
    Hetnet(#[from] hetnet::HetnetError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Numeric(#[from] numerics::NumericError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// True for failures of the numeric core rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::Model(model::ModelError::Numeric(_))
        )
    }
}
