//! Heterogeneous drug/protein/gene/pathway/disease network: dataset
//! ingestion, graph construction with similarity-initialized node features,
//! cross-validation folds, sparsity ablation and cold-start splits.

mod dataset;
mod folds;
mod graph;

pub use dataset::{Dataset, DatasetManifest, DiseaseEntry, DrugEntry, EntityFiles, SimilarityFiles};
pub use folds::{
    ablate_pairs, coldstart_split, make_folds, ColdStartSplit, FoldPlan, NegativePolicy,
};
pub use graph::{ablate_edges, build_graph, drug_fingerprints, GraphConfig, HeteroGraph};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::SmilesError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Drug,
    Protein,
    Gene,
    Pathway,
    Disease,
}

impl NodeClass {
    /// Node order in the global index space.
    pub const ALL: [NodeClass; 5] = [
        NodeClass::Drug,
        NodeClass::Protein,
        NodeClass::Gene,
        NodeClass::Pathway,
        NodeClass::Disease,
    ];

    pub fn position(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    DrugDrug,
    DrugProtein,
    ProteinGene,
    GenePathway,
    PathwayDisease,
    DiseaseDisease,
    DrugDisease,
    DiseaseProtein,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::DrugDrug,
        RelationKind::DrugProtein,
        RelationKind::ProteinGene,
        RelationKind::GenePathway,
        RelationKind::PathwayDisease,
        RelationKind::DiseaseDisease,
        RelationKind::DrugDisease,
        RelationKind::DiseaseProtein,
    ];

    /// `(source class, destination class)`.
    pub fn endpoints(self) -> (NodeClass, NodeClass) {
        use NodeClass::*;
        match self {
            RelationKind::DrugDrug => (Drug, Drug),
            RelationKind::DrugProtein => (Drug, Protein),
            RelationKind::ProteinGene => (Protein, Gene),
            RelationKind::GenePathway => (Gene, Pathway),
            RelationKind::PathwayDisease => (Pathway, Disease),
            RelationKind::DiseaseDisease => (Disease, Disease),
            RelationKind::DrugDisease => (Drug, Disease),
            RelationKind::DiseaseProtein => (Disease, Protein),
        }
    }

    /// Manifest key and file stem.
    pub fn key(self) -> &'static str {
        match self {
            RelationKind::DrugDrug => "drug_drug",
            RelationKind::DrugProtein => "drug_protein",
            RelationKind::ProteinGene => "protein_gene",
            RelationKind::GenePathway => "gene_pathway",
            RelationKind::PathwayDisease => "pathway_disease",
            RelationKind::DiseaseDisease => "disease_disease",
            RelationKind::DrugDisease => "drug_disease",
            RelationKind::DiseaseProtein => "disease_protein",
        }
    }

    pub fn is_symmetric(self) -> bool {
        let (a, b) = self.endpoints();
        a == b
    }
}

/// Edge between class-local indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HetnetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{file}:{line}: unknown {class:?} `{id}`")]
    UnknownEntity {
        file: String,
        line: usize,
        class: NodeClass,
        id: String,
    },
    #[error("{file}:{line}:{column}: {reason}")]
    MalformedLine {
        file: String,
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("drug `{id}` has an unparseable SMILES: {source}")]
    Smiles { id: String, source: SmilesError },
    #[error("no disease similarity matrix supplied")]
    MissingSimilarityFile,
    #[error("need at least {needed} positive pairs, found {found}")]
    TooFewPositives { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
