//! Fixtures shared by the benchmarks.

use repurpose::coldstart::EmbeddingDatabase;
use repurpose::model::{train, GraphTensors};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{prepare, PipelineConfig, Prepared};
use repurpose::synthetic::{generate, SyntheticConfig};

pub const MOLECULES: &[&str] = &[
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "O=C(O)c1ccccc1O",
    "CN1CCC[C@H]1c1cccnc1",
    "c1ccc2c(c1)ccc1ccccc12",
];

/// Synthetic dataset prepared with the default widths.
pub fn prepared(epochs: usize) -> (Prepared, PipelineConfig) {
    let mut c = PipelineConfig::default();
    c.model.epochs = epochs;
    let ds = generate(&SyntheticConfig::default());
    (prepare(&ds, &c, None).expect("synthetic data prepares"), c)
}

pub fn database(epochs: usize) -> EmbeddingDatabase {
    let (p, c) = prepared(epochs);
    let labels = p.dataset.association_matrix();
    let mask = Matrix::filled(labels.rows(), labels.cols(), 1.0);
    let out = train(&p.graph, &p.drug_vectors, &labels, &mask, &c.model).expect("training runs");
    let t = GraphTensors::new(&p.graph);
    EmbeddingDatabase::build(&out.state, &p.dataset, &t, &p.drug_vectors, &p.table, c.pooling).expect("database builds")
}
