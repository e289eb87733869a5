#![allow(dead_code)]

use std::path::{Path, PathBuf};

use repurpose::coldstart::EmbeddingDatabase;
use repurpose::hetnet::Dataset;
use repurpose::model::{train, GraphTensors};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{prepare, PipelineConfig};
use repurpose::synthetic::{generate, SyntheticConfig};

/// Small widths and few epochs; enough for plumbing tests.
pub fn small_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.skipgram.dim = 16;
    c.skipgram.min_count = 1;
    c.skipgram.epochs = 5;
    c.model.drug_dim = 16;
    c.model.hidden_dim = 16;
    c.model.embed_dim = 16;
    c.model.epochs = 60;
    c.model.seed = 1;
    c
}

pub const SMALL_CONFIG_TOML: &str = "\
[skipgram]
dim = 16
min_count = 1
epochs = 5

[model]
drug_dim = 16
hidden_dim = 16
embed_dim = 16
epochs = 60
seed = 1
";

pub fn synthetic() -> Dataset {
    generate(&SyntheticConfig::default())
}

/// Trains on every association of `ds` and returns the database.
pub fn build_db(ds: &Dataset, c: &PipelineConfig) -> EmbeddingDatabase {
    let p = prepare(ds, c, None).unwrap();
    let labels = p.dataset.association_matrix();
    let mask = Matrix::filled(labels.rows(), labels.cols(), 1.0);
    let out = train(&p.graph, &p.drug_vectors, &labels, &mask, &c.model).unwrap();
    let t = GraphTensors::new(&p.graph);
    EmbeddingDatabase::build(&out.state, &p.dataset, &t, &p.drug_vectors, &p.table, c.pooling).unwrap()
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

/// The committed database the golden files were produced from.
pub fn bundled_db_path() -> PathBuf {
    data_dir().join("synthetic_db.json")
}

pub fn bundled_db() -> EmbeddingDatabase {
    EmbeddingDatabase::load(&bundled_db_path()).unwrap()
}
