//! Byte-level goldens. Set `REPURPOSE_BLESS=1` to rewrite them.

mod common;

use std::fs;

use repurpose::coldstart::EmbeddingDatabase;
use repurpose_cli::api::{predict, PredictRequest};

use common::{build_db, bundled_db, bundled_db_path, data_dir, small_config, synthetic};

fn bless() -> bool {
    std::env::var_os("REPURPOSE_BLESS").is_some()
}

#[test]
fn bundled_database_is_reproducible() {
    let db = build_db(&synthetic(), &small_config());
    if bless() {
        db.save(&bundled_db_path()).unwrap();
    }
    let committed = fs::read_to_string(bundled_db_path()).unwrap();
    assert_eq!(db.to_json(), committed);
    assert_eq!(EmbeddingDatabase::from_json(&committed).unwrap(), db);
}

#[test]
fn quick_predict_matches_golden() {
    let db = bundled_db();
    let req = PredictRequest {
        smiles: "CC(=O)O".into(),
        prior: Vec::new(),
        top_k: None,
    };
    let csv = predict(&db, &req).unwrap().csv();
    let path = data_dir().join("quick_predict.csv");
    if bless() {
        fs::write(&path, &csv).unwrap();
    }
    assert_eq!(csv.as_bytes(), fs::read(&path).unwrap());
    assert_eq!(csv.lines().count(), db.n_diseases() + 1);
    assert!(!csv.contains('\r'));
}
