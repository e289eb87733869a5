mod common;

use std::fs;
use std::path::Path;

use repurpose::hetnet::{
    build_graph, coldstart_split, drug_fingerprints, Dataset, GraphConfig, HetnetError, NodeClass,
    RelationKind,
};
use repurpose::synthetic::{generate, SyntheticConfig};

use common::micro_dataset;

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn small_manifest(dir: &Path) -> std::path::PathBuf {
    write(
        dir,
        "manifest.toml",
        r#"
[entities]
drugs = "drugs.tsv"
diseases = "diseases.tsv"
proteins = "proteins.tsv"

[relations]
drug_disease = "rd.tsv"
drug_protein = "rp.tsv"

[similarity]
disease = "dsim.tsv"
"#,
    );
    write(dir, "drugs.tsv", "# id\tsmiles\nDB2\tCCO\nDB1\tc1ccccc1\nDB2\tCCN\n");
    write(dir, "diseases.tsv", "S1\tflu, seasonal\nS0\n");
    write(dir, "proteins.tsv", "P0\n");
    write(dir, "rd.tsv", "DB2\tS1\nDB1\tS0\t0.5\nDB2\tS1\n");
    write(dir, "rp.tsv", "DB1\tP0\n");
    write(dir, "dsim.tsv", "S1\tS0\t0.25\n");
    dir.join("manifest.toml")
}

#[test]
fn loads_in_file_order_with_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let ds = Dataset::from_manifest_path(&small_manifest(dir.path())).unwrap();
    assert_eq!(ds.ids(NodeClass::Drug), ["DB2", "DB1"]);
    assert_eq!(ds.drugs[0].smiles, "CCO");
    assert_eq!(ds.diseases[0].name, "flu, seasonal");
    assert_eq!(ds.diseases[1].name, "S0");
    assert_eq!(ds.drug_disease_pairs(), vec![(0, 0), (1, 1)]);
    assert_eq!(ds.relation(RelationKind::DrugDisease)[1].weight, 0.5);
    assert_eq!(ds.warnings.len(), 2);
    let sim = ds.disease_similarity.as_ref().unwrap();
    assert_eq!(sim.get(0, 1), 0.25);
    assert_eq!(sim.get(1, 0), 0.25);
    assert_eq!(sim.get(0, 0), 1.0);
}

#[test]
fn errors_carry_locations() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path());
    write(dir.path(), "rd.tsv", "DB2\tS1\nDB9\tS0\n");
    match Dataset::from_manifest_path(&m) {
        Err(HetnetError::UnknownEntity { line, class, id, .. }) => {
            assert_eq!((line, class, id.as_str()), (2, NodeClass::Drug, "DB9"));
        }
        other => panic!("{other:?}"),
    }
    write(dir.path(), "rd.tsv", "DB2\tS1\tabc\n");
    assert!(matches!(
        Dataset::from_manifest_path(&m),
        Err(HetnetError::MalformedLine { line: 1, .. })
    ));
    write(dir.path(), "rd.tsv", "DB2\n");
    assert!(matches!(
        Dataset::from_manifest_path(&m),
        Err(HetnetError::MalformedLine { .. })
    ));
    write(dir.path(), "drugs.tsv", "DB1\n");
    assert!(matches!(
        Dataset::from_manifest_path(&m),
        Err(HetnetError::MalformedLine { line: 1, .. })
    ));
    fs::remove_file(dir.path().join("drugs.tsv")).unwrap();
    assert!(matches!(Dataset::from_manifest_path(&m), Err(HetnetError::Io { .. })));
    write(dir.path(), "manifest.toml", "[entities]\n");
    assert!(matches!(Dataset::from_manifest_path(&m), Err(HetnetError::Manifest(_))));
}

#[test]
fn dense_similarity_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path());
    write(dir.path(), "dsim.tsv", "\tS0\tS1\nS0\t1\t0.4\nS1\t0.4\t1\n");
    let ds = Dataset::from_manifest_path(&m).unwrap();
    let sim = ds.disease_similarity.unwrap();
    assert_eq!(sim.get(0, 1), 0.4);
    assert_eq!(sim.get(1, 1), 1.0);
    write(dir.path(), "dsim.tsv", "\tS0\tS1\nS0\t1\n");
    assert!(Dataset::from_manifest_path(&m).is_err());
}

#[test]
fn write_and_reload_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for ds in [micro_dataset(), generate(&SyntheticConfig::default())] {
        let path = ds.write_dir(dir.path()).unwrap();
        let back = Dataset::from_manifest_path(&path).unwrap();
        assert_eq!(back.drugs, ds.drugs);
        assert_eq!(back.diseases, ds.diseases);
        assert_eq!(back.relations, ds.relations);
        assert_eq!(back.disease_similarity, ds.disease_similarity);
        assert_eq!(back.content_hash(), ds.content_hash());
    }
}

#[test]
fn content_hash_tracks_content() {
    let a = micro_dataset();
    let mut b = micro_dataset();
    assert_eq!(a.content_hash(), b.content_hash());
    assert_eq!(a.content_hash().len(), 64);
    b.drugs[0].smiles = "CCCO".into();
    assert_ne!(a.content_hash(), b.content_hash());
}

#[test]
fn micro_graph_is_small() {
    let ds = micro_dataset();
    let edges: usize = ds.relations.values().map(Vec::len).sum();
    assert!(edges <= 20);
    let fps = drug_fingerprints(&ds).unwrap();
    let g = build_graph(&ds, &fps, &GraphConfig::default()).unwrap();
    assert_eq!(g.num_nodes(), 16);
    assert_eq!(g.feature_width(), 9);
}

#[test]
fn synthetic_generator_shape() {
    let cfg = SyntheticConfig::default();
    let ds = generate(&cfg);
    assert_eq!(ds.drugs.len(), 40);
    assert_eq!(ds.diseases.len(), 20);
    for c in [NodeClass::Protein, NodeClass::Gene, NodeClass::Pathway] {
        assert_eq!(ds.count(c), 10);
    }
    // block-diagonal truth with a few dropped pairs
    let pairs = ds.drug_disease_pairs();
    assert!(pairs.iter().all(|&(r, d)| cfg.family(r) == cfg.block(d)));
    assert!(pairs.len() > 150 && pairs.len() < 200, "{}", pairs.len());
    assert_eq!(generate(&cfg).content_hash(), ds.content_hash());
    let other = generate(&SyntheticConfig { seed: 8, ..cfg });
    assert_ne!(other.content_hash(), ds.content_hash());
}

#[test]
fn coldstart_split_keeps_test_drugs_out() {
    let ds = generate(&SyntheticConfig::default());
    let s = coldstart_split(&ds, 0.9, 5).unwrap();
    assert_eq!(s.test.drugs.len(), 4);
    assert_eq!(s.train.drugs.len(), 36);
    let test_ids: Vec<&str> = s.test.drugs.iter().map(|d| d.id.as_str()).collect();
    assert!(s.train.drugs.iter().all(|d| !test_ids.contains(&d.id.as_str())));
    assert!(s.test.relations.values().all(Vec::is_empty));
    let held: usize = ds
        .drug_disease_pairs()
        .iter()
        .filter(|&&(r, _)| s.test_drugs.contains(&r))
        .count();
    assert_eq!(s.truth.len(), held);
    assert_eq!(
        s.train.drug_disease_pairs().len() + held,
        ds.drug_disease_pairs().len()
    );
    assert!(coldstart_split(&ds, 1.0, 5).is_err());
}
