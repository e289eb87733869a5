//! Dataset manifests and the TSV files they reference.
//!
//! A manifest is a TOML file; paths are relative to the manifest's directory.
//!
//! ```toml
//! [entities]
//! drugs = "drugs.tsv"          # id<TAB>smiles
//! diseases = "diseases.tsv"    # id[<TAB>name]
//! proteins = "proteins.tsv"    # id[<TAB>name]   (optional)
//! genes = "genes.tsv"          # optional
//! pathways = "pathways.tsv"    # optional
//!
//! [relations]                  # src_id<TAB>dst_id[<TAB>weight], all optional
//! drug_drug = "r_rr.tsv"
//! drug_protein = "r_rp.tsv"
//! protein_gene = "r_pg.tsv"
//! gene_pathway = "r_gw.tsv"
//! pathway_disease = "r_wd.tsv"
//! disease_disease = "r_dd.tsv"
//! drug_disease = "r_rd.tsv"
//! disease_protein = "r_dp.tsv"
//!
//! [similarity]
//! disease = "disease_similarity.tsv"
//! ```
//!
//! The disease similarity file holds either `id<TAB>id<TAB>value` triples
//! (symmetric, unspecified diagonal entries default to 1) or a dense matrix
//! whose first line is a tab-prefixed header of disease IDs followed by one
//! `id<TAB>v1<TAB>...` row per disease.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Edge, HetnetError, NodeClass, RelationKind};
use crate::numerics::Matrix;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityFiles {
    pub drugs: String,
    pub diseases: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proteins: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathways: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityFiles {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disease: Option<String>,
}

/// Parsed manifest file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entities: EntityFiles,
    #[serde(default)]
    pub relations: BTreeMap<RelationKind, String>,
    #[serde(default)]
    pub similarity: SimilarityFiles,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn from_path(path: &Path) -> Result<Self, HetnetError> {
        let text = read(path)?;
        let mut manifest: DatasetManifest =
            toml::from_str(&text).map_err(|e| HetnetError::Manifest(e.to_string()))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        self.base_dir.join(rel)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrugEntry {
    pub id: String,
    pub smiles: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiseaseEntry {
    pub id: String,
    pub name: String,
}

/// Entities (sorted by ID within each class) and index-based relations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub drugs: Vec<DrugEntry>,
    pub proteins: Vec<String>,
    pub genes: Vec<String>,
    pub pathways: Vec<String>,
    pub diseases: Vec<DiseaseEntry>,
    pub relations: BTreeMap<RelationKind, Vec<Edge>>,
    pub disease_similarity: Option<Matrix>,
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<String, HetnetError> {
    std::fs::read_to_string(path).map_err(|e| HetnetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Non-comment, non-blank lines with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim_end_matches('\r');
        (!l.trim().is_empty() && !l.trim_start().starts_with('#')).then_some((i + 1, l))
    })
}

fn malformed(file: &str, line: usize, column: usize, reason: &str) -> HetnetError {
    HetnetError::MalformedLine {
        file: file.to_string(),
        line,
        column,
        reason: reason.to_string(),
    }
}

/// `(id, second column)` rows in file order, deduplicated on ID with the
/// first occurrence kept.
fn read_entities(
    path: &Path,
    require_second: bool,
    warnings: &mut Vec<String>,
) -> Result<Vec<(String, String)>, HetnetError> {
    let file = path.display().to_string();
    let text = read(path)?;
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    for (line, l) in data_lines(&text) {
        let mut parts = l.splitn(3, '\t');
        let id = parts.next().unwrap_or_default().trim();
        if id.is_empty() {
            return Err(malformed(&file, line, 1, "empty id"));
        }
        let second = parts.next().map(str::trim).unwrap_or_default();
        if require_second && second.is_empty() {
            return Err(malformed(&file, line, id.len() + 1, "missing second column"));
        }
        if !seen.insert(id.to_string()) {
            warnings.push(format!("{file}:{line}: duplicate entity `{id}` ignored"));
            continue;
        }
        rows.push((id.to_string(), second.to_string()));
    }
    Ok(rows)
}

impl Dataset {
    pub fn load(manifest: &DatasetManifest) -> Result<Self, HetnetError> {
        let mut warnings = Vec::new();
        let drugs: Vec<DrugEntry> = read_entities(&manifest.resolve(&manifest.entities.drugs), true, &mut warnings)?
            .into_iter()
            .map(|(id, smiles)| DrugEntry { id, smiles })
            .collect();
        let diseases: Vec<DiseaseEntry> =
            read_entities(&manifest.resolve(&manifest.entities.diseases), false, &mut warnings)?
                .into_iter()
                .map(|(id, name)| {
                    let name = if name.is_empty() { id.clone() } else { name };
                    DiseaseEntry { id, name }
                })
                .collect();
        let mut optional = |p: &Option<String>| -> Result<Vec<String>, HetnetError> {
            match p {
                Some(p) => Ok(read_entities(&manifest.resolve(p), false, &mut warnings)?
                    .into_iter()
                    .map(|(id, _)| id)
                    .collect()),
                None => Ok(Vec::new()),
            }
        };
        let proteins = optional(&manifest.entities.proteins)?;
        let genes = optional(&manifest.entities.genes)?;
        let pathways = optional(&manifest.entities.pathways)?;

        let mut dataset = Dataset {
            drugs,
            proteins,
            genes,
            pathways,
            diseases,
            relations: BTreeMap::new(),
            disease_similarity: None,
            warnings,
        };
        let indices = dataset.indices();
        for (&kind, rel) in &manifest.relations {
            let edges = read_relation(&manifest.resolve(rel), kind, &indices, &mut dataset.warnings)?;
            dataset.relations.insert(kind, edges);
        }
        if let Some(sim) = &manifest.similarity.disease {
            let m = read_similarity(&manifest.resolve(sim), &indices[&NodeClass::Disease])?;
            dataset.disease_similarity = Some(m);
        }
        Ok(dataset)
    }

    pub fn from_manifest_path(path: &Path) -> Result<Self, HetnetError> {
        Self::load(&DatasetManifest::from_path(path)?)
    }

    fn indices(&self) -> HashMap<NodeClass, HashMap<String, usize>> {
        NodeClass::ALL
            .iter()
            .map(|&c| {
                let ids = self.ids(c);
                (c, ids.into_iter().enumerate().map(|(i, id)| (id, i)).collect())
            })
            .collect()
    }

    /// IDs of one node class in index order.
    pub fn ids(&self, class: NodeClass) -> Vec<String> {
        match class {
            NodeClass::Drug => self.drugs.iter().map(|d| d.id.clone()).collect(),
            NodeClass::Protein => self.proteins.clone(),
            NodeClass::Gene => self.genes.clone(),
            NodeClass::Pathway => self.pathways.clone(),
            NodeClass::Disease => self.diseases.iter().map(|d| d.id.clone()).collect(),
        }
    }

    pub fn count(&self, class: NodeClass) -> usize {
        match class {
            NodeClass::Drug => self.drugs.len(),
            NodeClass::Protein => self.proteins.len(),
            NodeClass::Gene => self.genes.len(),
            NodeClass::Pathway => self.pathways.len(),
            NodeClass::Disease => self.diseases.len(),
        }
    }

    pub fn relation(&self, kind: RelationKind) -> &[Edge] {
        self.relations.get(&kind).map_or(&[], Vec::as_slice)
    }

    /// Known drug–disease associations as `(drug, disease)` index pairs.
    pub fn drug_disease_pairs(&self) -> Vec<(usize, usize)> {
        self.relation(RelationKind::DrugDisease)
            .iter()
            .map(|e| (e.src, e.dst))
            .collect()
    }

    /// Binary drug × disease association matrix.
    pub fn association_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.drugs.len(), self.diseases.len());
        for (r, d) in self.drug_disease_pairs() {
            m.set(r, d, 1.0);
        }
        m
    }

    /// SHA-256 over a canonical rendering of all entities, relations and
    /// similarity values.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.drugs {
            h.update(format!("drug\t{}\t{}\n", d.id, d.smiles));
        }
        for (class, ids) in [
            ("protein", &self.proteins),
            ("gene", &self.genes),
            ("pathway", &self.pathways),
        ] {
            for id in ids {
                h.update(format!("{class}\t{id}\n"));
            }
        }
        for d in &self.diseases {
            h.update(format!("disease\t{}\t{}\n", d.id, d.name));
        }
        for (kind, edges) in &self.relations {
            for e in edges {
                h.update(format!("{}\t{}\t{}\t{:?}\n", kind.key(), e.src, e.dst, e.weight));
            }
        }
        if let Some(m) = &self.disease_similarity {
            for v in m.as_slice() {
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Writes the dataset as TSV files plus `manifest.toml` into `dir` and
    /// returns the manifest path.
    pub fn write_dir(&self, dir: &Path) -> Result<PathBuf, HetnetError> {
        let io = |path: &Path, e: std::io::Error| HetnetError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let write = |name: &str, body: String| -> Result<String, HetnetError> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            Ok(name.to_string())
        };
        let mut manifest = DatasetManifest::default();
        manifest.entities.drugs = write(
            "drugs.tsv",
            self.drugs.iter().map(|d| format!("{}\t{}\n", d.id, d.smiles)).collect(),
        )?;
        manifest.entities.diseases = write(
            "diseases.tsv",
            self.diseases.iter().map(|d| format!("{}\t{}\n", d.id, d.name)).collect(),
        )?;
        let ids = |v: &[String]| v.iter().map(|s| format!("{s}\n")).collect::<String>();
        if !self.proteins.is_empty() {
            manifest.entities.proteins = Some(write("proteins.tsv", ids(&self.proteins))?);
        }
        if !self.genes.is_empty() {
            manifest.entities.genes = Some(write("genes.tsv", ids(&self.genes))?);
        }
        if !self.pathways.is_empty() {
            manifest.entities.pathways = Some(write("pathways.tsv", ids(&self.pathways))?);
        }
        for (&kind, edges) in &self.relations {
            let (sc, dc) = kind.endpoints();
            let (src_ids, dst_ids) = (self.ids(sc), self.ids(dc));
            let body: String = edges
                .iter()
                .map(|e| {
                    if e.weight == 1.0 {
                        format!("{}\t{}\n", src_ids[e.src], dst_ids[e.dst])
                    } else {
                        format!("{}\t{}\t{:?}\n", src_ids[e.src], dst_ids[e.dst], e.weight)
                    }
                })
                .collect();
            let name = write(&format!("{}.tsv", kind.key()), body)?;
            manifest.relations.insert(kind, name);
        }
        if let Some(m) = &self.disease_similarity {
            let mut body = String::new();
            for i in 0..m.rows() {
                for j in i..m.cols() {
                    let v = m.get(i, j);
                    if v != 0.0 || i == j {
                        let _ = writeln!(body, "{}\t{}\t{v:?}", self.diseases[i].id, self.diseases[j].id);
                    }
                }
            }
            manifest.similarity.disease = Some(write("disease_similarity.tsv", body)?);
        }
        let text = toml::to_string(&manifest).map_err(|e| HetnetError::Manifest(e.to_string()))?;
        let path = dir.join("manifest.toml");
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(path)
    }
}

fn read_relation(
    path: &Path,
    kind: RelationKind,
    indices: &HashMap<NodeClass, HashMap<String, usize>>,
    warnings: &mut Vec<String>,
) -> Result<Vec<Edge>, HetnetError> {
    let file = path.display().to_string();
    let text = read(path)?;
    let (sc, dc) = kind.endpoints();
    let (src_index, dst_index) = (&indices[&sc], &indices[&dc]);
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for (line, l) in data_lines(&text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(malformed(&file, line, 1, "expected 2 or 3 tab-separated fields"));
        }
        let lookup = |index: &HashMap<String, usize>, id: &str, class: NodeClass| {
            index.get(id.trim()).copied().ok_or_else(|| HetnetError::UnknownEntity {
                file: file.clone(),
                line,
                class,
                id: id.trim().to_string(),
            })
        };
        let src = lookup(src_index, fields[0], sc)?;
        let dst = lookup(dst_index, fields[1], dc)?;
        let weight = match fields.get(2) {
            Some(w) => w.trim().parse::<f64>().ok().filter(|w| w.is_finite()).ok_or_else(|| {
                malformed(&file, line, fields[0].len() + fields[1].len() + 3, "bad weight")
            })?,
            None => 1.0,
        };
        let key = if kind.is_symmetric() {
            (src.min(dst), src.max(dst))
        } else {
            (src, dst)
        };
        if !seen.insert(key) {
            warnings.push(format!("{file}:{line}: duplicate relation ignored"));
            continue;
        }
        edges.push(Edge { src, dst, weight });
    }
    Ok(edges)
}

fn read_similarity(path: &Path, index: &HashMap<String, usize>) -> Result<Matrix, HetnetError> {
    let file = path.display().to_string();
    let text = read(path)?;
    let n = index.len();
    let mut m = Matrix::zeros(n, n);
    let unknown = |line: usize, id: &str| HetnetError::UnknownEntity {
        file: file.clone(),
        line,
        class: NodeClass::Disease,
        id: id.to_string(),
    };
    let parse = |line: usize, v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed(&file, line, 1, "bad similarity value"))
    };
    let mut lines = data_lines(&text).peekable();
    let dense = text.lines().next().is_some_and(|l| l.starts_with('\t'));
    if dense {
        let (hline, header) = lines.next().expect("non-empty");
        let cols: Vec<usize> = header
            .split('\t')
            .skip(1)
            .map(|id| index.get(id.trim()).copied().ok_or_else(|| unknown(hline, id.trim())))
            .collect::<Result<_, _>>()?;
        for (line, l) in lines {
            let mut fields = l.split('\t');
            let id = fields.next().unwrap_or_default().trim();
            let row = *index.get(id).ok_or_else(|| unknown(line, id))?;
            let values: Vec<&str> = fields.collect();
            if values.len() != cols.len() {
                return Err(malformed(&file, line, 1, "row length differs from header"));
            }
            for (&c, v) in cols.iter().zip(values) {
                m.set(row, c, parse(line, v)?);
            }
        }
    } else {
        let mut diag_set = vec![false; n];
        for (line, l) in lines {
            let fields: Vec<&str> = l.split('\t').collect();
            if fields.len() != 3 {
                return Err(malformed(&file, line, 1, "expected id<TAB>id<TAB>value"));
            }
            let a = *index.get(fields[0].trim()).ok_or_else(|| unknown(line, fields[0].trim()))?;
            let b = *index.get(fields[1].trim()).ok_or_else(|| unknown(line, fields[1].trim()))?;
            let v = parse(line, fields[2])?;
            m.set(a, b, v);
            m.set(b, a, v);
            if a == b {
                diag_set[a] = true;
            }
        }
        for (i, set) in diag_set.into_iter().enumerate() {
            if !set {
                m.set(i, i, 1.0);
            }
        }
    }
    Ok(m)
}
