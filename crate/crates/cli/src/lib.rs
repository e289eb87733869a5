//! The `repurpose` command line and HTTP service.
//!
//! Exit codes: 0 success, 1 usage, 2 bad input (files, parse errors,
//! unknown IDs), 3 numeric failure during training.

pub mod api;
pub mod server;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use repurpose::analysis::{
    assignments_tsv, binarize, cluster_similarity_table, coldstart_label_heatmap, heatmap_tsv,
    kmeans, pair_disease_score, projection_tsv, score_table_tsv, tsne, TsneConfig,
};
use repurpose::chem::read_drug_list;
use repurpose::coldstart::{embed_query, evaluate_coldstart, EmbeddingDatabase};
use repurpose::embed::EmbeddingTable;
use repurpose::evaluate::{
    ablation_table, cv_table, run_ablation, run_cv, CvConfig, ThresholdStrategy,
};
use repurpose::hetnet::{
    coldstart_split, Dataset, DrugEntry, Edge, NegativePolicy, NodeClass, RelationKind,
};
use repurpose::model::{train, GraphTensors};
use repurpose::numerics::Matrix;
use repurpose::pipeline::{drug_sentences, prepare, train_embeddings, PipelineConfig, RunManifest};
use repurpose::synthetic::{generate, SyntheticConfig};

pub use server::{router, serve};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<repurpose::Error> for CliError {
    fn from(e: repurpose::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error!(
    repurpose::hetnet::HetnetError,
    repurpose::analysis::AnalysisError,
    repurpose::coldstart::ColdStartError,
    repurpose::embed::EmbedError
);

impl From<repurpose::model::ModelError> for CliError {
    fn from(e: repurpose::model::ModelError) -> Self {
        repurpose::Error::from(e).into()
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "repurpose", version, about = "Drug-disease association prediction")]
pub struct Cli {
    /// Log level (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Dataset manifest (TOML).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Pipeline configuration (TOML); defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for embeddings, initialization, dropout and folds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// `all` for every unknown pair, or a negatives-per-positive ratio.
    #[arg(long, default_value = "all")]
    pub negatives: String,
    /// `maxf1`, or a fixed threshold in [0, 1].
    #[arg(long, default_value = "maxf1")]
    pub threshold: String,
    /// Train folds in parallel.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the planted-structure synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
    },
    /// Validate a dataset and print its entity and relation counts.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        /// Also write an index (counts, hash, warnings) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train substructure embeddings on a drug list (`id<TAB>smiles`).
    EmbedTrain {
        #[arg(long)]
        drugs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train on every known association and write a checkpoint and database.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// Reuse a trained embedding table.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// k-fold cross-validation.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validation after removing a fraction of the associations.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1.0")]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split drugs into cold-start train and test datasets.
    ColdstartSplit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score held-out drugs against a trained database.
    ColdstartEval {
        #[arg(long)]
        train_db: PathBuf,
        #[arg(long)]
        test_manifest: PathBuf,
        #[arg(long, default_value_t = repurpose::coldstart::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank every disease for one molecule and write quick_predict.csv.
    Predict {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        smiles: String,
        /// Known indications: `disease_id[<TAB>weight]` per line.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, default_value = "quick_predict.csv")]
        out: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
        /// Also write the response body the HTTP service would return.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Analysis exports.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Serve the prediction API.
    Serve {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory of static files served for non-API paths.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Analyze {
    /// 2-D t-SNE of the drug embeddings.
    Tsne {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// k-means of the drug embeddings and the mean shared-indication score
    /// between clusters.
    Kmeans {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        /// Known associations for the cluster table; predicted scores above
        /// 0.5 are used without it.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drug × drug shared-indication scores of a dataset.
    Pairscore {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Training drugs ordered by distance to each held-out drug, with label scores.
    Heatmap {
        #[arg(long)]
        train_db: PathBuf,
        #[arg(long)]
        test_manifest: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new().parse_filters(&cli.log).try_init();
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.code()
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn dir_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn manifest(command: &str, seed: u64, hash: &str, config: &impl serde::Serialize) -> RunManifest {
    let mut m = RunManifest::new(command, seed, hash, config);
    m.created_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    m
}

fn record(m: &mut RunManifest, key: &str, value: impl serde::Serialize) {
    m.extra.insert(key.into(), serde_json::to_value(value).expect("serializable"));
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => toml::from_str(&read_file(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(PipelineConfig::default()),
    }
}

fn load_data(args: &DataArgs) -> Result<(Dataset, PipelineConfig)> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.model.seed = seed;
        config.skipgram.seed = seed;
    }
    if let Some(e) = args.epochs {
        config.model.epochs = e;
    }
    Ok((Dataset::from_manifest_path(&args.manifest)?, config))
}

fn cv_config(args: &CvArgs, seed: u64) -> Result<CvConfig> {
    let negatives = match args.negatives.as_str() {
        "all" => NegativePolicy::AllUnknown,
        r => NegativePolicy::Sampled {
            ratio: r
                .parse()
                .ok()
                .filter(|r: &f64| *r > 0.0)
                .ok_or_else(|| CliError::Usage(format!("--negatives: expected `all` or a positive ratio, got `{r}`")))?,
        },
    };
    let threshold = match args.threshold.as_str() {
        "maxf1" => ThresholdStrategy::MaxF1,
        t => ThresholdStrategy::Fixed {
            value: t
                .parse()
                .ok()
                .filter(|t: &f64| (0.0..=1.0).contains(t))
                .ok_or_else(|| CliError::Usage(format!("--threshold: expected `maxf1` or a value in [0, 1], got `{t}`")))?,
        },
    };
    Ok(CvConfig {
        k: args.k,
        negatives,
        threshold,
        seed,
        parallel: args.parallel,
    })
}

fn load_db(path: &Path) -> Result<EmbeddingDatabase> {
    Ok(EmbeddingDatabase::load(path)?)
}

/// Test dataset of a cold-start split with its held-out truth as
/// drug–disease relations.
fn test_with_truth(split: &repurpose::hetnet::ColdStartSplit) -> Dataset {
    let mut test = split.test.clone();
    test.relations.insert(
        RelationKind::DrugDisease,
        split
            .truth
            .iter()
            .map(|&(src, dst)| Edge { src, dst, weight: 1.0 })
            .collect(),
    );
    test
}

fn truth_rows(test: &Dataset) -> Vec<Vec<bool>> {
    let mut rows = vec![vec![false; test.diseases.len()]; test.drugs.len()];
    for (r, d) in test.drug_disease_pairs() {
        rows[r][d] = true;
    }
    rows
}

fn query_embeddings(db: &EmbeddingDatabase, test: &Dataset) -> Result<Matrix> {
    let mut q = Matrix::zeros(test.drugs.len(), db.drug_embeddings.cols());
    for (i, d) in test.drugs.iter().enumerate() {
        let e = embed_query(&d.smiles, db).map_err(|e| CliError::Input(format!("drug `{}`: {e}", d.id)))?;
        q.row_mut(i).copy_from_slice(&e.values);
    }
    Ok(q)
}

fn read_prior(path: &Path) -> Result<Vec<api::PriorEntry>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split('\t');
        let id = f.next().unwrap_or_default().trim().to_string();
        out.push(match f.next() {
            Some(w) => api::PriorEntry::Weighted {
                id,
                weight: w.trim().parse().map_err(|_| {
                    CliError::Input(format!("{}:{}: bad prior weight `{w}`", path.display(), i + 1))
                })?,
            },
            None => api::PriorEntry::Id(id),
        });
    }
    Ok(out)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let mut say = |s: String| {
        let _ = writeln!(out, "{s}");
    };
    match command {
        Command::Synth { out: dir, seed, noise } => {
            let cfg = SyntheticConfig {
                seed,
                noise,
                ..Default::default()
            };
            if !(0.0..=1.0).contains(&noise) {
                return Err(CliError::Usage("--noise must lie in [0, 1]".into()));
            }
            let ds = generate(&cfg);
            let path = ds.write_dir(&dir)?;
            manifest("synth", seed, &ds.content_hash(), &cfg).write(&dir)?;
            say(format!("wrote {} ({} drugs, {} diseases)", path.display(), ds.drugs.len(), ds.diseases.len()));
        }
        Command::Ingest { manifest: path, out: dir } => {
            let ds = Dataset::from_manifest_path(&path)?;
            drug_sentences(&ds)?;
            let hash = ds.content_hash();
            let mut counts = serde_json::Map::new();
            say(format!("dataset {hash}"));
            for c in NodeClass::ALL {
                let name = format!("{c:?}").to_lowercase();
                say(format!("{name:<16}{}", ds.count(c)));
                counts.insert(name, ds.count(c).into());
            }
            for k in RelationKind::ALL {
                let n = ds.relation(k).len();
                if n > 0 {
                    say(format!("{:<16}{n}", k.key()));
                }
                counts.insert(k.key().into(), n.into());
            }
            let sim = ds.disease_similarity.is_some();
            say(format!("disease similarity {}", if sim { "present" } else { "missing" }));
            for w in &ds.warnings {
                say(format!("warning: {w}"));
            }
            if let Some(dir) = dir {
                let index = serde_json::json!({
                    "dataset_hash": hash,
                    "counts": counts,
                    "disease_similarity": sim,
                    "warnings": ds.warnings,
                });
                write_file(&dir.join("index.json"), &(serde_json::to_string_pretty(&index).expect("json") + "\n"))?;
                manifest("ingest", 0, &hash, &serde_json::json!({ "manifest": path })).write(&dir)?;
            }
        }
        Command::EmbedTrain { drugs, out: table_path, config, seed } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.skipgram.seed = s;
            }
            let text = read_file(&drugs)?;
            let list = read_drug_list(&text).map_err(|(line, l)| {
                CliError::Input(format!("{}:{line}: expected id<TAB>smiles, got `{l}`", drugs.display()))
            })?;
            let ds = Dataset {
                drugs: list.into_iter().map(|(_, id, smiles)| DrugEntry { id, smiles }).collect(),
                ..Default::default()
            };
            let sentences = drug_sentences(&ds)?;
            let table = train_embeddings(&sentences, &cfg.skipgram)?;
            ensure_dir(&dir_of(&table_path))?;
            table.save(&table_path)?;
            manifest("embed-train", cfg.skipgram.seed, &ds.content_hash(), &cfg.skipgram).write(&dir_of(&table_path))?;
            say(format!("{} tokens × {} dimensions -> {}", table.len(), table.dim(), table_path.display()));
        }
        Command::Train { data, out: dir, embeddings } => {
            let (ds, cfg) = load_data(&data)?;
            let table = embeddings.as_deref().map(EmbeddingTable::load).transpose()?;
            let prepared = prepare(&ds, &cfg, table)?;
            let labels = prepared.dataset.association_matrix();
            let mask = Matrix::filled(labels.rows(), labels.cols(), 1.0);
            let outcome = train(&prepared.graph, &prepared.drug_vectors, &labels, &mask, &cfg.model)?;
            ensure_dir(&dir)?;
            outcome.state.save(&dir.join("model"))?;
            let tensors = GraphTensors::new(&prepared.graph);
            let db = EmbeddingDatabase::build(
                &outcome.state,
                &prepared.dataset,
                &tensors,
                &prepared.drug_vectors,
                &prepared.table,
                cfg.pooling,
            )?;
            db.save(&dir.join("db.json"))?;
            prepared.table.save(&dir.join("embeddings.txt"))?;
            let mut losses = String::from("epoch\tloss\n");
            for (i, l) in outcome.losses.iter().enumerate() {
                losses.push_str(&format!("{i}\t{l:.8e}\n"));
            }
            write_file(&dir.join("losses.tsv"), &losses)?;
            let mut m = manifest("train", cfg.model.seed, &ds.content_hash(), &cfg);
            record(&mut m, "best_epoch", outcome.best_epoch);
            record(&mut m, "best_loss", outcome.best_loss);
            record(&mut m, "artifacts", ["model", "db.json", "embeddings.txt", "losses.tsv"]);
            m.write(&dir)?;
            say(format!(
                "trained {} epochs, best loss {:.6} at epoch {}; database {}",
                cfg.model.epochs,
                outcome.best_loss,
                outcome.best_epoch,
                dir.join("db.json").display()
            ));
        }
        Command::Cv { data, cv, out: dir } => {
            let (ds, cfg) = load_data(&data)?;
            let cvc = cv_config(&cv, cfg.model.seed)?;
            let prepared = prepare(&ds, &cfg, None)?;
            let summary = run_cv(&prepared, &cfg.model, &cvc, dir.as_deref())?;
            if let Some(dir) = &dir {
                let mut m = manifest("cv", cvc.seed, &ds.content_hash(), &cfg);
                record(&mut m, "cv", &cvc);
                m.write(dir)?;
            }
            say(cv_table(&summary).trim_end().to_string());
        }
        Command::Ablate { data, cv, eps, out: dir } => {
            let (ds, cfg) = load_data(&data)?;
            let cvc = cv_config(&cv, cfg.model.seed)?;
            let prepared = prepare(&ds, &cfg, None)?;
            let rows = run_ablation(&prepared, &cfg.model, &cvc, &eps, dir.as_deref())?;
            if let Some(dir) = &dir {
                let mut m = manifest("ablate", cvc.seed, &ds.content_hash(), &cfg);
                record(&mut m, "cv", &cvc);
                record(&mut m, "eps", &eps);
                m.write(dir)?;
            }
            say(ablation_table(&rows).trim_end().to_string());
        }
        Command::ColdstartSplit { manifest: path, ratio, seed, out: dir } => {
            let ds = Dataset::from_manifest_path(&path)?;
            let split = coldstart_split(&ds, ratio, seed)?;
            split.train.write_dir(&dir.join("train"))?;
            test_with_truth(&split).write_dir(&dir.join("test"))?;
            let mut m = manifest("coldstart-split", seed, &ds.content_hash(), &serde_json::json!({ "ratio": ratio }));
            record(&mut m, "train_hash", split.train.content_hash());
            m.write(&dir)?;
            say(format!(
                "train {} drugs, test {} drugs with {} held-out associations",
                split.train.drugs.len(),
                split.test.drugs.len(),
                split.truth.len()
            ));
        }
        Command::ColdstartEval { train_db, test_manifest, threshold, out: dir } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(CliError::Usage("--threshold must lie in [0, 1]".into()));
            }
            let db = load_db(&train_db)?;
            let test = Dataset::from_manifest_path(&test_manifest)?;
            let truth = test.drug_disease_pairs();
            let (report, predicted) = evaluate_coldstart(&db, &test, &truth, threshold)?;
            let m = &report.report.metrics;
            say(format!("threshold {threshold}"));
            for (n, v) in repurpose::evaluate::Metrics::NAMES.iter().zip(m.values()) {
                say(format!("{n:<12}{v:.4}"));
            }
            if let Some(dir) = dir {
                let json = serde_json::to_string_pretty(&report).expect("json") + "\n";
                write_file(&dir.join("coldstart_report.json"), &json)?;
                let ids: Vec<String> = test.drugs.iter().map(|d| d.id.clone()).collect();
                let cols: Vec<String> = test.diseases.iter().map(|d| d.id.clone()).collect();
                write_file(&dir.join("coldstart_scores.tsv"), &score_table_tsv(&ids, &cols, &predicted))?;
                let mut mf = manifest("coldstart-eval", 0, &test.content_hash(), &serde_json::json!({ "threshold": threshold }));
                record(&mut mf, "train_provenance", &db.provenance);
                mf.write(&dir)?;
            }
        }
        Command::Predict { db, smiles, prior, out: csv, top_k, json } => {
            let database = load_db(&db)?;
            let prior = prior.as_deref().map(read_prior).transpose()?.unwrap_or_default();
            let req = api::PredictRequest { smiles, prior, top_k };
            let resp = api::predict(&database, &req).map_err(|e| CliError::Input(e.message))?;
            write_file(&csv, &resp.csv())?;
            if let Some(j) = &json {
                write_file(j, &serde_json::to_string(&resp).expect("json"))?;
            }
            let mut m = manifest("predict", 0, &database.provenance, &req);
            record(&mut m, "output", &csv);
            m.write(&dir_of(&csv))?;
            for r in resp.ranking.iter().take(10) {
                say(format!("{:>4}  {:<12}{:.6}  {}", r.rank, r.disease_id, r.score, r.disease_name));
            }
            if resp.unknown_tokens > 0 {
                say(format!("{} of {} substructures were not in the vocabulary", resp.unknown_tokens, resp.tokens));
            }
        }
        Command::Analyze(a) => analyze(a, &mut say)?,
        Command::Serve { db, addr, static_dir } => {
            let database = Arc::new(load_db(&db)?);
            say(format!("serving {} diseases on http://{addr}", database.n_diseases()));
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(e.to_string()))?;
            rt.block_on(serve(database, addr, static_dir))
                .map_err(|e| CliError::Input(format!("{addr}: {e}")))?;
        }
    }
    Ok(())
}

fn analyze(a: Analyze, say: &mut dyn FnMut(String)) -> Result<()> {
    match a {
        Analyze::Tsne { db, out, perplexity, iterations, seed } => {
            let database = load_db(&db)?;
            let cfg = TsneConfig {
                perplexity,
                iterations,
                seed,
                ..Default::default()
            };
            let p = tsne(&database.drug_embeddings, &cfg)?;
            write_file(&out, &projection_tsv(&database.drug_ids, &p))?;
            manifest("analyze tsne", seed, &database.provenance, &cfg).write(&dir_of(&out))?;
            say(format!("KL divergence {:.4} after {} iterations", p.kl_divergence, p.iterations));
        }
        Analyze::Kmeans { db, k, seed, max_iter, manifest: labels, out } => {
            let database = load_db(&db)?;
            let c = kmeans(&database.drug_embeddings, k, seed, max_iter)?;
            let rows = match &labels {
                Some(path) => {
                    let ds = Dataset::from_manifest_path(path)?;
                    let known = truth_rows(&ds);
                    database
                        .drug_ids
                        .iter()
                        .map(|id| {
                            ds.drugs
                                .iter()
                                .position(|d| &d.id == id)
                                .map(|i| known[i].clone())
                                .ok_or_else(|| CliError::Input(format!("drug `{id}` is not in {}", path.display())))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                None => binarize(&database.scores, 0.5),
            };
            let table = cluster_similarity_table(&c.assignments, k, &rows);
            let names: Vec<String> = (0..k).map(|i| format!("cluster{i}")).collect();
            write_file(&out.join("assignments.tsv"), &assignments_tsv(&database.drug_ids, &c))?;
            write_file(&out.join("cluster_similarity.tsv"), &score_table_tsv(&names, &names, &table))?;
            manifest("analyze kmeans", seed, &database.provenance, &serde_json::json!({ "k": k, "max_iter": max_iter }))
                .write(&out)?;
            say(format!("inertia {:.4} after {} iterations", c.inertia, c.iterations));
        }
        Analyze::Pairscore { manifest: path, out } => {
            let ds = Dataset::from_manifest_path(&path)?;
            let rows = truth_rows(&ds);
            let n = rows.len();
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, pair_disease_score(&rows[i], &rows[j]));
                }
            }
            let ids: Vec<String> = ds.drugs.iter().map(|d| d.id.clone()).collect();
            write_file(&out, &score_table_tsv(&ids, &ids, &m))?;
            manifest("analyze pairscore", 0, &ds.content_hash(), &serde_json::json!({})).write(&dir_of(&out))?;
            say(format!("{n} × {n} table -> {}", out.display()));
        }
        Analyze::Heatmap { train_db, test_manifest, cutoff, out } => {
            let database = load_db(&train_db)?;
            let test = Dataset::from_manifest_path(&test_manifest)?;
            let q = query_embeddings(&database, &test)?;
            let h = coldstart_label_heatmap(&database.drug_embeddings, &q, &truth_rows(&test), &database.scores, cutoff);
            let test_ids: Vec<String> = test.drugs.iter().map(|d| d.id.clone()).collect();
            write_file(&out, &heatmap_tsv(&test_ids, &database.drug_ids, &h))?;
            manifest("analyze heatmap", 0, &test.content_hash(), &serde_json::json!({ "cutoff": cutoff }))
                .write(&dir_of(&out))?;
            let above = h.scores.as_slice().iter().filter(|&&s| s > repurpose::analysis::LABEL_SCORE_CUTOFF).count();
            say(format!("{} pairs, {above} above {}", h.scores.len(), repurpose::analysis::LABEL_SCORE_CUTOFF));
        }
    }
    Ok(())
}
