//! Ranking and thresholded metrics, k-fold cross-validation and the
//! association-sparsity sweep.

mod metrics;
mod report;

pub use metrics::{
    aupr, metrics_report, roc_auc, select_threshold, thresholded_metrics, Confusion, Metrics,
    MetricsReport, ThresholdStrategy,
};
pub use report::{ablation_table, cv_table, cv_tsv, write_ablation_reports, write_cv_reports};

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hetnet::{ablate_pairs, make_folds, FoldPlan, NegativePolicy};
use crate::model::{score_matrix, train, GraphTensors, ModelConfig, ModelError, ModelState};
use crate::numerics::Matrix;
use crate::pipeline::Prepared;
use crate::Error;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("both classes are required")]
    SingleClass,
    #[error("no positive labels")]
    NoPositives,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("score {0} is NaN")]
    NanScore(usize),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub negatives: NegativePolicy,
    pub threshold: ThresholdStrategy,
    pub seed: u64,
    /// Train folds on the rayon pool.
    pub parallel: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 10,
            negatives: NegativePolicy::AllUnknown,
            threshold: ThresholdStrategy::MaxF1,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub report: MetricsReport,
    pub test_positives: usize,
    pub test_negatives: usize,
    /// False when the fold had no training positives and the model stayed
    /// at initialization.
    pub trained: bool,
    pub best_epoch: usize,
    pub best_loss: f64,
    #[serde(skip)]
    pub losses: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    /// Population standard deviation across folds.
    pub std: Metrics,
}

impl CvSummary {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        let n = folds.len().max(1) as f64;
        let mut mean = [0.0; 7];
        for f in &folds {
            for (m, v) in mean.iter_mut().zip(f.report.metrics.values()) {
                *m += v / n;
            }
        }
        let mut var = [0.0; 7];
        for f in &folds {
            for ((s, v), m) in var.iter_mut().zip(f.report.metrics.values()).zip(mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        Self {
            folds,
            mean: Metrics::from_values(mean),
            std: Metrics::from_values(var.map(f64::sqrt)),
        }
    }
}

/// One scored fold, with the state when a checkpoint should be kept.
struct FoldRun {
    result: FoldResult,
    state: ModelState,
}

fn model_for_fold(config: &ModelConfig, fold: usize) -> ModelConfig {
    ModelConfig {
        seed: config.seed.wrapping_add(fold as u64),
        ..config.clone()
    }
}

fn gather(scores: &Matrix, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(r, d)| scores.get(r, d)).collect()
}

fn run_fold(
    prepared: &Prepared,
    plan: &FoldPlan,
    fold: usize,
    excluded: &[(usize, usize)],
    model: &ModelConfig,
    cv: &CvConfig,
) -> Result<FoldRun, Error> {
    let config = model_for_fold(model, fold);
    let test_pos = plan.test_positives(fold);
    let test_neg = plan.test_negatives(fold);
    let mut hidden: BTreeSet<(usize, usize)> = test_pos.iter().copied().collect();
    hidden.extend(excluded.iter().copied());
    let hidden: Vec<_> = hidden.into_iter().collect();
    let graph = prepared.graph.mask_test_edges(&hidden);
    let (labels, mask) = plan.supervision(fold, excluded);

    let (state, losses, best_epoch, best_loss) =
        match train(&graph, &prepared.drug_vectors, &labels, &mask, &config) {
            Ok(o) => (o.state, o.losses, o.best_epoch, o.best_loss),
            Err(ModelError::NoPositives) => {
                (ModelState::init(&config, &graph)?, Vec::new(), 0, f64::NAN)
            }
            Err(e) => return Err(e.into()),
        };
    let tensors = GraphTensors::new(&graph);
    let emb = state.embeddings(&tensors, &prepared.drug_vectors)?;
    let scores = score_matrix(&emb.drugs, &emb.diseases)?;

    // Threshold from the supervised training pairs.
    let mut train_scores = Vec::new();
    let mut train_labels = Vec::new();
    for (i, (&m, &y)) in mask.as_slice().iter().zip(labels.as_slice()).enumerate() {
        if m != 0.0 {
            train_scores.push(scores.as_slice()[i]);
            train_labels.push(y != 0.0);
        }
    }
    let threshold = match select_threshold(&train_scores, &train_labels, cv.threshold) {
        Ok(t) => t,
        Err(EvalError::SingleClass) => 0.5,
        Err(e) => return Err(Error::Invalid(e.to_string())),
    };

    let mut test_scores = gather(&scores, &test_pos);
    test_scores.extend(gather(&scores, &test_neg));
    let mut test_labels = vec![true; test_pos.len()];
    test_labels.resize(test_pos.len() + test_neg.len(), false);
    let report = metrics_report(&test_scores, &test_labels, threshold)
        .map_err(|e| Error::Invalid(format!("fold {fold}: {e}")))?;
    Ok(FoldRun {
        result: FoldResult {
            fold,
            report,
            test_positives: test_pos.len(),
            test_negatives: test_neg.len(),
            trained: state.trained,
            best_epoch,
            best_loss,
            losses,
        },
        state,
    })
}

/// k-fold cross-validation. Each fold hides its test positives from the
/// graph and from supervision, trains from scratch and is scored on its
/// test positives and negatives. Pairs in `excluded` are additionally
/// removed from every training graph and supervision mask but still count
/// as positives when they fall in a test fold.
pub fn run_cv_excluding(
    prepared: &Prepared,
    model: &ModelConfig,
    cv: &CvConfig,
    excluded: &[(usize, usize)],
    out_dir: Option<&Path>,
) -> Result<CvSummary, Error> {
    let positives = prepared.dataset.drug_disease_pairs();
    let plan = make_folds(
        &positives,
        prepared.dataset.drugs.len(),
        prepared.dataset.diseases.len(),
        cv.k,
        cv.negatives,
        cv.seed,
    )?;
    let run = |fold: usize| -> Result<FoldResult, Error> {
        let r = run_fold(prepared, &plan, fold, excluded, model, cv)?;
        if let Some(dir) = out_dir {
            let fold_dir = dir.join(format!("fold_{fold:02}"));
            r.state.save(&fold_dir)?;
            report::write_fold(&fold_dir, &r.result)?;
        }
        log::info!("fold {fold}: auc {:.4}", r.result.report.metrics.auc);
        Ok(r.result)
    };
    let folds: Vec<FoldResult> = if cv.parallel {
        (0..cv.k).into_par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        (0..cv.k).map(run).collect::<Result<_, _>>()?
    };
    let summary = CvSummary::from_folds(folds);
    if let Some(dir) = out_dir {
        write_cv_reports(&summary, dir)?;
    }
    Ok(summary)
}

pub fn run_cv(
    prepared: &Prepared,
    model: &ModelConfig,
    cv: &CvConfig,
    out_dir: Option<&Path>,
) -> Result<CvSummary, Error> {
    run_cv_excluding(prepared, model, cv, &[], out_dir)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub epsilon: f64,
    pub removed: usize,
    pub summary: CvSummary,
}

/// For each ε, removes `round(ε · |R_rd|)` associations (seeded by
/// `cv.seed`) and cross-validates with the same fold plan.
pub fn run_ablation(
    prepared: &Prepared,
    model: &ModelConfig,
    cv: &CvConfig,
    epsilons: &[f64],
    out_dir: Option<&Path>,
) -> Result<Vec<AblationRow>, Error> {
    let positives = prepared.dataset.drug_disease_pairs();
    let mut rows = Vec::new();
    for &eps in epsilons {
        let removed = ablate_pairs(&positives, eps, cv.seed)?;
        let dir = out_dir.map(|d| d.join(format!("eps_{eps:.2}")));
        let summary = run_cv_excluding(prepared, model, cv, &removed, dir.as_deref())?;
        rows.push(AblationRow {
            epsilon: eps,
            removed: removed.len(),
            summary,
        });
    }
    if let Some(dir) = out_dir {
        write_ablation_reports(&rows, dir)?;
    }
    Ok(rows)
}
