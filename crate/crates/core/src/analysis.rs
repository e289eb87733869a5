//! Post-hoc analysis of learned embeddings: exact t-SNE, k-means, the
//! shared-indication score between drugs and the cold-start label table.
//! Everything here produces data; plotting is left to other tools.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::numerics::Matrix;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{n} points are too few for perplexity {perplexity} (need more than {})", 3.0 * perplexity)]
    TooFewPoints { n: usize, perplexity: f64 },
    #[error("k = {k} but only {n} points")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Mean non-zero entry of the summed binary rows above which a cold-start
/// pair is read as sharing indications.
pub const LABEL_SCORE_CUTOFF: f64 = 1.7;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// ---------------------------------------------------------------- t-SNE

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations with exaggerated affinities and low momentum.
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    /// `n × 2`, aligned with the input rows.
    pub coords: Matrix,
    pub kl_divergence: f64,
    pub iterations: usize,
    /// KL divergence after every post-exaggeration iteration.
    pub kl_history: Vec<f64>,
    /// Perplexity reached by each point's bandwidth search.
    pub perplexities: Vec<f64>,
}

/// Conditional affinities `p_{j|i}` of one row and the perplexity reached.
/// The Gaussian precision is bisected until the entropy is within `1e-5`
/// nats of `ln(perplexity)`.
fn calibrate_row(d2: &[f64], i: usize, perplexity: f64) -> (Vec<f64>, f64) {
    let target = perplexity.ln();
    let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
    let mut p = vec![0.0; d2.len()];
    let mut entropy = 0.0;
    for _ in 0..200 {
        // Shift by the nearest distance so the exponentials never all underflow.
        let dmin = d2
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        let mut sum = 0.0;
        for (j, (pj, &d)) in p.iter_mut().zip(d2).enumerate() {
            *pj = if j == i { 0.0 } else { (-(d - dmin) * beta).exp() };
            sum += *pj;
        }
        let mut weighted = 0.0;
        for (pj, &d) in p.iter_mut().zip(d2) {
            *pj /= sum;
            weighted += *pj * (d - dmin);
        }
        entropy = sum.ln() + beta * weighted;
        let diff = entropy - target;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    (p, entropy.exp())
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi.max(1e-12)).ln())
        .sum()
}

/// Exact t-SNE into two dimensions.
pub fn tsne(points: &Matrix, config: &TsneConfig) -> Result<Projection2D, AnalysisError> {
    let n = points.rows();
    let perp = config.perplexity;
    if !(perp > 0.0) || config.learning_rate <= 0.0 {
        return Err(AnalysisError::InvalidParameter("perplexity and learning rate must be positive".into()));
    }
    if (n as f64) <= 3.0 * perp {
        return Err(AnalysisError::TooFewPoints { n, perplexity: perp });
    }

    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = sq_dist(points.row(i), points.row(j));
            d2[i * n + j] = d;
            d2[j * n + i] = d;
        }
    }
    let mut p = vec![0.0; n * n];
    let mut perplexities = Vec::with_capacity(n);
    for i in 0..n {
        let (row, reached) = calibrate_row(&d2[i * n..(i + 1) * n], i, perp);
        p[i * n..(i + 1) * n].copy_from_slice(&row);
        perplexities.push(reached);
    }
    let mut sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sym[i * n + j] = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..n * 2).map(|_| normal.sample(&mut rng)).collect();
    let mut velocity = vec![0.0; n * 2];
    let mut gains = vec![1.0f64; n * 2];
    let mut num = vec![0.0; n * n];
    let mut q = vec![0.0; n * n];
    let mut grad = vec![0.0; n * 2];
    let mut history = Vec::new();

    for it in 0..config.iterations {
        let exaggerating = it < config.exaggeration_iterations;
        let ex = if exaggerating { config.early_exaggeration } else { 1.0 };
        let momentum = if exaggerating { 0.5 } else { 0.8 };

        let mut qsum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let dx = y[2 * i] - y[2 * j];
                let dy = y[2 * i + 1] - y[2 * j + 1];
                let v = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = v;
                num[j * n + i] = v;
                qsum += 2.0 * v;
            }
        }
        for (qi, &v) in q.iter_mut().zip(&num) {
            *qi = (v / qsum).max(1e-12);
        }
        for i in 0..n {
            q[i * n + i] = 0.0;
        }

        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = 4.0 * (ex * sym[i * n + j] - q[i * n + j]) * num[i * n + j];
                grad[2 * i] += m * (y[2 * i] - y[2 * j]);
                grad[2 * i + 1] += m * (y[2 * i + 1] - y[2 * j + 1]);
            }
        }
        for k in 0..n * 2 {
            gains[k] = if (grad[k] > 0.0) != (velocity[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(0.01)
            };
            velocity[k] = momentum * velocity[k] - config.learning_rate * gains[k] * grad[k];
            y[k] += velocity[k];
        }
        for c in 0..2 {
            let mean = (0..n).map(|i| y[2 * i + c]).sum::<f64>() / n as f64;
            (0..n).for_each(|i| y[2 * i + c] -= mean);
        }
        if !exaggerating {
            history.push(kl(&sym, &q));
        }
    }

    // Divergence of the final layout.
    let mut qsum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = y[2 * i] - y[2 * j];
                let dy = y[2 * i + 1] - y[2 * j + 1];
                num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
                qsum += num[i * n + j];
            } else {
                num[i * n + j] = 0.0;
            }
        }
    }
    let q: Vec<f64> = num.iter().map(|v| v / qsum).collect();
    Ok(Projection2D {
        coords: Matrix::from_vec(n, 2, y).expect("n × 2"),
        kl_divergence: kl(&sym, &q),
        iterations: config.iterations,
        kl_history: history,
        perplexities,
    })
}

// ---------------------------------------------------------------- k-means

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn assign(points: &Matrix, centroids: &Matrix) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter_rows()
        .map(|p| {
            let (best, d) = centroids
                .iter_rows()
                .map(|c| sq_dist(p, c))
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
            inertia += d;
            best
        })
        .collect();
    (labels, inertia)
}

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or `max_iter` is reached. An emptied cluster keeps its centroid.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<Clustering, AnalysisError> {
    let n = points.rows();
    if k == 0 {
        return Err(AnalysisError::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(AnalysisError::KTooLarge { k, n });
    }
    let dim = points.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = points.iter_rows().map(|p| sq_dist(p, points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // All remaining points coincide with a centre.
            (0..n).find(|i| !chosen.contains(i)).expect("k ≤ n")
        };
        chosen.push(next);
        for (m, p) in nearest.iter_mut().zip(points.iter_rows()) {
            *m = m.min(sq_dist(p, points.row(next)));
        }
    }
    let mut centroids = points.select_rows(&chosen);
    let (mut labels, mut inertia) = assign(points, &centroids);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter_rows().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums.row_mut(c).iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let row: Vec<f64> = sums.row(c).iter().map(|s| s / counts[c] as f64).collect();
                centroids.row_mut(c).copy_from_slice(&row);
            }
        }
        let (next, next_inertia) = assign(points, &centroids);
        history.push(next_inertia);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(Clustering {
        centroids,
        assignments: labels,
        inertia,
        inertia_history: history,
        iterations,
    })
}

// ---------------------------------------------------------------- scores

/// Shared indications of two drugs: entries where both rows are set over
/// entries where either is set (the Jaccard index), 0 for two empty rows.
pub fn pair_disease_score(a: &[bool], b: &[bool]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let both = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let either = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Mean non-zero entry of the element-wise sum of two binary rows, in
/// `[1, 2]` (equal to `1 + Jaccard`), or 0 when both rows are empty.
pub fn label_score(a: &[bool], b: &[bool]) -> f64 {
    if a.iter().chain(b).any(|&x| x) {
        1.0 + pair_disease_score(a, b)
    } else {
        0.0
    }
}

/// Binary rows of a dense score matrix.
pub fn binarize(m: &Matrix, cutoff: f64) -> Vec<Vec<bool>> {
    m.iter_rows().map(|r| r.iter().map(|&v| v > cutoff).collect()).collect()
}

/// `k × k` mean pair score between clusters. Diagonal entries average over
/// distinct drugs of the same cluster; a cell with no pairs is 0.
pub fn cluster_similarity_table(assignments: &[usize], k: usize, diseases: &[Vec<bool>]) -> Matrix {
    let mut sum = Matrix::zeros(k, k);
    let mut count = Matrix::zeros(k, k);
    for i in 0..assignments.len() {
        for j in i + 1..assignments.len() {
            let (a, b) = (assignments[i], assignments[j]);
            let s = pair_disease_score(&diseases[i], &diseases[j]);
            let cells: &[(usize, usize)] = if a == b { &[(a, a)] } else { &[(a, b), (b, a)] };
            for &(r, c) in cells {
                sum.set(r, c, sum.get(r, c) + s);
                count.set(r, c, count.get(r, c) + 1.0);
            }
        }
    }
    let mut out = Matrix::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            if count.get(r, c) > 0.0 {
                out.set(r, c, sum.get(r, c) / count.get(r, c));
            }
        }
    }
    out
}

/// Training drugs ordered by embedding distance to each held-out drug, with
/// the label score of each pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelHeatmap {
    /// Per test drug, training drug indices nearest first.
    pub order: Vec<Vec<usize>>,
    /// Distances in `order`.
    pub distances: Matrix,
    /// `|test| × |train|` label scores in `order`.
    pub scores: Matrix,
}

/// Scores each (test, train) pair by combining the test drug's known
/// indications with the train drug's predicted ones (`predictions > cutoff`).
pub fn coldstart_label_heatmap(
    train_embeddings: &Matrix,
    test_embeddings: &Matrix,
    truth: &[Vec<bool>],
    predictions: &Matrix,
    cutoff: f64,
) -> LabelHeatmap {
    let predicted = binarize(predictions, cutoff);
    let n_train = train_embeddings.rows();
    let n_test = test_embeddings.rows();
    let mut order = Vec::with_capacity(n_test);
    let mut distances = Matrix::zeros(n_test, n_train);
    let mut scores = Matrix::zeros(n_test, n_train);
    for (t, q) in test_embeddings.iter_rows().enumerate() {
        let d: Vec<f64> = train_embeddings.iter_rows().map(|r| sq_dist(q, r).sqrt()).collect();
        let mut idx: Vec<usize> = (0..n_train).collect();
        idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        for (rank, &i) in idx.iter().enumerate() {
            distances.set(t, rank, d[i]);
            scores.set(t, rank, label_score(&truth[t], &predicted[i]));
        }
        order.push(idx);
    }
    LabelHeatmap {
        order,
        distances,
        scores,
    }
}

// ---------------------------------------------------------------- output

pub fn projection_tsv(ids: &[String], p: &Projection2D) -> String {
    let mut out = String::from("id\tx\ty\n");
    for (id, r) in ids.iter().zip(p.coords.iter_rows()) {
        let _ = writeln!(out, "{id}\t{:.6}\t{:.6}", r[0], r[1]);
    }
    out
}

pub fn assignments_tsv(ids: &[String], c: &Clustering) -> String {
    let mut out = String::from("id\tcluster\n");
    for (id, a) in ids.iter().zip(&c.assignments) {
        let _ = writeln!(out, "{id}\t{a}");
    }
    out
}

/// Dense table with a header row of column IDs and the row ID first.
pub fn score_table_tsv(row_ids: &[String], col_ids: &[String], m: &Matrix) -> String {
    let mut out = format!("id\t{}\n", col_ids.join("\t"));
    for (id, r) in row_ids.iter().zip(m.iter_rows()) {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.4}")).collect();
        let _ = writeln!(out, "{id}\t{}", cells.join("\t"));
    }
    out
}

/// Long form: one row per (test drug, rank).
pub fn heatmap_tsv(test_ids: &[String], train_ids: &[String], h: &LabelHeatmap) -> String {
    let mut out = String::from("test_id\trank\ttrain_id\tdistance\tscore\n");
    for (t, id) in test_ids.iter().enumerate() {
        for (rank, &i) in h.order[t].iter().enumerate() {
            let _ = writeln!(
                out,
                "{id}\t{}\t{}\t{:.6}\t{:.4}",
                rank + 1,
                train_ids[i],
                h.distances.get(t, rank),
                h.scores.get(t, rank)
            );
        }
    }
    out
}
