use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::EvalError;

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(EvalError::NanScore(i));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok((pos, labels.len() - pos))
}

/// Area under the ROC curve by the Mann–Whitney statistic; tied scores get
/// their average rank, so a tied positive–negative pair counts one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1
        let avg = (i + j + 2) as f64 / 2.0;
        let positives = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum += avg * positives as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision over descending scores. Every positive in a group of
/// tied scores receives the precision measured after the whole group.
pub fn aupr(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut seen, mut tp, mut total) = (0usize, 0usize, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let group_pos = order[i..=j].iter().filter(|&&k| labels[k]).count();
        seen += j - i + 1;
        tp += group_pos;
        total += group_pos as f64 * tp as f64 / seen as f64;
        i = j + 1;
    }
    Ok(total / pos as f64)
}

/// Confusion counts at a threshold; a pair is predicted positive iff its
/// score is strictly greater than the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn thresholded_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Confusion, EvalError> {
    check(scores, labels)?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(EvalError::InvalidThreshold(threshold));
    }
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdStrategy {
    /// Maximize F1 over midpoints between consecutive distinct scores (and
    /// half the smallest score); ties go to the larger threshold.
    #[default]
    MaxF1,
    Fixed { value: f64 },
}

pub fn select_threshold(
    scores: &[f64],
    labels: &[bool],
    strategy: ThresholdStrategy,
) -> Result<f64, EvalError> {
    let (pos, neg) = check(scores, labels)?;
    if let ThresholdStrategy::Fixed { value } = strategy {
        if !(0.0..=1.0).contains(&value) {
            return Err(EvalError::InvalidThreshold(value));
        }
        return Ok(value);
    }
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    // Walk thresholds from high to low; after consuming each tie group the
    // predicted-positive set is exactly the scores at or above the group.
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == s {
            j += 1;
        }
        for &k in &order[i..=j] {
            if labels[k] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let next = order.get(j + 1).map(|&k| scores[k]);
        let t = match next {
            Some(n) => (s + n) / 2.0,
            None => s / 2.0,
        };
        let c = Confusion {
            tp,
            fp,
            tn: neg - fp,
            fn_: pos - tp,
        };
        let f1 = c.f1();
        if f1.partial_cmp(&best.0) == Some(Ordering::Greater) {
            best = (f1, t);
        }
        i = j + 1;
    }
    Ok(best.1.clamp(0.0, 1.0))
}

/// The seven reported metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc: f64,
    pub aupr: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 7] =
        ["auc", "aupr", "accuracy", "f1", "precision", "recall", "specificity"];

    pub fn values(&self) -> [f64; 7] {
        [
            self.auc,
            self.aupr,
            self.accuracy,
            self.f1,
            self.precision,
            self.recall,
            self.specificity,
        ]
    }

    pub fn from_values(v: [f64; 7]) -> Self {
        Self {
            auc: v[0],
            aupr: v[1],
            accuracy: v[2],
            f1: v[3],
            precision: v[4],
            recall: v[5],
            specificity: v[6],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub metrics: Metrics,
    pub threshold: f64,
    #[serde(flatten)]
    pub confusion: Confusion,
}

/// All metrics at a given threshold. Ranking metrics need both classes.
pub fn metrics_report(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsReport, EvalError> {
    let confusion = thresholded_metrics(scores, labels, threshold)?;
    Ok(MetricsReport {
        metrics: Metrics {
            auc: roc_auc(scores, labels)?,
            aupr: aupr(scores, labels)?,
            accuracy: confusion.accuracy(),
            f1: confusion.f1(),
            precision: confusion.precision(),
            recall: confusion.recall(),
            specificity: confusion.specificity(),
        },
        threshold,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: [f64; 4] = [0.9, 0.8, 0.7, 0.6];
    const L: [bool; 4] = [true, false, true, false];

    #[test]
    fn small_cases() {
        assert_eq!(roc_auc(&S, &L).unwrap(), 0.75);
        assert!((aupr(&S, &L).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(roc_auc(&[0.3; 4], &L).unwrap(), 0.5);
        assert_eq!(roc_auc(&S, &[true; 4]), Err(EvalError::SingleClass));
        assert_eq!(aupr(&S, &[false; 4]), Err(EvalError::NoPositives));
        let last = [false, false, false, true];
        assert_eq!(aupr(&S, &last).unwrap(), 0.25);
    }

    #[test]
    fn confusion_arithmetic() {
        let c = Confusion {
            tp: 2,
            fp: 1,
            fn_: 1,
            tn: 6,
        };
        assert!((c.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.specificity() - 6.0 / 7.0).abs() < 1e-15);
        assert!((c.accuracy() - 0.8).abs() < 1e-15);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(thresholded_metrics(&S, &L, 0.0).unwrap().specificity(), 0.0);
        assert_eq!(thresholded_metrics(&S, &L, 1.0).unwrap().recall(), 0.0);
    }

    #[test]
    fn threshold_selection() {
        let t = select_threshold(&S, &L, ThresholdStrategy::MaxF1).unwrap();
        assert!((t - 0.65).abs() < 1e-12);
        assert_eq!(
            select_threshold(&S, &L, ThresholdStrategy::Fixed { value: 0.5 }).unwrap(),
            0.5
        );
        let separated = [true, true, false, false];
        let t = select_threshold(&[0.9, 0.8, 0.2, 0.1], &separated, ThresholdStrategy::MaxF1).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
    }
}
