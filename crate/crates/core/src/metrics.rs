//! Ranking and thresholded classification metrics, pooled over all test
//! triples of a fold, and their aggregation across folds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decision threshold on raw scores for accuracy and precision.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabel {
    pub score: f64,
    pub label: u8,
}

impl ScoredLabel {
    pub fn new(score: f64, label: u8) -> Self {
        ScoredLabel { score, label }
    }
}

fn check_finite(items: &[ScoredLabel]) -> Result<()> {
    if items.iter().any(|x| !x.score.is_finite()) {
        return Err(Error::Argument("non-finite score".into()));
    }
    Ok(())
}

/// Items sorted by descending score, grouped into runs of equal score.
/// Yields `(positives, negatives)` per group.
fn tie_groups(items: &[ScoredLabel]) -> Vec<(u64, u64)> {
    let mut sorted: Vec<&ScoredLabel> = items.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].score;
        let (mut pos, mut neg) = (0u64, 0u64);
        while i < sorted.len() && sorted[i].score == s {
            if sorted[i].label == 1 {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        groups.push((pos, neg));
    }
    groups
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half.
pub fn roc_auc(items: &[ScoredLabel]) -> Result<f64> {
    check_finite(items)?;
    let pos = items.iter().filter(|x| x.label == 1).count() as u64;
    let neg = items.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "ROC AUC needs at least one positive and one negative".into(),
        ));
    }
    // Twice the Mann-Whitney statistic, kept integral until the final divide.
    let mut twice = 0u64;
    let mut neg_below = neg;
    for (p, n) in tie_groups(items) {
        neg_below -= n;
        twice += 2 * p * neg_below + p * n;
    }
    Ok(twice as f64 / (2 * pos * neg) as f64)
}

/// Area under the stepwise precision-recall curve, `Σ (R_i − R_{i−1}) P_i`
/// over descending score thresholds, tied scores sharing one threshold.
pub fn aupr(items: &[ScoredLabel]) -> Result<f64> {
    check_finite(items)?;
    let pos = items.iter().filter(|x| x.label == 1).count() as u64;
    if pos == 0 {
        return Err(Error::UndefinedMetric("AUPR needs at least one positive".into()));
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for (p, n) in tie_groups(items) {
        tp += p;
        fp += n;
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholded {
    pub accuracy: f64,
    pub precision: f64,
    /// Set when nothing was predicted positive; precision is reported as 0.
    pub precision_undefined: bool,
}

pub fn thresholded_metrics(items: &[ScoredLabel], threshold: f64) -> Result<Thresholded> {
    if items.is_empty() {
        return Err(Error::Argument("thresholded metrics need at least one item".into()));
    }
    check_finite(items)?;
    let (mut tp, mut fp, mut correct) = (0usize, 0usize, 0usize);
    for x in items {
        let predicted = x.score >= threshold;
        let actual = x.label == 1;
        if predicted == actual {
            correct += 1;
        }
        if predicted {
            if actual {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let undefined = tp + fp == 0;
    Ok(Thresholded {
        accuracy: correct as f64 / items.len() as f64,
        precision: if undefined { 0.0 } else { tp as f64 / (tp + fp) as f64 },
        precision_undefined: undefined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub auc: f64,
    pub aupr: f64,
    pub acc: f64,
    pub pre: f64,
    pub test_size: usize,
    #[serde(default)]
    pub pre_undefined: bool,
}

/// All four metrics for one fold's scored test set.
pub fn evaluate_fold(fold: usize, items: &[ScoredLabel], threshold: f64) -> Result<FoldMetrics> {
    let t = thresholded_metrics(items, threshold)?;
    Ok(FoldMetrics {
        fold,
        auc: roc_auc(items)?,
        aupr: aupr(items)?,
        acc: t.accuracy,
        pre: t.precision,
        test_size: items.len(),
        pre_undefined: t.precision_undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub auc: f64,
    pub aupr: f64,
    pub acc: f64,
    pub pre: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub fold: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    /// Metrics are pooled over all test triples of a fold.
    pub averaging: String,
    pub folds: Vec<FoldMetrics>,
    pub skipped: Vec<SkippedFold>,
    pub mean: MetricSummary,
    /// Sample standard deviation across evaluated folds (0 for one fold).
    pub std: MetricSummary,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Unweighted mean and sample standard deviation of each metric.
pub fn aggregate(task: &str, folds: Vec<FoldMetrics>, skipped: Vec<SkippedFold>) -> Result<EvalReport> {
    if folds.is_empty() {
        return Err(Error::UndefinedAggregate(skipped.len()));
    }
    let col = |f: fn(&FoldMetrics) -> f64| -> (f64, f64) { mean_std(&folds.iter().map(f).collect::<Vec<_>>()) };
    let (auc, auc_s) = col(|f| f.auc);
    let (aupr, aupr_s) = col(|f| f.aupr);
    let (acc, acc_s) = col(|f| f.acc);
    let (pre, pre_s) = col(|f| f.pre);
    Ok(EvalReport {
        task: task.to_string(),
        averaging: "micro".to_string(),
        folds,
        skipped,
        mean: MetricSummary { auc, aupr, acc, pre },
        std: MetricSummary {
            auc: auc_s,
            aupr: aupr_s,
            acc: acc_s,
            pre: pre_s,
        },
    })
}
