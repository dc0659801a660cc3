//! End-to-end runs: training on a whole dataset and k-fold evaluation.

use std::collections::HashSet;

use log::{info, warn};
use rayon::prelude::*;

use crate::data::{sample_negatives, split_by_drug, split_c1, Dataset, FoldSplit, LabeledTriple, NegativeScope, Task};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, evaluate_fold, EvalReport, FoldMetrics, ScoredLabel, SkippedFold, DEFAULT_THRESHOLD};
use crate::model::{train, FactorModel, TrainConfig, TrainReport};
use crate::seed::{self, Stream};

/// All positives plus `negative_ratio` sampled negatives over every drug.
pub fn training_set(dataset: &Dataset, cfg: &TrainConfig) -> Result<Vec<LabeledTriple>> {
    let drugs: Vec<usize> = (0..dataset.m()).collect();
    let mut triples = dataset.positive_triples();
    let negatives = sample_negatives(
        dataset,
        NegativeScope::Within(&drugs),
        triples.len(),
        cfg.negative_ratio,
        seed::derive(cfg.seed, Stream::TrainNegatives),
        &HashSet::new(),
    )?;
    triples.extend(negatives);
    Ok(triples)
}

pub fn train_full(dataset: &Dataset, cfg: &TrainConfig) -> Result<(FactorModel, TrainReport)> {
    let triples = training_set(dataset, cfg)?;
    train(dataset, &triples, cfg)
}

pub fn score_triples(model: &FactorModel, dataset: &Dataset, triples: &[LabeledTriple]) -> Result<Vec<ScoredLabel>> {
    triples
        .iter()
        .map(|t| {
            let s = model.score(&dataset.fingerprints[t.p], &dataset.fingerprints[t.q], t.k)?;
            Ok(ScoredLabel::new(s, t.label))
        })
        .collect()
}

pub fn make_splits(dataset: &Dataset, task: Task, folds: usize, cfg: &TrainConfig) -> Result<Vec<FoldSplit>> {
    match task {
        Task::C1 => split_c1(dataset, folds, cfg.seed, cfg.negative_ratio),
        Task::C2 | Task::C3 => split_by_drug(dataset, folds, cfg.seed, task, cfg.negative_ratio),
    }
}

enum FoldOutcome {
    Done(FoldMetrics),
    Skipped(SkippedFold),
}

fn run_fold(dataset: &Dataset, split: &FoldSplit, cfg: &TrainConfig) -> Result<FoldOutcome> {
    let fold = split.fold_index;
    if split.is_empty() {
        return Ok(FoldOutcome::Skipped(SkippedFold {
            fold,
            reason: "no eligible test triples".into(),
        }));
    }
    let fold_cfg = TrainConfig {
        seed: seed::for_fold(cfg.seed, fold),
        ..cfg.clone()
    };
    let (model, report) = train(dataset, &split.train, &fold_cfg)?;
    let scored = score_triples(&model, dataset, &split.test)?;
    match evaluate_fold(fold, &scored, DEFAULT_THRESHOLD) {
        Ok(m) => {
            info!(
                "{} fold {fold}: loss {:.4} auc {:.4} aupr {:.4}",
                split.task, report.final_loss, m.auc, m.aupr
            );
            Ok(FoldOutcome::Done(m))
        }
        Err(Error::UndefinedMetric(reason)) => {
            warn!("{} fold {fold} skipped: {reason}", split.task);
            Ok(FoldOutcome::Skipped(SkippedFold { fold, reason }))
        }
        Err(e) => Err(e),
    }
}

/// Trains one fresh model per fold and aggregates the test metrics.
///
/// Folds run on up to `threads` workers; results are reduced in fold order,
/// so the report does not depend on scheduling.
pub fn cross_validate(
    dataset: &Dataset,
    task: Task,
    folds: usize,
    cfg: &TrainConfig,
    threads: usize,
) -> Result<EvalReport> {
    cfg.validate()?;
    let splits = make_splits(dataset, task, folds, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<FoldOutcome>> =
        pool.install(|| splits.par_iter().map(|s| run_fold(dataset, s, cfg)).collect());
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o? {
            FoldOutcome::Done(m) => done.push(m),
            FoldOutcome::Skipped(s) => skipped.push(s),
        }
    }
    aggregate(&task.to_string(), done, skipped)
}
