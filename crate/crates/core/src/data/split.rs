//! Cross-validation splitters for the three prediction settings.
//!
//! * C1 partitions positive triples: test pairs are unseen, test drugs are not.
//! * C2 and C3 partition drugs into known and new. Training sees only triples
//!   among known drugs; C2 tests pairs of one new and one known drug, C3 pairs
//!   of two new drugs.
//!
//! Both drug-level settings derive the drug partition from the seed alone, so
//! C2 and C3 runs with the same seed hold out the same drugs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::negatives::{sample_negatives, NegativeScope};
use super::{Dataset, LabeledTriple, Triple};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    C1,
    C2,
    C3,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::C1 => "C1",
            Task::C2 => "C2",
            Task::C3 => "C3",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Task::C1),
            "c2" => Ok(Task::C2),
            "c3" => Ok(Task::C3),
            _ => Err(Error::Argument(format!("unknown task `{s}` (expected c1, c2 or c3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldSplit {
    pub task: Task,
    pub fold_index: usize,
    pub train: Vec<LabeledTriple>,
    pub test: Vec<LabeledTriple>,
    /// Held-out drugs (empty for C1).
    pub new_drugs: Vec<usize>,
}

impl FoldSplit {
    /// A fold with nothing to test is excluded from aggregation.
    pub fn is_empty(&self) -> bool {
        self.test.is_empty()
    }
}

/// Sizes of `folds` near-equal parts of `len` items; larger parts first.
pub fn partition_sizes(len: usize, folds: usize) -> Vec<usize> {
    let base = len / folds;
    let extra = len % folds;
    (0..folds).map(|i| base + usize::from(i < extra)).collect()
}

fn partition<T: Clone>(items: &[T], folds: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for size in partition_sizes(items.len(), folds) {
        out.push(items[start..start + size].to_vec());
        start += size;
    }
    out
}

fn check_folds(folds: usize) -> Result<()> {
    if folds < 2 {
        return Err(Error::Split(format!("need at least 2 folds, got {folds}")));
    }
    Ok(())
}

pub fn split_c1(dataset: &Dataset, folds: usize, seed: u64, neg_ratio: f64) -> Result<Vec<FoldSplit>> {
    check_folds(folds)?;
    let mut positives: Vec<Triple> = dataset.positives.iter().copied().collect();
    if positives.len() < folds {
        return Err(Error::Split(format!(
            "{} positive triples cannot fill {folds} folds",
            positives.len()
        )));
    }
    positives.shuffle(&mut seed::rng(seed, Stream::Split));
    let parts = partition(&positives, folds);
    let all_drugs: Vec<usize> = (0..dataset.m()).collect();
    let scope = NegativeScope::Within(&all_drugs);

    let mut out = Vec::with_capacity(folds);
    for (fold, test_pos) in parts.iter().enumerate() {
        let fold_seed = seed::for_fold(seed, fold);
        let mut train: Vec<LabeledTriple> = parts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fold)
            .flat_map(|(_, p)| p.iter().map(|t| t.labeled(1)))
            .collect();
        let n_train_pos = train.len();
        let train_neg = sample_negatives(
            dataset,
            scope,
            n_train_pos,
            neg_ratio,
            seed::derive(fold_seed, Stream::TrainNegatives),
            &HashSet::new(),
        )?;
        let used: HashSet<Triple> = train_neg.iter().map(LabeledTriple::triple).collect();
        let test_neg = sample_negatives(
            dataset,
            scope,
            test_pos.len(),
            1.0,
            seed::derive(fold_seed, Stream::TestNegatives),
            &used,
        )?;
        train.extend(train_neg);
        let mut test: Vec<LabeledTriple> = test_pos.iter().map(|t| t.labeled(1)).collect();
        test.extend(test_neg);
        out.push(FoldSplit {
            task: Task::C1,
            fold_index: fold,
            train,
            test,
            new_drugs: Vec::new(),
        });
    }
    Ok(out)
}

/// Partition of drugs into held-out groups shared by the C2 and C3 splitters.
pub fn drug_partition(m: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut drugs: Vec<usize> = (0..m).collect();
    drugs.shuffle(&mut seed::rng(seed, Stream::Split));
    partition(&drugs, folds)
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect()
}

pub fn split_by_drug(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
    task: Task,
    neg_ratio: f64,
) -> Result<Vec<FoldSplit>> {
    check_folds(folds)?;
    if task == Task::C1 {
        return Err(Error::Argument("split_by_drug handles C2 and C3 only".into()));
    }
    let m = dataset.m();
    if m < folds {
        return Err(Error::Split(format!("{m} drugs cannot fill {folds} folds")));
    }
    let groups = drug_partition(m, folds, seed);

    let mut out = Vec::with_capacity(folds);
    for (fold, new_drugs) in groups.into_iter().enumerate() {
        let fold_seed = seed::for_fold(seed, fold);
        let mut is_new = vec![false; m];
        for &d in &new_drugs {
            is_new[d] = true;
        }
        let known: Vec<usize> = (0..m).filter(|&d| !is_new[d]).collect();
        let new_count = |t: &Triple| usize::from(is_new[t.p as usize]) + usize::from(is_new[t.q as usize]);

        let mut train: Vec<LabeledTriple> = dataset
            .positives
            .iter()
            .filter(|t| new_count(t) == 0)
            .map(|t| t.labeled(1))
            .collect();
        if train.is_empty() {
            return Err(Error::Split(format!("fold {fold} has no training positives among known drugs")));
        }
        let train_neg = sample_negatives(
            dataset,
            NegativeScope::Within(&known),
            train.len(),
            neg_ratio,
            seed::derive(fold_seed, Stream::TrainNegatives),
            &HashSet::new(),
        )?;
        train.extend(train_neg);

        let wanted = if task == Task::C2 { 1 } else { 2 };
        let mut test: Vec<LabeledTriple> = dataset
            .positives
            .iter()
            .filter(|t| new_count(t) == wanted)
            .map(|t| t.labeled(1))
            .collect();
        if test.is_empty() {
            warn!("{task} fold {fold}: no eligible test triples; fold will be skipped");
        } else {
            let scope = if task == Task::C2 {
                NegativeScope::Across(&new_drugs, &known)
            } else {
                NegativeScope::Within(&new_drugs)
            };
            let test_neg = sample_negatives(
                dataset,
                scope,
                test.len(),
                1.0,
                seed::derive(fold_seed, Stream::TestNegatives),
                &HashSet::new(),
            )?;
            test.extend(test_neg);
        }
        out.push(FoldSplit {
            task,
            fold_index: fold,
            train,
            test,
            new_drugs,
        });
    }
    Ok(out)
}
