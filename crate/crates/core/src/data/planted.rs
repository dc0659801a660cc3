//! Synthetic datasets labeled by a hidden factor model.
//!
//! Every canonical triple is scored by the planted model and the top
//! `density` fraction become positives, so the planted model itself ranks
//! the data perfectly.

use std::collections::{BTreeSet, HashSet};

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use rand::seq::index;
use rand::Rng;

use super::negatives::negative_count;
use super::{Dataset, Fingerprint, Triple};
use crate::error::{Error, Result};
use crate::model::FactorModel;
use crate::seed::{self, Stream};

const MIN_BITS: usize = 3;
const MAX_BITS: usize = 12;
const FINGERPRINT_RETRIES: usize = 64;

/// Number of positives a planted dataset with these sizes receives.
pub fn planted_positive_count(m: usize, f: usize, density: f64) -> usize {
    negative_count(density, m * (m - 1) / 2 * f)
}

pub fn generate_planted(
    n: usize,
    m: usize,
    f: usize,
    rank: usize,
    density: f64,
    seed: u64,
) -> Result<(Dataset, FactorModel)> {
    if n == 0 || m < 2 || f == 0 || rank == 0 {
        return Err(Error::Config(format!(
            "planted dims must satisfy n ≥ 1, m ≥ 2, f ≥ 1, rank ≥ 1 (got n={n}, m={m}, f={f}, rank={rank})"
        )));
    }
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::Config(format!("density must lie in (0, 1), got {density}")));
    }
    let total = m * (m - 1) / 2 * f;
    let count = planted_positive_count(m, f, density);
    if count == 0 || count >= total {
        return Err(Error::Config(format!(
            "density {density} yields {count} positives out of {total} triples"
        )));
    }

    let mut rng = seed::rng(seed, Stream::Planted);
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    let a = Array2::from_shape_simple_fn((n, rank), || unit.sample(&mut rng));
    let c = Array2::from_shape_simple_fn((f, rank), || unit.sample(&mut rng));
    let model = FactorModel::new(a, c, Array1::ones(rank), 0.0)?;

    let (lo, hi) = (MIN_BITS.min(n), MAX_BITS.min(n));
    let mut seen = HashSet::new();
    let mut fingerprints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut fp = Fingerprint::empty();
        for _ in 0..FINGERPRINT_RETRIES {
            let size = rng.gen_range(lo..=hi);
            fp = Fingerprint::new(index::sample(&mut rng, n, size), n)?;
            if !seen.contains(&fp) {
                break;
            }
        }
        seen.insert(fp.clone());
        fingerprints.push(fp);
    }

    let mut scored = Vec::with_capacity(total);
    for p in 0..m {
        for q in p + 1..m {
            let scores = model.score_all_types(&fingerprints[p], &fingerprints[q])?;
            for (k, s) in scores.into_iter().enumerate() {
                scored.push((s, Triple::canonical(p, q, k)?));
            }
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let positives: BTreeSet<Triple> = scored[..count].iter().map(|&(_, t)| t).collect();

    let dataset = Dataset::new(
        n,
        (0..m).map(|i| format!("D{i}")).collect(),
        fingerprints,
        (0..f).map(|i| format!("T{i}")).collect(),
        positives,
    )?;
    Ok((dataset, model))
}
