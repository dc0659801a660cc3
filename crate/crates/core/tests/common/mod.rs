//! Oracles and fixtures shared by the integration tests. Everything here is
//! computed independently of the library's fast paths.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stnn_ddi::metrics::ScoredLabel;
use stnn_ddi::model::{init_model, TrainConfig};
use stnn_ddi::{Dataset, FactorModel, Fingerprint, LabeledTriple, Triple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a − b| ≤ rel·max(|a|, |b|)`, with a 1e-12 absolute floor for values
/// that cancel to ~0.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    let d = (a - b).abs();
    d <= rel * a.abs().max(b.abs()) || d <= 1e-12
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize, f: usize, rank: usize, bias: f64) -> FactorModel {
    let cfg = TrainConfig {
        rank,
        seed: rng.gen(),
        ..TrainConfig::default()
    };
    let mut m = init_model(n, f, &cfg).unwrap();
    m.a.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
    m.c.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
    m.w_lambda.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
    m.bias = bias;
    m
}

pub fn random_fp(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Fingerprint {
    Fingerprint::new((0..n).filter(|_| rng.gen_bool(p)), n).unwrap()
}

/// Twice the Mann-Whitney count over every positive/negative pair.
pub fn auc_by_pairs(items: &[ScoredLabel]) -> f64 {
    let pos: Vec<f64> = items.iter().filter(|x| x.label == 1).map(|x| x.score).collect();
    let neg: Vec<f64> = items.iter().filter(|x| x.label == 0).map(|x| x.score).collect();
    let mut twice = 0u64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                twice += 2;
            } else if p == n {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pos.len() as u64 * neg.len() as u64) as f64
}

/// Stepwise precision-recall area from a full rescan at every distinct
/// threshold, highest first.
pub fn aupr_by_thresholds(items: &[ScoredLabel]) -> f64 {
    let total_pos = items.iter().filter(|x| x.label == 1).count() as u64;
    let mut thresholds: Vec<f64> = items.iter().map(|x| x.score).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for t in thresholds {
        let tp = items.iter().filter(|x| x.score >= t && x.label == 1).count() as u64;
        let fp = items.iter().filter(|x| x.score >= t && x.label == 0).count() as u64;
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    area
}

/// Central finite difference of `loss` in every parameter, in the order
/// A (row-major), C (row-major), w, bias.
pub fn finite_difference_grad<F>(model: &FactorModel, h: f64, loss: F) -> Vec<f64>
where
    F: Fn(&FactorModel) -> f64,
{
    let mut out = Vec::new();
    let mut probe = model.clone();
    let diff = |probe: &mut FactorModel, get: &dyn Fn(&mut FactorModel) -> &mut f64| {
        let orig = *get(probe);
        *get(probe) = orig + h;
        let up = loss(probe);
        *get(probe) = orig - h;
        let down = loss(probe);
        *get(probe) = orig;
        (up - down) / (2.0 * h)
    };
    let (n, f, r) = (model.n(), model.f(), model.rank());
    for i in 0..n {
        for x in 0..r {
            out.push(diff(&mut probe, &|m| &mut m.a[[i, x]]));
        }
    }
    for k in 0..f {
        for x in 0..r {
            out.push(diff(&mut probe, &|m| &mut m.c[[k, x]]));
        }
    }
    for x in 0..r {
        out.push(diff(&mut probe, &|m| &mut m.w_lambda[x]));
    }
    out.push(diff(&mut probe, &|m| &mut m.bias));
    out
}

pub fn random_batch(rng: &mut ChaCha8Rng, drugs: usize, f: usize, len: usize) -> Vec<LabeledTriple> {
    (0..len)
        .map(|i| {
            let p = rng.gen_range(0..drugs);
            let mut q = rng.gen_range(0..drugs - 1);
            if q >= p {
                q += 1;
            }
            LabeledTriple {
                p,
                q,
                k: rng.gen_range(0..f),
                label: (i % 2) as u8,
            }
        })
        .collect()
}

/// Random positives over 30 to 49 drugs and 2 or 3 types, sparse enough that
/// every drug-split fold has room for its matched negatives.
pub fn random_dataset(seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let m = rng.gen_range(30..50);
    let f = rng.gen_range(2..4);
    let count = rng.gen_range(40..120);
    let mut pos = std::collections::BTreeSet::new();
    while pos.len() < count {
        let a = rng.gen_range(0..m);
        let b = rng.gen_range(0..m);
        if a != b {
            pos.insert(Triple::canonical(a, b, rng.gen_range(0..f)).unwrap());
        }
    }
    Dataset::new(
        10,
        (0..m).map(|i| format!("D{i}")).collect(),
        (0..m).map(|_| random_fp(&mut rng, 10, 0.3)).collect(),
        (0..f).map(|i| format!("T{i}")).collect(),
        pos,
    )
    .unwrap()
}
