//! Attribution of scores to substructure pairs.
//!
//! The learned factors define a reconstructed entry for every
//! (substructure, substructure, type) triple. A drug-pair score is the bias
//! plus the sum of those entries over the two fingerprints, so ranking the
//! entries shows which substructure pairs drive a prediction.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::Fingerprint;
use crate::error::{Error, Result};
use crate::model::FactorModel;

/// Below this magnitude the attributable total is treated as zero.
const SHARE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstructurePairScore {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label_i: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label_j: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplainMode {
    TypeGlobal,
    Restricted,
    DrugPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainContext {
    pub mode: ExplainMode,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub type_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub drug_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub drug_b: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub context: ExplainContext,
    /// Highest entries first; equal values ordered by `(i, j)`.
    pub pairs: Vec<SubstructurePairScore>,
    /// Most negative entries first; empty unless requested.
    #[serde(default)]
    pub bottom: Vec<SubstructurePairScore>,
    /// Sum of everything attributable in this context (score minus bias for
    /// a drug pair).
    pub total: f64,
    pub bias: f64,
    /// Fraction of `total` covered by `pairs`; `None` when `total` is ~0.
    pub cumulative_share: Option<f64>,
}

impl Explanation {
    pub fn with_labels(mut self, labels: &HashMap<usize, String>) -> Self {
        for p in self.pairs.iter_mut().chain(self.bottom.iter_mut()) {
            p.label_i = labels.get(&p.i).cloned();
            p.label_j = labels.get(&p.j).cloned();
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn check_index(what: &'static str, index: usize, bound: usize) -> Result<()> {
    if index >= bound {
        return Err(Error::Index { what, index, bound });
    }
    Ok(())
}

/// `w · C[k]` elementwise, shared by every entry of one slice.
fn type_weights(model: &FactorModel, k: usize) -> Vec<f64> {
    model
        .w_lambda
        .iter()
        .zip(model.c.row(k))
        .map(|(w, c)| w * c)
        .collect()
}

#[inline]
fn entry(model: &FactorModel, wc: &[f64], i: usize, j: usize) -> f64 {
    let (ai, aj) = (model.a.row(i), model.a.row(j));
    let mut s = 0.0;
    for r in 0..wc.len() {
        s += (ai[r] * aj[r]) * wc[r];
    }
    s
}

/// Reconstructed entry `Σ_r w_r A[i,r] A[j,r] C[k,r]`, bias excluded.
pub fn ssi_value(model: &FactorModel, i: usize, j: usize, k: usize) -> Result<f64> {
    check_index("substructure", i, model.n())?;
    check_index("substructure", j, model.n())?;
    check_index("interaction type", k, model.f())?;
    Ok(entry(model, &type_weights(model, k), i, j))
}

fn descending(a: &SubstructurePairScore, b: &SubstructurePairScore) -> Ordering {
    b.value.total_cmp(&a.value).then((a.i, a.j).cmp(&(b.i, b.j)))
}

fn ascending(a: &SubstructurePairScore, b: &SubstructurePairScore) -> Ordering {
    a.value.total_cmp(&b.value).then((a.i, a.j).cmp(&(b.i, b.j)))
}

fn take_sorted(
    all: &mut [SubstructurePairScore],
    count: usize,
    cmp: fn(&SubstructurePairScore, &SubstructurePairScore) -> Ordering,
) -> Vec<SubstructurePairScore> {
    let count = count.min(all.len());
    if count == 0 {
        return Vec::new();
    }
    if count < all.len() {
        all.select_nth_unstable_by(count - 1, cmp);
    }
    let mut out = all[..count].to_vec();
    out.sort_by(cmp);
    out
}

fn share(listed: f64, total: f64) -> Option<f64> {
    (total.abs() >= SHARE_EPSILON).then(|| listed / total)
}

/// Ranks the entries of slice `k`.
///
/// Without a universe the scan covers canonical pairs `i ≤ j` of the full
/// slice; each off-diagonal pair stands for both symmetric entries when
/// computing the cumulative share. With a universe `(left, right)` every
/// directed pair `(i ∈ left, j ∈ right)` is ranked.
pub fn top_pairs_for_type(
    model: &FactorModel,
    k: usize,
    top_k: usize,
    bottom_k: usize,
    universe: Option<(&[usize], &[usize])>,
) -> Result<Explanation> {
    if top_k == 0 {
        return Err(Error::Argument("top_k must be at least 1".into()));
    }
    check_index("interaction type", k, model.f())?;
    let wc = type_weights(model, k);
    let mk = |i, j, value| SubstructurePairScore {
        i,
        j,
        k,
        value,
        label_i: None,
        label_j: None,
    };

    let (mut all, mode) = match universe {
        None => {
            let n = model.n();
            let mut v = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                for j in i..n {
                    v.push(mk(i, j, entry(model, &wc, i, j)));
                }
            }
            (v, ExplainMode::TypeGlobal)
        }
        Some((left, right)) => {
            if left.is_empty() || right.is_empty() {
                return Err(Error::Argument("empty substructure universe".into()));
            }
            let mut v = Vec::with_capacity(left.len() * right.len());
            for &i in left {
                check_index("substructure", i, model.n())?;
                for &j in right {
                    check_index("substructure", j, model.n())?;
                    v.push(mk(i, j, entry(model, &wc, i, j)));
                }
            }
            (v, ExplainMode::Restricted)
        }
    };

    let weight = |p: &SubstructurePairScore| {
        if mode == ExplainMode::TypeGlobal && p.i != p.j {
            2.0 * p.value
        } else {
            p.value
        }
    };
    let total: f64 = all.iter().map(weight).sum();
    let pairs = take_sorted(&mut all, top_k, descending);
    let bottom = take_sorted(&mut all, bottom_k, ascending);
    let listed: f64 = pairs.iter().map(weight).sum();
    Ok(Explanation {
        context: ExplainContext {
            mode,
            k,
            type_id: None,
            drug_a: None,
            drug_b: None,
        },
        pairs,
        bottom,
        total,
        bias: model.bias,
        cumulative_share: share(listed, total),
    })
}

/// Ranks the substructure pairs `(i ∈ fp_p, j ∈ fp_q)` behind one drug-pair
/// score. The listed values plus the bias reproduce the score when the whole
/// cross product is listed.
pub fn explain_pair(
    model: &FactorModel,
    fp_p: &Fingerprint,
    fp_q: &Fingerprint,
    k: usize,
    top_k: usize,
    bottom_k: usize,
) -> Result<Explanation> {
    if fp_p.is_empty() || fp_q.is_empty() {
        return Err(Error::Argument("explain_pair needs non-empty fingerprints".into()));
    }
    let left: Vec<usize> = fp_p.iter().collect();
    let right: Vec<usize> = fp_q.iter().collect();
    let mut e = top_pairs_for_type(model, k, top_k, bottom_k, Some((&left, &right)))?;
    let total = model.score(fp_p, fp_q, k)? - model.bias;
    let listed: f64 = e.pairs.iter().map(|p| p.value).sum();
    e.context.mode = ExplainMode::DrugPair;
    e.total = total;
    e.cumulative_share = share(listed, total);
    Ok(e)
}
