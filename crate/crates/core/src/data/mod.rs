//! Datasets of typed drug pairs, their ingestion, negative sampling, the
//! cross-validation splitters, and a planted-model generator.

mod fingerprint;
pub mod io;
pub mod negatives;
pub mod planted;
pub mod split;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use fingerprint::Fingerprint;
pub use negatives::{sample_negatives, NegativeScope};
pub use planted::generate_planted;
pub use split::{split_by_drug, split_c1, FoldSplit, Task};

use crate::error::{Error, Result};

/// Unordered drug pair with an interaction type, stored with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub p: u32,
    pub q: u32,
    pub k: u32,
}

impl Triple {
    /// Orders the pair canonically. Self-pairs are rejected.
    pub fn canonical(a: usize, b: usize, k: usize) -> Result<Self> {
        if a == b {
            return Err(Error::Argument(format!("self-pair ({a}, {a}) is not a valid interaction")));
        }
        let (p, q) = if a < b { (a, b) } else { (b, a) };
        Ok(Triple {
            p: p as u32,
            q: q as u32,
            k: k as u32,
        })
    }

    pub fn labeled(self, label: u8) -> LabeledTriple {
        LabeledTriple {
            p: self.p as usize,
            q: self.q as usize,
            k: self.k as usize,
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledTriple {
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub label: u8,
}

impl LabeledTriple {
    pub fn triple(&self) -> Triple {
        Triple {
            p: self.p as u32,
            q: self.q as u32,
            k: self.k as u32,
        }
    }

    pub fn target(&self) -> f64 {
        f64::from(self.label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Size of the substructure universe.
    pub n: usize,
    pub drug_ids: Vec<String>,
    pub fingerprints: Vec<Fingerprint>,
    pub type_ids: Vec<String>,
    pub positives: BTreeSet<Triple>,
}

impl Dataset {
    pub fn new(
        n: usize,
        drug_ids: Vec<String>,
        fingerprints: Vec<Fingerprint>,
        type_ids: Vec<String>,
        positives: BTreeSet<Triple>,
    ) -> Result<Self> {
        let ds = Dataset {
            n,
            drug_ids,
            fingerprints,
            type_ids,
            positives,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("substructure universe must be non-empty".into()));
        }
        if self.drug_ids.len() != self.fingerprints.len() {
            return Err(Error::Dimension {
                context: "fingerprints per drug",
                expected: self.drug_ids.len(),
                found: self.fingerprints.len(),
            });
        }
        for fp in &self.fingerprints {
            fp.check_bound(self.n)?;
        }
        let (m, f) = (self.m(), self.f());
        for t in &self.positives {
            if t.p >= t.q {
                return Err(Error::Argument(format!("triple {t:?} is not canonical (p < q)")));
            }
            if t.q as usize >= m {
                return Err(Error::Index {
                    what: "drug",
                    index: t.q as usize,
                    bound: m,
                });
            }
            if t.k as usize >= f {
                return Err(Error::Index {
                    what: "interaction type",
                    index: t.k as usize,
                    bound: f,
                });
            }
        }
        Ok(())
    }

    /// Number of drugs.
    pub fn m(&self) -> usize {
        self.drug_ids.len()
    }

    /// Number of interaction types.
    pub fn f(&self) -> usize {
        self.type_ids.len()
    }

    pub fn is_positive(&self, t: &Triple) -> bool {
        self.positives.contains(t)
    }

    pub fn drug_index(&self, id: &str) -> Option<usize> {
        self.drug_ids.iter().position(|d| d == id)
    }

    pub fn type_index(&self, id: &str) -> Option<usize> {
        self.type_ids.iter().position(|t| t == id)
    }

    /// All positives as labeled triples in canonical order.
    pub fn positive_triples(&self) -> Vec<LabeledTriple> {
        self.positives.iter().map(|t| t.labeled(1)).collect()
    }
}
