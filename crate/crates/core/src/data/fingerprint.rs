use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Set of substructure indices present in a drug.
///
/// Bits are kept strictly increasing, so iteration order is stable and two
/// fingerprints with the same set compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    bits: Vec<u32>,
}

impl Fingerprint {
    /// Builds a fingerprint from arbitrary indices, sorting and deduplicating.
    /// Every index must be below `n`.
    pub fn new<I>(indices: I, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        Self::with_duplicate_count(indices, n).map(|(fp, _)| fp)
    }

    /// Same as [`Fingerprint::new`], also returning how many repeated indices
    /// were collapsed.
    pub fn with_duplicate_count<I>(indices: I, n: usize) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut bits = Vec::new();
        for i in indices {
            if i >= n {
                return Err(Error::Index {
                    what: "substructure",
                    index: i,
                    bound: n,
                });
            }
            bits.push(i as u32);
        }
        let before = bits.len();
        bits.sort_unstable();
        bits.dedup();
        let dupes = before - bits.len();
        Ok((Fingerprint { bits }, dupes))
    }

    pub fn empty() -> Self {
        Fingerprint::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.binary_search(&(i as u32)).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.bits.iter().map(|&b| b as usize)
    }

    /// Largest set index, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.bits.last().map(|&b| b as usize)
    }

    /// Dense 0/1 indicator vector of length `n`.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for i in self.iter() {
            if i < n {
                v[i] = 1.0;
            }
        }
        v
    }

    pub(crate) fn check_bound(&self, n: usize) -> Result<()> {
        match self.max_index() {
            Some(i) if i >= n => Err(Error::Index {
                what: "substructure",
                index: i,
                bound: n,
            }),
            _ => Ok(()),
        }
    }
}
