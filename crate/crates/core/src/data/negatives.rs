use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, LabeledTriple, Triple};
use crate::error::{Error, Result};

/// Drug pairs a negative may be drawn from. Every interaction type is in scope.
#[derive(Debug, Clone, Copy)]
pub enum NegativeScope<'a> {
    /// Pairs of two distinct drugs from the list.
    Within(&'a [usize]),
    /// Pairs with one drug from each list. The lists must be disjoint.
    Across(&'a [usize], &'a [usize]),
}

impl NegativeScope<'_> {
    fn pair_count(&self) -> usize {
        match *self {
            NegativeScope::Within(d) => d.len() * d.len().saturating_sub(1) / 2,
            NegativeScope::Across(a, b) => a.len() * b.len(),
        }
    }

    fn membership(&self, m: usize) -> (Vec<bool>, Vec<bool>) {
        let mark = |ds: &[usize]| {
            let mut v = vec![false; m];
            for &d in ds {
                v[d] = true;
            }
            v
        };
        match *self {
            NegativeScope::Within(d) => (mark(d), mark(d)),
            NegativeScope::Across(a, b) => (mark(a), mark(b)),
        }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.pair_count());
        match *self {
            NegativeScope::Within(d) => {
                for (x, &a) in d.iter().enumerate() {
                    for &b in &d[x + 1..] {
                        out.push((a, b));
                    }
                }
            }
            NegativeScope::Across(xs, ys) => {
                for &a in xs {
                    for &b in ys {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    fn draw_pair(&self, rng: &mut ChaCha8Rng) -> (usize, usize) {
        match *self {
            NegativeScope::Within(d) => {
                let x = rng.gen_range(0..d.len());
                let mut y = rng.gen_range(0..d.len() - 1);
                if y >= x {
                    y += 1;
                }
                (d[x], d[y])
            }
            NegativeScope::Across(a, b) => (a[rng.gen_range(0..a.len())], b[rng.gen_range(0..b.len())]),
        }
    }
}

/// `⌈ratio · count⌉`, tolerant of representation error in `ratio`.
pub fn negative_count(ratio: f64, count: usize) -> usize {
    let x = ratio * count as f64;
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize
}

/// Uniformly samples `⌈ratio · positives_in_scope⌉` distinct canonical
/// triples from `scope` that are neither dataset positives nor in `exclude`.
///
/// Sparse requests use rejection sampling; dense ones enumerate the candidate
/// space and take a random subset. The result is sorted.
pub fn sample_negatives(
    dataset: &Dataset,
    scope: NegativeScope<'_>,
    positives_in_scope: usize,
    ratio: f64,
    seed: u64,
    exclude: &HashSet<Triple>,
) -> Result<Vec<LabeledTriple>> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Config(format!("negative ratio must be positive, got {ratio}")));
    }
    if let NegativeScope::Across(a, b) = scope {
        let set: HashSet<_> = a.iter().collect();
        if b.iter().any(|d| set.contains(d)) {
            return Err(Error::Argument("cross scope drug lists overlap".into()));
        }
    }
    let requested = negative_count(ratio, positives_in_scope);
    if requested == 0 {
        return Ok(Vec::new());
    }
    let f = dataset.f();
    let m = dataset.m();
    let (left, right) = scope.membership(m);
    let in_scope = |t: &Triple| {
        let (p, q) = (t.p as usize, t.q as usize);
        (left[p] && right[q]) || (left[q] && right[p])
    };
    let blocked = dataset.positives.iter().filter(|t| in_scope(t)).count()
        + exclude
            .iter()
            .filter(|t| in_scope(t) && !dataset.positives.contains(t))
            .count();
    let available = (scope.pair_count() * f).saturating_sub(blocked);
    if requested > available {
        return Err(Error::SamplingExhausted {
            requested,
            available,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let is_free = |t: &Triple| !dataset.positives.contains(t) && !exclude.contains(t);
    let chosen: BTreeSet<Triple> = if requested * 2 > available {
        let mut candidates: Vec<Triple> = scope
            .pairs()
            .into_iter()
            .flat_map(|(a, b)| (0..f).map(move |k| Triple::canonical(a, b, k)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(is_free)
            .collect();
        let (picked, _) = candidates.partial_shuffle(&mut rng, requested);
        picked.iter().copied().collect()
    } else {
        let mut chosen = BTreeSet::new();
        while chosen.len() < requested {
            let (a, b) = scope.draw_pair(&mut rng);
            let k = rng.gen_range(0..f);
            let t = Triple::canonical(a, b, k)?;
            if is_free(&t) {
                chosen.insert(t);
            }
        }
        chosen
    };
    Ok(chosen.into_iter().map(|t| t.labeled(0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Fingerprint;

    fn dataset(m: usize, f: usize, positives: impl IntoIterator<Item = Triple>) -> Dataset {
        Dataset::new(
            4,
            (0..m).map(|i| format!("D{i}")).collect(),
            vec![Fingerprint::empty(); m],
            (0..f).map(|i| format!("T{i}")).collect(),
            positives.into_iter().collect(),
        )
        .unwrap()
    }

    #[test]
    fn balanced_negatives_avoid_positives() {
        let mut pos = Vec::new();
        for p in 0..20u32 {
            for k in 0..5u32 {
                pos.push(Triple { p, q: p + 1, k });
            }
        }
        let ds = dataset(30, 5, pos);
        assert_eq!(ds.positives.len(), 100);
        let drugs: Vec<usize> = (0..30).collect();
        let negs = sample_negatives(&ds, NegativeScope::Within(&drugs), 100, 1.0, 9, &HashSet::new()).unwrap();
        assert_eq!(negs.len(), 100);
        let uniq: HashSet<_> = negs.iter().map(|t| t.triple()).collect();
        assert_eq!(uniq.len(), 100);
        for t in &negs {
            assert_eq!(t.label, 0);
            assert!(t.p < t.q);
            assert!(!ds.is_positive(&t.triple()));
        }
        let again = sample_negatives(&ds, NegativeScope::Within(&drugs), 100, 1.0, 9, &HashSet::new()).unwrap();
        assert_eq!(negs, again);
    }

    #[test]
    fn full_space_is_exhausted() {
        let pos = [Triple { p: 0, q: 1, k: 0 }, Triple { p: 0, q: 1, k: 1 }];
        let ds = dataset(2, 2, pos);
        let drugs = [0, 1];
        let err = sample_negatives(&ds, NegativeScope::Within(&drugs), 2, 1.0, 0, &HashSet::new()).unwrap_err();
        assert!(matches!(err, Error::SamplingExhausted { requested: 2, available: 0 }));
    }

    #[test]
    fn dense_request_uses_whole_space() {
        let ds = dataset(4, 1, [Triple { p: 0, q: 1, k: 0 }]);
        let drugs = [0, 1, 2, 3];
        // 6 pairs, 1 positive, 5 free
        let negs = sample_negatives(&ds, NegativeScope::Within(&drugs), 5, 1.0, 3, &HashSet::new()).unwrap();
        assert_eq!(negs.len(), 5);
        assert!(negs.iter().all(|t| !(t.p == 0 && t.q == 1)));
    }

    #[test]
    fn across_scope_and_exclusions() {
        let ds = dataset(6, 2, []);
        let a = [0, 1, 2];
        let b = [3, 4, 5];
        let mut exclude = HashSet::new();
        exclude.insert(Triple { p: 0, q: 3, k: 0 });
        let negs = sample_negatives(&ds, NegativeScope::Across(&a, &b), 17, 1.0, 1, &exclude).unwrap();
        assert_eq!(negs.len(), 17);
        for t in &negs {
            assert!(t.p < 3 && t.q >= 3);
            assert_ne!(t.triple(), Triple { p: 0, q: 3, k: 0 });
        }
        assert!(sample_negatives(&ds, NegativeScope::Across(&a, &b), 18, 1.0, 1, &exclude).is_err());
        assert!(sample_negatives(&ds, NegativeScope::Across(&a, &a), 1, 1.0, 1, &exclude).is_err());
    }

    #[test]
    fn count_rounds_up() {
        assert_eq!(negative_count(1.0, 100), 100);
        assert_eq!(negative_count(0.5, 3), 2);
        assert_eq!(negative_count(0.1, 90), 9);
        assert_eq!(negative_count(2.0, 0), 0);
    }
}
