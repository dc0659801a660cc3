//! Tab-separated dataset files.
//!
//! * fingerprints: `drug_id<TAB>i,j,k` (second field may be empty)
//! * triples: `drug_a<TAB>drug_b<TAB>type_id`
//! * types: one `type_id` per line, line number = type index
//!
//! Lines starting with `#` are comments in the fingerprint and triples files.
//! A fingerprint file may declare its universe size with a `# n=<count>`
//! comment, which [`universe_hint`] reads back.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;

use super::{Dataset, Fingerprint, Triple};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintTable {
    pub drug_ids: Vec<String>,
    pub fingerprints: Vec<Fingerprint>,
    /// Repeated bit indices collapsed while parsing.
    pub duplicate_bits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleTable {
    pub positives: BTreeSet<Triple>,
    /// Lines that repeated an already-seen canonical triple.
    pub duplicates: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn ingest(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Data lines with their 1-based line numbers, skipping comments and blanks.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
}

pub fn load_fingerprints(path: impl AsRef<Path>, n: usize) -> Result<FingerprintTable> {
    let path = path.as_ref();
    let text = read(path)?;
    parse_fingerprints(&text, n, path)
}

fn parse_fingerprints(text: &str, n: usize, path: &Path) -> Result<FingerprintTable> {
    let mut drug_ids = Vec::new();
    let mut fingerprints = Vec::new();
    let mut seen = HashMap::new();
    let mut duplicate_bits = 0;
    for (lineno, line) in data_lines(text) {
        let (id, bits) = line
            .split_once('\t')
            .ok_or_else(|| ingest(path, lineno, "expected `drug_id<TAB>bits`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(ingest(path, lineno, "empty drug identifier"));
        }
        if bits.contains('\t') {
            return Err(ingest(path, lineno, "too many fields"));
        }
        let mut indices = Vec::new();
        for tok in bits.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let i: usize = tok
                .parse()
                .map_err(|_| ingest(path, lineno, format!("bad bit index `{tok}`")))?;
            if i >= n {
                return Err(ingest(
                    path,
                    lineno,
                    format!("bit index {i} outside substructure universe of size {n}"),
                ));
            }
            indices.push(i);
        }
        let (fp, dupes) = Fingerprint::with_duplicate_count(indices, n)
            .map_err(|e| ingest(path, lineno, e.to_string()))?;
        if seen.insert(id.to_string(), lineno).is_some() {
            return Err(ingest(path, lineno, format!("duplicate drug identifier `{id}`")));
        }
        duplicate_bits += dupes;
        drug_ids.push(id.to_string());
        fingerprints.push(fp);
    }
    if duplicate_bits > 0 {
        warn!("{}: collapsed {duplicate_bits} repeated bit indices", path.display());
    }
    Ok(FingerprintTable {
        drug_ids,
        fingerprints,
        duplicate_bits,
    })
}

/// Universe size declared by a `# n=<count>` comment, if present.
pub fn universe_hint(path: impl AsRef<Path>) -> Result<Option<usize>> {
    let path = path.as_ref();
    let text = read(path)?;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("n=") {
                if let Ok(n) = v.trim().parse() {
                    return Ok(Some(n));
                }
            }
        }
    }
    Ok(None)
}

pub fn load_types(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut ids = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let id = line.trim();
        if id.is_empty() {
            return Err(ingest(path, i + 1, "empty type identifier"));
        }
        if seen.insert(id.to_string(), i).is_some() {
            return Err(ingest(path, i + 1, format!("duplicate type identifier `{id}`")));
        }
        ids.push(id.to_string());
    }
    Ok(ids)
}

pub fn load_triples(
    path: impl AsRef<Path>,
    drug_ids: &[String],
    type_ids: &[String],
) -> Result<TripleTable> {
    let path = path.as_ref();
    let text = read(path)?;
    parse_triples(&text, drug_ids, type_ids, path)
}

fn parse_triples(
    text: &str,
    drug_ids: &[String],
    type_ids: &[String],
    path: &Path,
) -> Result<TripleTable> {
    let drugs: HashMap<&str, usize> = drug_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let types: HashMap<&str, usize> = type_ids.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut positives = BTreeSet::new();
    let mut duplicates = 0;
    for (lineno, line) in data_lines(text) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [a, b, t] = fields[..] else {
            return Err(ingest(
                path,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let lookup = |id: &str| {
            drugs
                .get(id)
                .copied()
                .ok_or_else(|| ingest(path, lineno, format!("unknown drug identifier `{id}`")))
        };
        let (p, q) = (lookup(a)?, lookup(b)?);
        let k = *types
            .get(t)
            .ok_or_else(|| ingest(path, lineno, format!("unknown type identifier `{t}`")))?;
        let triple = Triple::canonical(p, q, k).map_err(|_| {
            ingest(path, lineno, format!("self-pair `{a}`-`{b}` is not an interaction"))
        })?;
        if !positives.insert(triple) {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        warn!("{}: collapsed {duplicates} duplicate triples", path.display());
    }
    Ok(TripleTable {
        positives,
        duplicates,
    })
}

/// Loads a full dataset from its three files.
pub fn load_dataset(
    fingerprints: impl AsRef<Path>,
    triples: impl AsRef<Path>,
    types: impl AsRef<Path>,
    n: usize,
) -> Result<Dataset> {
    let fps = load_fingerprints(fingerprints, n)?;
    let type_ids = load_types(types)?;
    let triples = load_triples(triples, &fps.drug_ids, &type_ids)?;
    Dataset::new(n, fps.drug_ids, fps.fingerprints, type_ids, triples.positives)
}

pub fn format_fingerprints(ds: &Dataset) -> String {
    let mut out = format!("# n={}\n", ds.n);
    for (id, fp) in ds.drug_ids.iter().zip(&ds.fingerprints) {
        out.push_str(id);
        out.push('\t');
        for (i, b) in fp.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{b}");
        }
        out.push('\n');
    }
    out
}

pub fn format_triples(ds: &Dataset) -> String {
    let mut out = String::new();
    for t in &ds.positives {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            ds.drug_ids[t.p as usize], ds.drug_ids[t.q as usize], ds.type_ids[t.k as usize]
        );
    }
    out
}

pub fn format_types(ds: &Dataset) -> String {
    let mut out = String::new();
    for t in &ds.type_ids {
        out.push_str(t);
        out.push('\n');
    }
    out
}

/// Optional `index<TAB>description` file naming substructure bits.
pub fn load_labels(path: impl AsRef<Path>) -> Result<HashMap<usize, String>> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut labels = HashMap::new();
    for (lineno, line) in data_lines(&text) {
        let (idx, desc) = line
            .split_once('\t')
            .ok_or_else(|| ingest(path, lineno, "expected `index<TAB>description`"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| ingest(path, lineno, format!("bad substructure index `{idx}`")))?;
        labels.insert(idx, desc.trim().to_string());
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.tsv")
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_fingerprint_lines() {
        let t = parse_fingerprints("# comment\nD1\t3,17,880\nD2\t\n", 881, p()).unwrap();
        assert_eq!(t.drug_ids, ids(&["D1", "D2"]));
        assert_eq!(t.fingerprints[0].iter().collect::<Vec<_>>(), vec![3, 17, 880]);
        assert!(t.fingerprints[1].is_empty());
    }

    #[test]
    fn fingerprint_out_of_range_names_line() {
        let err = parse_fingerprints("D1\t1\nD2\t881\n", 881, p()).unwrap_err();
        match err {
            Error::Ingestion { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn fingerprint_duplicate_bits_counted() {
        let t = parse_fingerprints("D1\t4,4,2\n", 10, p()).unwrap();
        assert_eq!(t.duplicate_bits, 1);
    }

    #[test]
    fn fingerprint_malformed() {
        assert!(parse_fingerprints("D1 1,2\n", 10, p()).is_err());
        assert!(parse_fingerprints("D1\t1,x\n", 10, p()).is_err());
        assert!(parse_fingerprints("D1\t1\nD1\t2\n", 10, p()).is_err());
    }

    #[test]
    fn triples_canonicalize_and_collapse() {
        let drugs = ids(&["D1", "D2", "D3"]);
        let types = ids(&["T5"]);
        let t = parse_triples("D1\tD2\tT5\nD2\tD1\tT5\n", &drugs, &types, p()).unwrap();
        assert_eq!(t.positives.len(), 1);
        assert_eq!(t.duplicates, 1);
        assert_eq!(*t.positives.iter().next().unwrap(), Triple { p: 0, q: 1, k: 0 });
    }

    #[test]
    fn triples_reject_self_pair_and_unknowns() {
        let drugs = ids(&["D1", "D2"]);
        let types = ids(&["T5"]);
        assert!(matches!(
            parse_triples("D1\tD1\tT5\n", &drugs, &types, p()),
            Err(Error::Ingestion { line: 1, .. })
        ));
        assert!(matches!(
            parse_triples("D1\tD2\tT5\nD1\tD9\tT5\n", &drugs, &types, p()),
            Err(Error::Ingestion { line: 2, .. })
        ));
        assert!(parse_triples("D1\tD2\tT6\n", &drugs, &types, p()).is_err());
    }

    #[test]
    fn ten_distinct_lines_give_ten_triples() {
        let drugs: Vec<String> = (0..6).map(|i| format!("D{i}")).collect();
        let types = ids(&["A", "B"]);
        let mut text = String::new();
        let mut count = 0;
        'outer: for a in 0..6 {
            for b in a + 1..6 {
                text.push_str(&format!("D{a}\tD{b}\tA\n"));
                count += 1;
                if count == 10 {
                    break 'outer;
                }
            }
        }
        let t = parse_triples(&text, &drugs, &types, p()).unwrap();
        assert_eq!(t.positives.len(), 10);
    }
}
