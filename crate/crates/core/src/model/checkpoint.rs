//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! "STNN"            4 bytes
//! version   u32     = 1
//! n, f, R   u32 × 3
//! A         f64 × n·R   row-major
//! C         f64 × f·R   row-major
//! w_lambda  f64 × R
//! bias      f64
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::FactorModel;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"STNN";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

/// Exact byte length of a checkpoint with the given dimensions.
pub fn checkpoint_len(n: usize, f: usize, rank: usize) -> usize {
    HEADER_LEN + 8 * (n * rank + f * rank + rank + 1)
}

pub fn write_model<W: Write>(model: &FactorModel, mut w: W) -> std::io::Result<()> {
    let (n, f, r) = (model.n(), model.f(), model.rank());
    let mut buf = Vec::with_capacity(checkpoint_len(n, f, r));
    buf.extend_from_slice(MAGIC);
    for x in [VERSION, n as u32, f as u32, r as u32] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let floats = model
        .a
        .iter()
        .chain(model.c.iter())
        .chain(model.w_lambda.iter())
        .chain(std::iter::once(&model.bias));
    for v in floats {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_model<R: Read>(mut r: R) -> Result<FactorModel> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::CheckpointFormat(format!("read failed: {e}")))?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<FactorModel> {
    let fmt = |m: String| Error::CheckpointFormat(m);
    if bytes.len() < HEADER_LEN {
        return Err(fmt(format!("file too short for header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(fmt("bad magic bytes".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = word(0);
    if version != VERSION {
        return Err(fmt(format!("unsupported version {version}")));
    }
    let (n, f, rank) = (word(1) as usize, word(2) as usize, word(3) as usize);
    if n == 0 || f == 0 || rank == 0 {
        return Err(fmt(format!("zero dimension in header (n={n}, f={f}, R={rank})")));
    }
    let expected = checkpoint_len(n, f, rank);
    if bytes.len() != expected {
        return Err(fmt(format!(
            "expected {expected} bytes for n={n}, f={f}, R={rank}, found {}",
            bytes.len()
        )));
    }
    let mut floats = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |len: usize| -> Vec<f64> { floats.by_ref().take(len).collect() };
    let a = Array2::from_shape_vec((n, rank), take(n * rank)).expect("length checked");
    let c = Array2::from_shape_vec((f, rank), take(f * rank)).expect("length checked");
    let w = Array1::from(take(rank));
    let bias = take(1)[0];
    let model = FactorModel {
        a,
        c,
        w_lambda: w,
        bias,
    };
    if !model.is_finite() {
        return Err(fmt("non-finite parameter".into()));
    }
    Ok(model)
}

/// Writes the checkpoint through a temporary sibling file, so a failed save
/// never leaves a partial file at `path`.
pub fn save_model(model: &FactorModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    crate::fsutil::write_atomic(path, &buf)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FactorModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
