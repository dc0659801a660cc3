//! Dense third-order tensor arithmetic.
//!
//! These routines materialize tensors explicitly and are only meant for small
//! instances: they serve as the reference the factorized scorer is checked
//! against and as a reconstruction engine for inspecting learned factors.
//!
//! Storage is row-major with the third index varying fastest, so entry
//! `(i, j, k)` lives at `(i * J + j) * K + k`. Modes are numbered 1, 2, 3 for
//! the first, second and third index respectively.

use ndarray::{Array1, Array2};

use crate::data::Fingerprint;
use crate::error::{Error, Result};

/// Upper bound on the number of entries a dense tensor may hold.
pub const MAX_DENSE_ENTRIES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub fn from_index(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(Error::Index {
                what: "mode",
                index: mode,
                bound: 4,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor3 {
    dims: (usize, usize, usize),
    values: Vec<f64>,
}

impl DenseTensor3 {
    pub fn new(dims: (usize, usize, usize), values: Vec<f64>) -> Result<Self> {
        let len = checked_len(dims)?;
        if values.len() != len {
            return Err(Error::Dimension {
                context: "dense tensor values",
                expected: len,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("dense tensor contains non-finite values".into()));
        }
        Ok(DenseTensor3 { dims, values })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Result<Self> {
        let len = checked_len(dims)?;
        Ok(DenseTensor3 {
            dims,
            values: vec![0.0; len],
        })
    }

    pub fn from_fn<F>(dims: (usize, usize, usize), mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut t = Self::zeros(dims)?;
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    let v = f(i, j, k);
                    t.set(i, j, k, v);
                }
            }
        }
        if t.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("dense tensor contains non-finite values".into()));
        }
        Ok(t)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    /// Panics if any index is out of range.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        self.values[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        let o = self.offset(i, j, k);
        self.values[o] = v;
    }
}

fn checked_len(dims: (usize, usize, usize)) -> Result<usize> {
    let (i, j, k) = dims;
    if i == 0 || j == 0 || k == 0 {
        return Err(Error::Config(format!("tensor dims must be positive, got {dims:?}")));
    }
    let len = i
        .checked_mul(j)
        .and_then(|x| x.checked_mul(k))
        .filter(|&len| len <= MAX_DENSE_ENTRIES)
        .ok_or_else(|| {
            Error::Config(format!(
                "dense tensor {dims:?} exceeds the {MAX_DENSE_ENTRIES}-entry cap"
            ))
        })?;
    Ok(len)
}

/// Weighted rank-one components `Σ_r λ_r a_r ∘ b_r ∘ c_r`, one column per
/// component in each factor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneFactors {
    pub lambda: Array1<f64>,
    pub a_cols: Array2<f64>,
    pub b_cols: Array2<f64>,
    pub c_cols: Array2<f64>,
}

impl RankOneFactors {
    pub fn new(
        lambda: Array1<f64>,
        a_cols: Array2<f64>,
        b_cols: Array2<f64>,
        c_cols: Array2<f64>,
    ) -> Result<Self> {
        let f = RankOneFactors {
            lambda,
            a_cols,
            b_cols,
            c_cols,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    fn validate(&self) -> Result<()> {
        let r = self.lambda.len();
        for (context, m) in [
            ("factor matrix A columns", &self.a_cols),
            ("factor matrix B columns", &self.b_cols),
            ("factor matrix C columns", &self.c_cols),
        ] {
            if m.ncols() != r {
                return Err(Error::Dimension {
                    context,
                    expected: r,
                    found: m.ncols(),
                });
            }
        }
        Ok(())
    }
}

/// Materializes the tensor described by a set of weighted rank-one factors.
pub fn cp_reconstruct(factors: &RankOneFactors) -> Result<DenseTensor3> {
    factors.validate()?;
    let dims = (
        factors.a_cols.nrows(),
        factors.b_cols.nrows(),
        factors.c_cols.nrows(),
    );
    let mut t = DenseTensor3::zeros(dims)?;
    let (ni, nj, nk) = dims;
    for r in 0..factors.rank() {
        let lam = factors.lambda[r];
        for i in 0..ni {
            let ai = lam * factors.a_cols[[i, r]];
            for j in 0..nj {
                let aij = ai * factors.b_cols[[j, r]];
                let base = (i * nj + j) * nk;
                for k in 0..nk {
                    t.values[base + k] += aij * factors.c_cols[[k, r]];
                }
            }
        }
    }
    Ok(t)
}

/// Contracts `t` with `v` along `mode`; the result keeps the two remaining
/// indices in their original order.
pub fn mode_product_vec(t: &DenseTensor3, v: &[f64], mode: Mode) -> Result<Array2<f64>> {
    let (ni, nj, nk) = t.dims;
    let expected = match mode {
        Mode::One => ni,
        Mode::Two => nj,
        Mode::Three => nk,
    };
    if v.len() != expected {
        return Err(Error::Dimension {
            context: "mode product vector",
            expected,
            found: v.len(),
        });
    }
    let out = match mode {
        Mode::One => Array2::from_shape_fn((nj, nk), |(j, k)| {
            (0..ni).map(|i| t.get(i, j, k) * v[i]).sum()
        }),
        Mode::Two => Array2::from_shape_fn((ni, nk), |(i, k)| {
            (0..nj).map(|j| t.get(i, j, k) * v[j]).sum()
        }),
        Mode::Three => Array2::from_shape_fn((ni, nj), |(i, j)| {
            let base = t.offset(i, j, 0);
            t.values[base..base + nk]
                .iter()
                .zip(v)
                .map(|(x, y)| x * y)
                .sum()
        }),
    };
    Ok(out)
}

/// Mode product of a matrix with a vector: mode 1 contracts rows, mode 2
/// contracts columns.
pub fn matrix_mode_product(m: &Array2<f64>, v: &[f64], mode: Mode) -> Result<Array1<f64>> {
    let (rows, cols) = m.dim();
    match mode {
        Mode::One => {
            if v.len() != rows {
                return Err(Error::Dimension {
                    context: "matrix mode-1 product vector",
                    expected: rows,
                    found: v.len(),
                });
            }
            Ok(Array1::from_shape_fn(cols, |c| {
                (0..rows).map(|r| m[[r, c]] * v[r]).sum()
            }))
        }
        Mode::Two => {
            if v.len() != cols {
                return Err(Error::Dimension {
                    context: "matrix mode-2 product vector",
                    expected: cols,
                    found: v.len(),
                });
            }
            Ok(Array1::from_shape_fn(rows, |r| {
                (0..cols).map(|c| m[[r, c]] * v[c]).sum()
            }))
        }
        Mode::Three => Err(Error::Index {
            what: "matrix mode",
            index: 3,
            bound: 3,
        }),
    }
}

/// Final contraction of a vector down to a scalar.
pub fn vector_mode_product(x: &Array1<f64>, v: &[f64]) -> Result<f64> {
    if v.len() != x.len() {
        return Err(Error::Dimension {
            context: "vector mode product",
            expected: x.len(),
            found: v.len(),
        });
    }
    Ok(x.iter().zip(v).map(|(a, b)| a * b).sum())
}

pub fn frontal_slice(t: &DenseTensor3, k: usize) -> Result<Array2<f64>> {
    let (ni, nj, nk) = t.dims;
    if k >= nk {
        return Err(Error::Index {
            what: "interaction type",
            index: k,
            bound: nk,
        });
    }
    Ok(Array2::from_shape_fn((ni, nj), |(i, j)| t.get(i, j, k)))
}

/// One-hot vector of length `len` with a 1 at `k`.
pub fn basis(len: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    v
}

/// `Σ_i Σ_j t[i,j,k] e_p[i] e_q[j]` over a substructure × substructure ×
/// interaction tensor, with fingerprints as 0/1 indicator vectors.
pub fn dense_score(t: &DenseTensor3, e_p: &Fingerprint, e_q: &Fingerprint, k: usize) -> Result<f64> {
    let (ni, nj, _) = t.dims;
    e_p.check_bound(ni)?;
    e_q.check_bound(nj)?;
    dense_score_vec(t, &e_p.to_dense(ni), &e_q.to_dense(nj), k)
}

/// [`dense_score`] with real-valued drug vectors. The interaction axis is
/// selected first, then `e_p` contracts the first substructure axis and `e_q`
/// the second.
pub fn dense_score_vec(t: &DenseTensor3, e_p: &[f64], e_q: &[f64], k: usize) -> Result<f64> {
    let slice = frontal_slice(t, k)?;
    let st_p = matrix_mode_product(&slice, e_p, Mode::One)?;
    vector_mode_product(&st_p, e_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
    }

    fn rand_tensor(rng: &mut ChaCha8Rng, dims: (usize, usize, usize)) -> DenseTensor3 {
        DenseTensor3::from_fn(dims, |_, _, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn reconstruct_single_outer_product() {
        let f = RankOneFactors::new(
            array![1.0],
            array![[1.0], [2.0]],
            array![[3.0]],
            array![[4.0], [5.0]],
        )
        .unwrap();
        let t = cp_reconstruct(&f).unwrap();
        assert_eq!(t.dims(), (2, 1, 2));
        assert_eq!(t.get(0, 0, 0), 12.0);
        assert_eq!(t.get(0, 0, 1), 15.0);
        assert_eq!(t.get(1, 0, 0), 24.0);
        assert_eq!(t.get(1, 0, 1), 30.0);
    }

    #[test]
    fn reconstruct_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = RankOneFactors::new(
            Array1::zeros(3),
            rand_matrix(&mut rng, 4, 3),
            rand_matrix(&mut rng, 5, 3),
            rand_matrix(&mut rng, 2, 3),
        )
        .unwrap();
        assert!(cp_reconstruct(&f).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reconstruct_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ni, nj, nk, r) = (4, 4, 3, 2);
        let lam = Array1::from_shape_fn(r, |_| rng.gen_range(-1.0..1.0));
        let a = rand_matrix(&mut rng, ni, r);
        let b = rand_matrix(&mut rng, nj, r);
        let c = rand_matrix(&mut rng, nk, r);
        let f = RankOneFactors::new(lam.clone(), a.clone(), b.clone(), c.clone()).unwrap();
        let t = cp_reconstruct(&f).unwrap();
        for i in 0..ni {
            for j in 0..nj {
                for k in 0..nk {
                    let mut oracle = 0.0;
                    for q in 0..r {
                        oracle += lam[q] * a[[i, q]] * b[[j, q]] * c[[k, q]];
                    }
                    assert!((t.get(i, j, k) - oracle).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reconstruct_rejects_mismatched_rank() {
        let err = RankOneFactors::new(
            array![1.0, 2.0],
            Array2::zeros((2, 2)),
            Array2::zeros((2, 1)),
            Array2::zeros((2, 2)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 2, found: 1, .. }));
    }

    #[test]
    fn reconstruct_is_linear_in_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ni, nj, nk) = (3, 4, 2);
        let make = |rng: &mut ChaCha8Rng, r| {
            RankOneFactors::new(
                Array1::from_shape_fn(r, |_| rng.gen_range(-1.0..1.0)),
                rand_matrix(rng, ni, r),
                rand_matrix(rng, nj, r),
                rand_matrix(rng, nk, r),
            )
            .unwrap()
        };
        let f1 = make(&mut rng, 2);
        let f2 = make(&mut rng, 3);
        let cat = |x: &Array2<f64>, y: &Array2<f64>| {
            ndarray::concatenate(ndarray::Axis(1), &[x.view(), y.view()]).unwrap()
        };
        let joint = RankOneFactors::new(
            ndarray::concatenate(ndarray::Axis(0), &[f1.lambda.view(), f2.lambda.view()]).unwrap(),
            cat(&f1.a_cols, &f2.a_cols),
            cat(&f1.b_cols, &f2.b_cols),
            cat(&f1.c_cols, &f2.c_cols),
        )
        .unwrap();
        let t1 = cp_reconstruct(&f1).unwrap();
        let t2 = cp_reconstruct(&f2).unwrap();
        let tj = cp_reconstruct(&joint).unwrap();
        for ((a, b), c) in t1.values().iter().zip(t2.values()).zip(tj.values()) {
            assert!((a + b - c).abs() < 1e-12);
        }
    }

    #[test]
    fn mode3_of_ones() {
        let t = DenseTensor3::new((2, 2, 2), vec![1.0; 8]).unwrap();
        let m = mode_product_vec(&t, &[1.0, 1.0], Mode::Three).unwrap();
        assert_eq!(m, array![[2.0, 2.0], [2.0, 2.0]]);
    }

    #[test]
    fn mode3_with_basis_is_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = rand_tensor(&mut rng, (3, 4, 5));
        for k in 0..5 {
            let by_product = mode_product_vec(&t, &basis(5, k), Mode::Three).unwrap();
            assert_eq!(by_product, frontal_slice(&t, k).unwrap());
        }
    }

    #[test]
    fn mode2_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = rand_tensor(&mut rng, (3, 4, 2));
        let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = mode_product_vec(&t, &v, Mode::Two).unwrap();
        assert_eq!(m.dim(), (3, 2));
        for i in 0..3 {
            for k in 0..2 {
                let mut s = 0.0;
                for (j, vj) in v.iter().enumerate() {
                    s += t.values()[(i * 4 + j) * 2 + k] * vj;
                }
                assert!((m[[i, k]] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_product_length_mismatch() {
        let t = DenseTensor3::zeros((2, 3, 4)).unwrap();
        assert!(matches!(
            mode_product_vec(&t, &[1.0; 3], Mode::One),
            Err(Error::Dimension { expected: 2, found: 3, .. })
        ));
    }

    #[test]
    fn slice_out_of_range() {
        let t = DenseTensor3::zeros((2, 2, 2)).unwrap();
        assert!(matches!(frontal_slice(&t, 2), Err(Error::Index { .. })));
        assert_eq!(frontal_slice(&t, 1).unwrap(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn slice_of_basis_outer_product() {
        // e_1 ∘ e_0 ∘ e_2 in (3, 2, 4)
        let t = DenseTensor3::from_fn((3, 2, 4), |i, j, k| {
            if i == 1 && j == 0 && k == 2 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let s = frontal_slice(&t, 2).unwrap();
        let mut expected = Array2::<f64>::zeros((3, 2));
        expected[[1, 0]] = 1.0;
        assert_eq!(s, expected);
        assert_eq!(frontal_slice(&t, 0).unwrap(), Array2::<f64>::zeros((3, 2)));
    }

    #[test]
    fn slice_of_reconstruction_matches_outer_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = 3;
        let f = RankOneFactors::new(
            Array1::from_shape_fn(r, |_| rng.gen_range(-1.0..1.0)),
            rand_matrix(&mut rng, 4, r),
            rand_matrix(&mut rng, 5, r),
            rand_matrix(&mut rng, 3, r),
        )
        .unwrap();
        let t = cp_reconstruct(&f).unwrap();
        for k in 0..3 {
            let s = frontal_slice(&t, k).unwrap();
            let mut oracle = Array2::<f64>::zeros((4, 5));
            for q in 0..r {
                let a = f.a_cols.column(q).to_owned().insert_axis(ndarray::Axis(1));
                let b = f.b_cols.column(q).to_owned().insert_axis(ndarray::Axis(0));
                oracle = oracle + f.lambda[q] * f.c_cols[[k, q]] * a.dot(&b);
            }
            for (x, y) in s.iter().zip(oracle.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_score_counts_and_empty() {
        let t = DenseTensor3::new((5, 5, 2), vec![1.0; 50]).unwrap();
        let p = Fingerprint::new([0, 3], 5).unwrap();
        let q = Fingerprint::new([1, 2, 4], 5).unwrap();
        assert_eq!(dense_score(&t, &p, &q, 1).unwrap(), 6.0);
        assert_eq!(dense_score(&t, &Fingerprint::empty(), &q, 0).unwrap(), 0.0);
        assert!(matches!(dense_score(&t, &p, &q, 2), Err(Error::Index { .. })));
    }

    #[test]
    fn dense_score_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = rand_tensor(&mut rng, (6, 6, 3));
        for _ in 0..20 {
            let p = Fingerprint::new((0..6).filter(|_| rng.gen_bool(0.5)), 6).unwrap();
            let q = Fingerprint::new((0..6).filter(|_| rng.gen_bool(0.5)), 6).unwrap();
            let k = rng.gen_range(0..3);
            let mut oracle = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    if p.contains(i) && q.contains(j) {
                        oracle += t.get(i, j, k);
                    }
                }
            }
            assert!((dense_score(&t, &p, &q, k).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_score_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = rand_tensor(&mut rng, (5, 5, 2));
        let mut v = || -> Vec<f64> { (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect() };
        let (u, w, q) = (v(), v(), v());
        let sum: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let lhs = dense_score_vec(&t, &sum, &q, 1).unwrap();
        let rhs = dense_score_vec(&t, &u, &q, 1).unwrap() + dense_score_vec(&t, &w, &q, 1).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let lhs = dense_score_vec(&t, &q, &sum, 0).unwrap();
        let rhs = dense_score_vec(&t, &q, &u, 0).unwrap() + dense_score_vec(&t, &q, &w, 0).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn dense_cap_is_enforced() {
        assert!(matches!(
            DenseTensor3::zeros((881, 881, 1318)),
            Err(Error::Config(_))
        ));
        assert!(DenseTensor3::zeros((0, 1, 1)).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(DenseTensor3::new((1, 1, 2), vec![0.0, f64::NAN]).is_err());
        assert!(DenseTensor3::new((1, 1, 2), vec![0.0]).is_err());
    }
}
