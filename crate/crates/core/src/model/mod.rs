//! Factorized scorer over substructure fingerprints.
//!
//! A drug is embedded as the sum of the rows of `A` selected by its
//! fingerprint. A typed pair is scored as
//!
//! ```text
//! score(p, q, k) = (emb(q) ⊙ emb(p) ⊙ C[k]) · w + bias
//! ```
//!
//! which equals `Σ_i Σ_j ST[i,j,k] e_p[i] e_q[j] + bias` for the symmetric
//! tensor `ST = Σ_r w_r (a_r ∘ a_r ∘ c_r)`. The same matrix `A` serves both
//! substructure axes, so the score is symmetric in the two drugs.

mod checkpoint;
mod optim;
mod train;

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

pub use checkpoint::{checkpoint_len, load_model, read_model, save_model, write_model, MAGIC, VERSION};
pub use optim::Optimizer;
pub use train::{train, TrainReport};

use crate::data::{Fingerprint, LabeledTriple};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};
use crate::tensor::RankOneFactors;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    /// Substructure embeddings, `n × R`.
    pub a: Array2<f64>,
    /// Interaction-type embeddings, `f × R`.
    pub c: Array2<f64>,
    /// Per-component weights, length `R`.
    pub w_lambda: Array1<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rank: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub optimizer: Optimizer,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Negatives sampled per positive.
    pub negative_ratio: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rank: 400,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 1024,
            init_scale: 1.0,
            optimizer: Optimizer::Adam,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            negative_ratio: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.rank == 0 {
            return bad("rank must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad(format!("init scale must be non-negative, got {}", self.init_scale));
        }
        if !(self.negative_ratio > 0.0 && self.negative_ratio.is_finite()) {
            return bad(format!("negative ratio must be positive, got {}", self.negative_ratio));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)".into());
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("adam epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Gradients of the summed squared loss, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_a: Array2<f64>,
    pub d_c: Array2<f64>,
    pub d_w: Array1<f64>,
    pub d_bias: f64,
}

impl Gradients {
    pub fn zeros_like(model: &FactorModel) -> Self {
        Gradients {
            d_a: Array2::zeros(model.a.raw_dim()),
            d_c: Array2::zeros(model.c.raw_dim()),
            d_w: Array1::zeros(model.w_lambda.raw_dim()),
            d_bias: 0.0,
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.d_a *= s;
        self.d_c *= s;
        self.d_w *= s;
        self.d_bias *= s;
    }
}

/// Random model: `A` and `C` uniform in `±init_scale/√R`, weights `1/√R`,
/// zero bias. Deterministic in `cfg.seed`.
pub fn init_model(n: usize, f: usize, cfg: &TrainConfig) -> Result<FactorModel> {
    cfg.validate()?;
    if n == 0 || f == 0 {
        return Err(Error::Config(format!(
            "model dimensions must be positive, got n={n}, f={f}"
        )));
    }
    let r = cfg.rank;
    let bound = cfg.init_scale / (r as f64).sqrt();
    let mut rng = seed::rng(cfg.seed, Stream::Init);
    let mut draw = |rows: usize| -> Array2<f64> {
        if bound == 0.0 {
            return Array2::zeros((rows, r));
        }
        let dist = Uniform::new_inclusive(-bound, bound);
        Array2::from_shape_simple_fn((rows, r), || dist.sample(&mut rng))
    };
    let a = draw(n);
    let c = draw(f);
    Ok(FactorModel {
        a,
        c,
        w_lambda: Array1::from_elem(r, 1.0 / (r as f64).sqrt()),
        bias: 0.0,
    })
}

impl FactorModel {
    pub fn new(a: Array2<f64>, c: Array2<f64>, w_lambda: Array1<f64>, bias: f64) -> Result<Self> {
        let m = FactorModel { a, c, w_lambda, bias };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.w_lambda.len();
        if r == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        if self.a.ncols() != r {
            return Err(Error::Dimension {
                context: "substructure factor columns",
                expected: r,
                found: self.a.ncols(),
            });
        }
        if self.c.ncols() != r {
            return Err(Error::Dimension {
                context: "interaction factor columns",
                expected: r,
                found: self.c.ncols(),
            });
        }
        if self.a.nrows() == 0 || self.c.nrows() == 0 {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Substructure universe size.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of interaction types.
    pub fn f(&self) -> usize {
        self.c.nrows()
    }

    pub fn rank(&self) -> usize {
        self.w_lambda.len()
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite()
            && self.a.iter().all(|v| v.is_finite())
            && self.c.iter().all(|v| v.is_finite())
            && self.w_lambda.iter().all(|v| v.is_finite())
    }

    fn check_type(&self, k: usize) -> Result<()> {
        if k >= self.f() {
            return Err(Error::Index {
                what: "interaction type",
                index: k,
                bound: self.f(),
            });
        }
        Ok(())
    }

    /// `e^T A`: the sum of the rows of `A` selected by `fp`.
    pub fn drug_embedding(&self, fp: &Fingerprint) -> Result<Array1<f64>> {
        fp.check_bound(self.n())?;
        let mut out = vec![0.0; self.rank()];
        self.embed_into(fp, &mut out);
        Ok(Array1::from(out))
    }

    /// Caller guarantees every bit is below `n`.
    fn embed_into(&self, fp: &Fingerprint, out: &mut [f64]) {
        out.fill(0.0);
        for i in fp.iter() {
            for (o, a) in out.iter_mut().zip(self.a.row(i)) {
                *o += a;
            }
        }
    }

    /// Score from precomputed drug embeddings.
    fn score_embedded(&self, u: &[f64], v: &[f64], k: usize) -> f64 {
        let w = self.c.row(k);
        let mut s = 0.0;
        for r in 0..u.len() {
            s += u[r] * v[r] * w[r] * self.w_lambda[r];
        }
        s + self.bias
    }

    pub fn score(&self, fp_p: &Fingerprint, fp_q: &Fingerprint, k: usize) -> Result<f64> {
        self.check_type(k)?;
        fp_p.check_bound(self.n())?;
        fp_q.check_bound(self.n())?;
        let r = self.rank();
        let mut u = vec![0.0; r];
        let mut v = vec![0.0; r];
        self.embed_into(fp_q, &mut u);
        self.embed_into(fp_p, &mut v);
        Ok(self.score_embedded(&u, &v, k))
    }

    /// Scores every type for one drug pair, indexed by type.
    pub fn score_all_types(&self, fp_p: &Fingerprint, fp_q: &Fingerprint) -> Result<Vec<f64>> {
        fp_p.check_bound(self.n())?;
        fp_q.check_bound(self.n())?;
        let r = self.rank();
        let mut u = vec![0.0; r];
        let mut v = vec![0.0; r];
        self.embed_into(fp_q, &mut u);
        self.embed_into(fp_p, &mut v);
        Ok((0..self.f()).map(|k| self.score_embedded(&u, &v, k)).collect())
    }

    fn check_batch(&self, batch: &[LabeledTriple], fps: &[Fingerprint]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        for t in batch {
            if t.label > 1 {
                return Err(Error::Argument(format!("label {} is not 0 or 1", t.label)));
            }
            for d in [t.p, t.q] {
                let fp = fps.get(d).ok_or(Error::Index {
                    what: "drug",
                    index: d,
                    bound: fps.len(),
                })?;
                fp.check_bound(self.n())?;
            }
            self.check_type(t.k)?;
        }
        Ok(())
    }

    /// `Σ (label − score)²` over the batch.
    pub fn loss_batch(&self, batch: &[LabeledTriple], fps: &[Fingerprint]) -> Result<f64> {
        self.check_batch(batch, fps)?;
        Ok(self.loss_unchecked(batch, fps))
    }

    pub(crate) fn loss_unchecked(&self, batch: &[LabeledTriple], fps: &[Fingerprint]) -> f64 {
        let r = self.rank();
        let mut u = vec![0.0; r];
        let mut v = vec![0.0; r];
        let mut total = 0.0;
        for t in batch {
            self.embed_into(&fps[t.q], &mut u);
            self.embed_into(&fps[t.p], &mut v);
            let e = t.target() - self.score_embedded(&u, &v, t.k);
            total += e * e;
        }
        total
    }

    /// Gradient of [`FactorModel::loss_batch`] with respect to every parameter.
    pub fn grad_batch(&self, batch: &[LabeledTriple], fps: &[Fingerprint]) -> Result<Gradients> {
        self.check_batch(batch, fps)?;
        let mut g = Gradients::zeros_like(self);
        self.accumulate_grad(batch, fps, &mut g);
        Ok(g)
    }

    /// Adds the batch gradient into `g` and returns the batch loss.
    pub(crate) fn accumulate_grad(&self, batch: &[LabeledTriple], fps: &[Fingerprint], g: &mut Gradients) -> f64 {
        let r = self.rank();
        let mut u = vec![0.0; r];
        let mut v = vec![0.0; r];
        let mut grad_u = vec![0.0; r];
        let mut grad_v = vec![0.0; r];
        let mut loss = 0.0;
        for t in batch {
            let (fp_p, fp_q) = (&fps[t.p], &fps[t.q]);
            self.embed_into(fp_q, &mut u);
            self.embed_into(fp_p, &mut v);
            let s = self.score_embedded(&u, &v, t.k);
            let resid = s - t.target();
            loss += resid * resid;
            let gs = 2.0 * resid;
            g.d_bias += gs;
            let w = self.c.row(t.k);
            let mut dc = g.d_c.row_mut(t.k);
            for x in 0..r {
                let lam = self.w_lambda[x];
                let uv = u[x] * v[x];
                g.d_w[x] += gs * uv * w[x];
                dc[x] += gs * lam * uv;
                grad_u[x] = gs * lam * v[x] * w[x];
                grad_v[x] = gs * lam * u[x] * w[x];
            }
            for i in fp_q.iter() {
                for (d, gu) in g.d_a.row_mut(i).iter_mut().zip(&grad_u) {
                    *d += gu;
                }
            }
            for j in fp_p.iter() {
                for (d, gv) in g.d_a.row_mut(j).iter_mut().zip(&grad_v) {
                    *d += gv;
                }
            }
        }
        loss
    }

    /// The tensor-level view of the model, `⟨w; A, A, C⟩`.
    pub fn to_rank_one_factors(&self) -> RankOneFactors {
        RankOneFactors {
            lambda: self.w_lambda.clone(),
            a_cols: self.a.clone(),
            b_cols: self.a.clone(),
            c_cols: self.c.clone(),
        }
    }
}
