//! Python module `stnn_ddi`: datasets, model training and scoring,
//! cross-validation, explanations and metrics from the core crate.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use stnn_ddi::data::io::load_dataset;
use stnn_ddi::data::generate_planted;
use stnn_ddi::experiment::{cross_validate as run_cv, train_full};
use stnn_ddi::explain::{explain_pair, ssi_value, top_pairs_for_type};
use stnn_ddi::metrics::{self, ScoredLabel};
use stnn_ddi::model::{init_model, load_model, save_model};
use stnn_ddi::{Dataset, FactorModel, Fingerprint, Optimizer, Task, TrainConfig};

fn to_py(e: stnn_ddi::Error) -> PyErr {
    match e {
        stnn_ddi::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn scored(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<Vec<ScoredLabel>> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(scores.into_iter().zip(labels).map(|(s, l)| ScoredLabel::new(s, l)).collect())
}

/// Hyperparameters for training. Every argument is optional.
#[pyclass(name = "TrainConfig", module = "stnn_ddi")]
struct PyTrainConfig {
    inner: TrainConfig,
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (rank=400, learning_rate=0.01, epochs=100, batch_size=1024, optimizer="adam", negative_ratio=1.0, init_scale=1.0, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        rank: usize,
        learning_rate: f64,
        epochs: usize,
        batch_size: usize,
        optimizer: &str,
        negative_ratio: f64,
        init_scale: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let optimizer: Optimizer = optimizer.parse().map_err(to_py)?;
        let inner = TrainConfig {
            rank,
            learning_rate,
            epochs,
            batch_size,
            optimizer,
            negative_ratio,
            init_scale,
            seed,
            ..TrainConfig::default()
        };
        inner.validate().map_err(to_py)?;
        Ok(PyTrainConfig { inner })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn epochs(&self) -> usize {
        self.inner.epochs
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!("TrainConfig({})", describe(&self.inner))
    }
}

fn describe(cfg: &TrainConfig) -> String {
    format!(
        "rank={}, learning_rate={}, epochs={}, batch_size={}, optimizer='{}', negative_ratio={}, init_scale={}, seed={}",
        cfg.rank, cfg.learning_rate, cfg.epochs, cfg.batch_size, cfg.optimizer, cfg.negative_ratio, cfg.init_scale, cfg.seed
    )
}

/// Drugs with fingerprints, interaction types and known positive triples.
#[pyclass(name = "Dataset", module = "stnn_ddi")]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (fingerprints, triples, types, n=881))]
    fn load(fingerprints: &str, triples: &str, types: &str, n: usize) -> PyResult<Self> {
        let inner = load_dataset(fingerprints, triples, types, n).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    /// Samples a planted model and labels the top `density` fraction of
    /// triples as positives. Returns `(dataset, model)`.
    #[staticmethod]
    #[pyo3(signature = (n, m, f, rank, density, seed=0))]
    fn planted(n: usize, m: usize, f: usize, rank: usize, density: f64, seed: u64) -> PyResult<(PyDataset, PyModel)> {
        let (ds, model) = generate_planted(n, m, f, rank, density, seed).map_err(to_py)?;
        Ok((PyDataset { inner: ds }, PyModel { inner: model }))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn drug_ids(&self) -> Vec<String> {
        self.inner.drug_ids.clone()
    }

    #[getter]
    fn type_ids(&self) -> Vec<String> {
        self.inner.type_ids.clone()
    }

    /// Positive triples as `(p, q, k)` index tuples with `p < q`.
    #[getter]
    fn positives(&self) -> Vec<(usize, usize, usize)> {
        self.inner
            .positives
            .iter()
            .map(|t| (t.p as usize, t.q as usize, t.k as usize))
            .collect()
    }

    fn fingerprint(&self, drug: usize) -> PyResult<Vec<usize>> {
        self.inner
            .fingerprints
            .get(drug)
            .map(|fp| fp.iter().collect())
            .ok_or_else(|| PyValueError::new_err(format!("drug index {drug} out of range")))
    }

    fn __len__(&self) -> usize {
        self.inner.m()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(drugs={}, types={}, positives={}, n={})",
            self.inner.m(),
            self.inner.f(),
            self.inner.positives.len(),
            self.inner.n
        )
    }
}

/// Factorized interaction model. Fingerprints are passed as lists of set
/// substructure indices.
#[pyclass(name = "Model", module = "stnn_ddi")]
struct PyModel {
    inner: FactorModel,
}

impl PyModel {
    fn fp(&self, bits: Vec<usize>) -> PyResult<Fingerprint> {
        Fingerprint::new(bits, self.inner.n()).map_err(to_py)
    }
}

#[pymethods]
impl PyModel {
    /// Randomly initialised model for `n` substructures and `f` types.
    #[staticmethod]
    #[pyo3(signature = (n, f, config=None))]
    fn init(n: usize, f: usize, config: Option<PyRef<'_, PyTrainConfig>>) -> PyResult<Self> {
        let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
        Ok(PyModel { inner: init_model(n, f, &cfg).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel { inner: load_model(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_model(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn f(&self) -> usize {
        self.inner.f()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias
    }

    fn score(&self, fp_p: Vec<usize>, fp_q: Vec<usize>, k: usize) -> PyResult<f64> {
        self.inner.score(&self.fp(fp_p)?, &self.fp(fp_q)?, k).map_err(to_py)
    }

    fn score_all_types(&self, fp_p: Vec<usize>, fp_q: Vec<usize>) -> PyResult<Vec<f64>> {
        self.inner.score_all_types(&self.fp(fp_p)?, &self.fp(fp_q)?).map_err(to_py)
    }

    fn drug_embedding(&self, fp: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(self.inner.drug_embedding(&self.fp(fp)?).map_err(to_py)?.to_vec())
    }

    fn ssi_value(&self, i: usize, j: usize, k: usize) -> PyResult<f64> {
        ssi_value(&self.inner, i, j, k).map_err(to_py)
    }

    /// Strongest substructure pairs for type `k`. With both fingerprints the
    /// ranking is restricted to their cross product. Returns a dict.
    #[pyo3(signature = (k, top_k=10, bottom_k=0, fp_p=None, fp_q=None))]
    fn explain<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        top_k: usize,
        bottom_k: usize,
        fp_p: Option<Vec<usize>>,
        fp_q: Option<Vec<usize>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let e = match (fp_p, fp_q) {
            (Some(p), Some(q)) => explain_pair(&self.inner, &self.fp(p)?, &self.fp(q)?, k, top_k, bottom_k),
            (None, None) => top_pairs_for_type(&self.inner, k, top_k, bottom_k, None),
            _ => return Err(PyValueError::new_err("pass both fp_p and fp_q or neither")),
        }
        .map_err(to_py)?;
        parse_json(py, &e.to_json().map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Model(n={}, f={}, rank={})", self.inner.n(), self.inner.f(), self.inner.rank())
    }
}

/// Trains on all positives plus sampled negatives. Returns
/// `(model, per-epoch losses)`.
#[pyfunction]
#[pyo3(signature = (dataset, config=None))]
fn train(py: Python<'_>, dataset: PyRef<'_, PyDataset>, config: Option<PyRef<'_, PyTrainConfig>>) -> PyResult<(PyModel, Vec<f64>)> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let ds = &dataset.inner;
    let (model, report) = py.detach(|| train_full(ds, &cfg)).map_err(to_py)?;
    let losses = report.loss_history.iter().map(|e| e.loss).collect();
    Ok((PyModel { inner: model }, losses))
}

/// Runs `folds`-fold cross-validation for task "c1", "c2" or "c3" and
/// returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (dataset, task, folds=10, config=None, threads=1))]
fn cross_validate<'py>(
    py: Python<'py>,
    dataset: PyRef<'py, PyDataset>,
    task: &str,
    folds: usize,
    config: Option<PyRef<'py, PyTrainConfig>>,
    threads: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let task: Task = task.parse().map_err(to_py)?;
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let ds = &dataset.inner;
    let report = py
        .detach(|| run_cv(ds, task, folds, &cfg, threads.max(1)))
        .map_err(to_py)?;
    parse_json(py, &report.to_json().map_err(to_py)?)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    metrics::roc_auc(&scored(scores, labels)?).map_err(to_py)
}

#[pyfunction]
fn aupr(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    metrics::aupr(&scored(scores, labels)?).map_err(to_py)
}

/// `(accuracy, precision, precision_undefined)` at the given threshold.
#[pyfunction]
#[pyo3(signature = (scores, labels, threshold=0.5))]
fn thresholded_metrics(scores: Vec<f64>, labels: Vec<u8>, threshold: f64) -> PyResult<(f64, f64, bool)> {
    let t = metrics::thresholded_metrics(&scored(scores, labels)?, threshold).map_err(to_py)?;
    Ok((t.accuracy, t.precision, t.precision_undefined))
}

#[pymodule(name = "stnn_ddi")]
fn stnn_ddi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(aupr, m)?)?;
    m.add_function(wrap_pyfunction!(thresholded_metrics, m)?)?;
    Ok(())
}
