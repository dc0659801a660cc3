//! Substructure-aware tensor factorization for typed drug-drug interaction
//! prediction.
//!
//! Drugs are represented by binary substructure fingerprints. A symmetric
//! substructure × substructure × interaction-type tensor, held in CP form,
//! scores a drug pair for a type by summing the entries selected by the two
//! fingerprints. The factors are trained with squared loss against observed
//! interactions and sampled negatives.
//!
//! * [`tensor`]: dense reference arithmetic (reconstruction, mode products).
//! * [`model`]: the factorized scorer, gradients, training, checkpoints.
//! * [`data`]: datasets, file formats, negative sampling, CV splitters.
//! * [`metrics`]: AUC, AUPR, accuracy, precision and fold aggregation.
//! * [`explain`]: ranking substructure pairs behind a prediction.
//! * [`experiment`]: whole-dataset training and cross-validation runs.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod explain;
mod fsutil;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod tensor;

pub use data::{Dataset, Fingerprint, LabeledTriple, Task, Triple};
pub use error::{Error, Result};
pub use model::{FactorModel, Optimizer, TrainConfig};
