use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::optim::{sgd_step, AdamParams, AdamState};
use super::{init_model, FactorModel, Gradients, Optimizer, TrainConfig};
use crate::data::{Dataset, LabeledTriple};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean squared loss over all training triples after the epoch.
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_history: Vec<EpochLoss>,
    /// Mean loss of the returned model; the initial loss when no epoch ran.
    pub final_loss: f64,
}

/// Fits a fresh model to `train_triples` by mini-batch gradient descent.
///
/// Each epoch shuffles the triples and steps once per batch on the mean batch
/// gradient. Given the same config the parameter trajectory is identical.
pub fn train(
    dataset: &Dataset,
    train_triples: &[LabeledTriple],
    cfg: &TrainConfig,
) -> Result<(FactorModel, TrainReport)> {
    cfg.validate()?;
    if train_triples.is_empty() {
        return Err(Error::Argument("no training triples".into()));
    }
    let has_pos = train_triples.iter().any(|t| t.label == 1);
    let has_neg = train_triples.iter().any(|t| t.label == 0);
    if !(has_pos && has_neg) {
        return Err(Error::Argument(
            "training triples must contain both positives and negatives".into(),
        ));
    }
    let mut model = init_model(dataset.n, dataset.f(), cfg)?;
    let fps = &dataset.fingerprints;
    for t in train_triples {
        if t.p == t.q {
            return Err(Error::Argument(format!("self-pair triple {t:?}")));
        }
    }
    // validates drugs, types, labels and fingerprint bounds once
    model.loss_batch(train_triples, fps)?;

    let total = train_triples.len() as f64;
    let mut order: Vec<usize> = (0..train_triples.len()).collect();
    let mut rng = seed::rng(cfg.seed, Stream::Shuffle);
    let mut adam = (cfg.optimizer == Optimizer::Adam).then(|| {
        AdamState::new(
            &model,
            AdamParams {
                lr: cfg.learning_rate,
                beta1: cfg.adam_beta1,
                beta2: cfg.adam_beta2,
                epsilon: cfg.adam_epsilon,
            },
        )
    });
    let mut grads = Gradients::zeros_like(&model);
    let mut batch = Vec::with_capacity(cfg.batch_size.min(train_triples.len()));
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_triples[i]));
            grads.d_a.fill(0.0);
            grads.d_c.fill(0.0);
            grads.d_w.fill(0.0);
            grads.d_bias = 0.0;
            model.accumulate_grad(&batch, fps, &mut grads);
            grads.scale(1.0 / batch.len() as f64);
            match adam.as_mut() {
                Some(st) => st.step(&mut model, &grads),
                None => sgd_step(&mut model, &grads, cfg.learning_rate),
            }
        }
        let loss = model.loss_unchecked(train_triples, fps) / total;
        if !loss.is_finite() || !model.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                learning_rate: cfg.learning_rate,
            });
        }
        debug!("epoch {epoch}: loss {loss:.6}");
        history.push(EpochLoss { epoch, loss });
    }

    let final_loss = match history.last() {
        Some(e) => e.loss,
        None => model.loss_unchecked(train_triples, fps) / total,
    };
    Ok((
        model,
        TrainReport {
            loss_history: history,
            final_loss,
        },
    ))
}
