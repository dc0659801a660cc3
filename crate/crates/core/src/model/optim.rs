use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use super::{FactorModel, Gradients};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            _ => Err(Error::Argument(format!("unknown optimizer `{s}` (expected sgd or adam)"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// First and second moment estimates for every parameter.
pub(crate) struct AdamState {
    params: AdamParams,
    step: i32,
    m: Gradients,
    v: Gradients,
}

fn adam_matrix(p: &mut Array2<f64>, g: &Array2<f64>, m: &mut Array2<f64>, v: &mut Array2<f64>, k: &Coeffs) {
    Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| k.apply(p, g, m, v));
}

fn adam_vector(p: &mut Array1<f64>, g: &Array1<f64>, m: &mut Array1<f64>, v: &mut Array1<f64>, k: &Coeffs) {
    Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| k.apply(p, g, m, v));
}

struct Coeffs {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    correction1: f64,
    correction2: f64,
}

impl Coeffs {
    #[inline]
    fn apply(&self, p: &mut f64, g: f64, m: &mut f64, v: &mut f64) {
        *m = self.beta1 * *m + (1.0 - self.beta1) * g;
        *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
        let m_hat = *m / self.correction1;
        let v_hat = *v / self.correction2;
        *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
    }
}

impl AdamState {
    pub fn new(model: &FactorModel, params: AdamParams) -> Self {
        AdamState {
            params,
            step: 0,
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
        }
    }

    pub fn step(&mut self, model: &mut FactorModel, g: &Gradients) {
        self.step += 1;
        let k = Coeffs {
            lr: self.params.lr,
            beta1: self.params.beta1,
            beta2: self.params.beta2,
            eps: self.params.epsilon,
            correction1: 1.0 - self.params.beta1.powi(self.step),
            correction2: 1.0 - self.params.beta2.powi(self.step),
        };
        adam_matrix(&mut model.a, &g.d_a, &mut self.m.d_a, &mut self.v.d_a, &k);
        adam_matrix(&mut model.c, &g.d_c, &mut self.m.d_c, &mut self.v.d_c, &k);
        adam_vector(&mut model.w_lambda, &g.d_w, &mut self.m.d_w, &mut self.v.d_w, &k);
        k.apply(&mut model.bias, g.d_bias, &mut self.m.d_bias, &mut self.v.d_bias);
    }
}

pub(crate) fn sgd_step(model: &mut FactorModel, g: &Gradients, lr: f64) {
    model.a.scaled_add(-lr, &g.d_a);
    model.c.scaled_add(-lr, &g.d_c);
    model.w_lambda.scaled_add(-lr, &g.d_w);
    model.bias -= lr * g.d_bias;
}
