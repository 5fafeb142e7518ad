use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// SGD with heavy-ball momentum and L2 weight decay.
    Sgd,
    /// Adam (betas 0.9 / 0.999) with L2 weight decay added to the gradient.
    Adaptive,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Optimizer state over the trainable ranges of a flat parameter vector.
/// Parameters outside those ranges are never written.
#[derive(Clone, Debug)]
pub(crate) struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    momentum: f64,
    weight_decay: f64,
    trainable: Vec<Range<usize>>,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub(crate) fn new(
        kind: OptimizerKind,
        lr: f64,
        momentum: f64,
        weight_decay: f64,
        param_count: usize,
        trainable: Vec<Range<usize>>,
    ) -> Self {
        let second = match kind {
            OptimizerKind::Sgd => Vec::new(),
            OptimizerKind::Adaptive => vec![0.0; param_count],
        };
        Self {
            kind,
            lr,
            momentum,
            weight_decay,
            trainable,
            first: vec![0.0; param_count],
            second,
            steps: 0,
        }
    }

    pub(crate) fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }

    /// Descends along `grad`.
    pub(crate) fn step(&mut self, weights: &mut [f64], grad: &[f64]) {
        self.steps += 1;
        let t = self.steps as i32;
        for range in &self.trainable {
            for i in range.clone() {
                let g = grad[i] + self.weight_decay * weights[i];
                match self.kind {
                    OptimizerKind::Sgd => {
                        let buf = if self.momentum == 0.0 || t == 1 {
                            g
                        } else {
                            self.momentum * self.first[i] + g
                        };
                        self.first[i] = buf;
                        weights[i] -= self.lr * buf;
                    }
                    OptimizerKind::Adaptive => {
                        self.first[i] = ADAM_BETA1 * self.first[i] + (1.0 - ADAM_BETA1) * g;
                        self.second[i] = ADAM_BETA2 * self.second[i] + (1.0 - ADAM_BETA2) * g * g;
                        let m_hat = self.first[i] / (1.0 - ADAM_BETA1.powi(t));
                        let v_hat = self.second[i] / (1.0 - ADAM_BETA2.powi(t));
                        weights[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}
