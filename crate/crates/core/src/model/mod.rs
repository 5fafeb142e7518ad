//! Differentiable multiclass classifiers.
//!
//! A [`ClassifierModel`] is an [`Architecture`] plus one flat weight vector
//! whose length the architecture alone determines. Models are values:
//! training and unlearning return new models and never mutate their inputs.

mod arch;
mod checkpoint;
mod network;
pub mod objective;
mod optim;
mod train;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng;

pub use arch::{Architecture, Block, Layer};
pub use checkpoint::{load_model, save_model, CheckpointFile, ModelCheckpoint};
pub(crate) use optim::Optimizer;
pub use optim::OptimizerKind;
pub(crate) use train::Stepper;
pub use train::{train, train_with_frozen_blocks, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub(crate) architecture: Architecture,
    pub(crate) weights: Vec<f64>,
}

impl ClassifierModel {
    /// He-normal weights and zero biases, drawn from `seed`.
    pub fn init(architecture: Architecture, seed: u64) -> Result<Self> {
        architecture.validate()?;
        let mut rng = rng::stream(seed, rng::INIT);
        let mut weights = Vec::with_capacity(architecture.param_count());
        for layer in architecture.layers() {
            let n = layer.param_count();
            if n == 0 {
                continue;
            }
            let std = (2.0 / layer.fan_in() as f64).sqrt();
            let normal =
                Normal::new(0.0, std).map_err(|e| Error::InvalidArchitecture(e.to_string()))?;
            weights.extend((0..layer.weight_count()).map(|_| normal.sample(&mut rng)));
            weights.extend(std::iter::repeat_n(0.0, n - layer.weight_count()));
        }
        Ok(Self {
            architecture,
            weights,
        })
    }

    pub fn from_weights(architecture: Architecture, weights: Vec<f64>) -> Result<Self> {
        architecture.validate()?;
        if weights.len() != architecture.param_count() {
            return Err(Error::DimensionMismatch {
                expected: architecture.param_count(),
                got: weights.len(),
            });
        }
        Ok(Self {
            architecture,
            weights,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_classes(&self) -> usize {
        self.architecture.num_classes
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features.len())?;
        Ok(network::forward(
            &self.architecture,
            &self.weights,
            features,
        ))
    }

    /// Most likely class; ties go to the lowest index.
    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.logits(features)?))
    }

    /// SHA-256 of the weight bits, with `-0.0` folded into `0.0`.
    pub fn weight_hash(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.weights {
            let w = if *w == 0.0 { 0.0f64 } else { *w };
            h.update(w.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    fn check_input(&self, dim: usize) -> Result<()> {
        if dim != self.architecture.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.architecture.input_dim,
                got: dim,
            });
        }
        Ok(())
    }

    pub(crate) fn check_dataset(&self, data: &LabeledDataset) -> Result<()> {
        self.check_input(data.feature_dim())?;
        if let Some(&label) = data.labels().iter().max() {
            if label >= self.num_classes() {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_classes: self.num_classes(),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn init_model(architecture: Architecture, seed: u64) -> Result<ClassifierModel> {
    ClassifierModel::init(architecture, seed)
}

/// Softmax probabilities, one row per input.
pub fn predict_proba<X: AsRef<[f64]>>(
    model: &ClassifierModel,
    features: &[X],
) -> Result<Vec<Vec<f64>>> {
    features
        .iter()
        .map(|x| model.logits(x.as_ref()).map(|z| objective::softmax(&z)))
        .collect()
}

/// Fraction of examples whose predicted class differs from the label.
pub fn evaluate_error(model: &ClassifierModel, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("cannot evaluate error".into()));
    }
    model.check_dataset(data)?;
    let mut wrong = 0usize;
    for e in data {
        if model.predict(&e.features)? != e.label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.len() as f64)
}

/// Cross-entropy of every example, in dataset order.
pub fn per_example_loss(model: &ClassifierModel, data: &LabeledDataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("cannot compute losses".into()));
    }
    model.check_dataset(data)?;
    data.iter()
        .map(|e| {
            Ok(objective::cross_entropy(
                &model.logits(&e.features)?,
                e.label,
            ))
        })
        .collect()
}
