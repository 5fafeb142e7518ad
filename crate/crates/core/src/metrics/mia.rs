//! Loss-based membership inference.
//!
//! The attacker sees one feature per example, its clipped cross-entropy loss,
//! and must tell forget examples (label 1) from held-out test examples
//! (label 0). Accuracy near 0.5 means the losses carry no membership signal.

use rand::seq::index;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mean_std;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{per_example_loss, ClassifierModel};
use crate::rng;

pub const MIA_FOLDS: usize = 5;
pub const MIA_LOSS_CLIP: f64 = 400.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiaResult {
    pub attack_accuracy_mean: f64,
    pub attack_accuracy_std: f64,
    pub fold_accuracies: Vec<f64>,
    /// Forget examples used after balancing.
    pub n_forget: usize,
    /// Test examples used after balancing.
    pub n_test: usize,
}

pub fn clip_loss(loss: f64) -> f64 {
    loss.clamp(-MIA_LOSS_CLIP, MIA_LOSS_CLIP)
}

/// `P(member | x) = sigmoid(weight * x + bias)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticModel {
    pub weight: f64,
    pub bias: f64,
}

impl LogisticModel {
    pub fn decision(&self, x: f64) -> f64 {
        self.weight * x + self.bias
    }

    pub fn predict(&self, x: f64) -> bool {
        self.decision(x) > 0.0
    }
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Minimizes `0.5 * weight^2 + c * sum_i logloss_i` (bias unpenalized) by
/// damped Newton iterations.
pub fn fit_logistic(xs: &[f64], ys: &[bool], c: f64) -> LogisticModel {
    let objective = |w: f64, b: f64| {
        0.5 * w * w
            + c * xs
                .iter()
                .zip(ys)
                .map(|(&x, &y)| {
                    let z = w * x + b;
                    softplus(if y { -z } else { z })
                })
                .sum::<f64>()
    };
    let (mut w, mut b) = (0.0, 0.0);
    let mut f = objective(w, b);
    for _ in 0..100 {
        let (mut gw, mut gb, mut hww, mut hwb, mut hbb) = (w, 0.0, 1.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(ys) {
            let p = sigmoid(w * x + b);
            let r = c * (p - if y { 1.0 } else { 0.0 });
            let s = c * p * (1.0 - p);
            gw += r * x;
            gb += r;
            hww += s * x * x;
            hwb += s * x;
            hbb += s;
        }
        if gw.abs().max(gb.abs()) < 1e-10 {
            break;
        }
        let hbb = hbb + 1e-12;
        let det = hww * hbb - hwb * hwb;
        let (dw, db) = if det > 0.0 {
            ((hbb * gw - hwb * gb) / det, (hww * gb - hwb * gw) / det)
        } else {
            (gw / hww, gb / hbb)
        };
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-12 {
            let (nw, nb) = (w - step * dw, b - step * db);
            let nf = objective(nw, nb);
            if nf <= f {
                improved = nf < f;
                (w, b, f) = (nw, nb, nf);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    LogisticModel { weight: w, bias: b }
}

/// Runs the attack on precomputed losses.
pub fn mia_from_losses(forget_losses: &[f64], test_losses: &[f64], seed: u64) -> Result<MiaResult> {
    let n = forget_losses.len().min(test_losses.len());
    if n < MIA_FOLDS {
        return Err(Error::InsufficientSamples(format!(
            "membership attack needs at least {MIA_FOLDS} examples per side, got {} forget and {} test",
            forget_losses.len(),
            test_losses.len()
        )));
    }
    if forget_losses.iter().chain(test_losses).any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig(
            "membership attack received NaN losses".into(),
        ));
    }
    let mut rng = rng::stream(seed, rng::ATTACK);
    let mut balance = |losses: &[f64]| -> Vec<f64> {
        let mut keep = index::sample(&mut rng, losses.len(), n).into_vec();
        keep.sort_unstable();
        keep.into_iter().map(|i| clip_loss(losses[i])).collect()
    };
    let forget = balance(forget_losses);
    let test = balance(test_losses);

    // Stratified folds: each side is shuffled and dealt round-robin.
    let mut fold_of = |len: usize| -> Vec<usize> {
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        let mut folds = vec![0; len];
        for (rank, &i) in order.iter().enumerate() {
            folds[i] = rank % MIA_FOLDS;
        }
        folds
    };
    let forget_folds = fold_of(n);
    let test_folds = fold_of(n);
    let samples: Vec<(f64, bool, usize)> = forget
        .iter()
        .zip(&forget_folds)
        .map(|(&x, &k)| (x, true, k))
        .chain(test.iter().zip(&test_folds).map(|(&x, &k)| (x, false, k)))
        .collect();

    let fold_accuracies: Vec<f64> = (0..MIA_FOLDS)
        .map(|k| {
            let (xs, ys): (Vec<f64>, Vec<bool>) = samples
                .iter()
                .filter(|s| s.2 != k)
                .map(|s| (s.0, s.1))
                .unzip();
            let attacker = fit_logistic(&xs, &ys, 1.0);
            let held: Vec<_> = samples.iter().filter(|s| s.2 == k).collect();
            let correct = held.iter().filter(|s| attacker.predict(s.0) == s.1).count();
            correct as f64 / held.len() as f64
        })
        .collect();
    let (mean, std) = mean_std(&fold_accuracies);
    Ok(MiaResult {
        attack_accuracy_mean: mean,
        attack_accuracy_std: std,
        fold_accuracies,
        n_forget: n,
        n_test: n,
    })
}

/// Attack accuracy of telling `forget` members from `test` non-members by
/// their losses under `model`.
pub fn mia_score(
    model: &ClassifierModel,
    forget: &LabeledDataset,
    test: &LabeledDataset,
    seed: u64,
) -> Result<MiaResult> {
    if forget.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset("membership attack sets".into()));
    }
    mia_from_losses(
        &per_example_loss(model, forget)?,
        &per_example_loss(model, test)?,
        seed,
    )
}
