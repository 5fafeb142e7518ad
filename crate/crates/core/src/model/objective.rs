//! Weighted sums of per-example losses and their gradients.
//!
//! Every training objective in the crate (supervised cross-entropy, SCRUB's
//! min and max steps, NegGrad) is a list of [`LossTerm`]s. Each term is a
//! cross-entropy against a label or a KL divergence from a fixed teacher
//! distribution, scaled by a weight that already includes any batch-mean
//! normalization.

use super::network;
use super::ClassifierModel;

/// Student probabilities are floored here inside the KL logarithm.
pub const KL_PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Label(usize),
    /// Teacher class probabilities; the loss is `KL(teacher || student)`.
    Teacher(&'a [f64]),
}

#[derive(Clone, Copy, Debug)]
pub struct LossTerm<'a> {
    pub features: &'a [f64],
    pub target: Target<'a>,
    pub weight: f64,
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// `exp(log_softmax)`, so teacher probabilities computed here agree bit for
/// bit with the student probabilities used inside the loss gradients.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Cross-entropy of `logits` against `label`.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    -log_softmax(logits)[label]
}

/// `KL(teacher || softmax(logits))` with the student floor applied.
pub fn kl_from_logits(teacher: &[f64], logits: &[f64]) -> f64 {
    let floor = KL_PROBABILITY_FLOOR.ln();
    log_softmax(logits)
        .iter()
        .zip(teacher)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&ls, &p)| p * (p.ln() - ls.max(floor)))
        .sum()
}

/// Loss value and `d loss / d logits` for one term, before weighting.
fn term_loss_grad(target: Target<'_>, logits: &[f64]) -> (f64, Vec<f64>) {
    let log_p = log_softmax(logits);
    let p: Vec<f64> = log_p.iter().map(|v| v.exp()).collect();
    match target {
        Target::Label(y) => {
            let mut g = p;
            g[y] -= 1.0;
            (-log_p[y], g)
        }
        Target::Teacher(t) => {
            // d/dz_j of -sum_c t_c * log p_c over unfloored classes c:
            //   p_j * sum_c t_c  -  t_j [j unfloored]
            let floor = KL_PROBABILITY_FLOOR.ln();
            let mut loss = 0.0;
            let mut mass = 0.0;
            let mut g = vec![0.0; logits.len()];
            for (j, (&lp, &tj)) in log_p.iter().zip(t).enumerate() {
                if tj > 0.0 {
                    loss += tj * (tj.ln() - lp.max(floor));
                    if lp > floor {
                        mass += tj;
                        g[j] -= tj;
                    }
                }
            }
            for (gj, pj) in g.iter_mut().zip(&p) {
                *gj += pj * mass;
            }
            (loss, g)
        }
    }
}

/// `sum_i weight_i * loss_i`. Zero-weight terms are skipped.
pub fn objective_value(model: &ClassifierModel, terms: &[LossTerm<'_>]) -> f64 {
    value_with(&model.architecture, &model.weights, terms)
}

/// Objective value and its gradient with respect to the model weights.
pub fn objective_gradient(model: &ClassifierModel, terms: &[LossTerm<'_>]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; model.weights.len()];
    let loss = accumulate_gradient(&model.architecture, &model.weights, terms, &mut grad);
    (loss, grad)
}

pub(crate) fn value_with(
    arch: &super::Architecture,
    weights: &[f64],
    terms: &[LossTerm<'_>],
) -> f64 {
    terms
        .iter()
        .filter(|t| t.weight != 0.0)
        .map(|t| {
            let logits = network::forward(arch, weights, t.features);
            let loss = match t.target {
                Target::Label(y) => cross_entropy(&logits, y),
                Target::Teacher(p) => kl_from_logits(p, &logits),
            };
            t.weight * loss
        })
        .sum()
}

/// Adds the objective gradient into `grad` and returns the objective value.
pub(crate) fn accumulate_gradient(
    arch: &super::Architecture,
    weights: &[f64],
    terms: &[LossTerm<'_>],
    grad: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for t in terms.iter().filter(|t| t.weight != 0.0) {
        let trace = network::forward_trace(arch, weights, t.features);
        let (loss, mut dlogits) = term_loss_grad(t.target, &trace.logits);
        total += t.weight * loss;
        for d in &mut dlogits {
            *d *= t.weight;
        }
        network::backward(arch, weights, &trace, &dlogits, grad);
    }
    total
}
