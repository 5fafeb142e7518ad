//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the crate's numerical code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scrub::data::{LabeledDataset, SplitTag};
use scrub::model::{Architecture, ClassifierModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Forward pass of a plain MLP stored as, per dense layer, a row-major
/// `outputs x inputs` weight matrix followed by `outputs` biases, with ReLU
/// between dense layers.
pub fn mlp_logits(sizes: &[usize], weights: &[f64], x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    let mut offset = 0;
    for (layer, pair) in sizes.windows(2).enumerate() {
        let (n_in, n_out) = (pair[0], pair[1]);
        let w = &weights[offset..offset + n_in * n_out];
        let b = &weights[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        let mut out = vec![0.0; n_out];
        for o in 0..n_out {
            let mut z = b[o];
            for i in 0..n_in {
                z += w[o * n_in + i] * h[i];
            }
            out[o] = z;
        }
        if layer + 2 < sizes.len() {
            for v in &mut out {
                *v = v.max(0.0);
            }
        }
        h = out;
    }
    assert_eq!(offset, weights.len(), "layout mismatch");
    h
}

/// Softmax via the textbook definition with max-subtraction.
pub fn probs(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn ce(logits: &[f64], label: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// `sum_c p_c ln(p_c / max(q_c, 1e-12))`, skipping `p_c = 0`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for c in 0..p.len() {
        if p[c] > 0.0 {
            total += p[c] * (p[c] / q[c].max(1e-12)).ln();
        }
    }
    total
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize, allow_zeros: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            if allow_zeros && rng.random_bool(0.25) {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Random MLP weights with the given layer sizes.
pub fn random_mlp(rng: &mut ChaCha8Rng, sizes: &[usize], scale: f64) -> ClassifierModel {
    let arch =
        Architecture::mlp(sizes[0], &sizes[1..sizes.len() - 1], *sizes.last().unwrap()).unwrap();
    let weights = (0..arch.param_count())
        .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
        .collect();
    ClassifierModel::from_weights(arch, weights).unwrap()
}

pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    classes: usize,
    split: SplitTag,
) -> LabeledDataset {
    let pairs = (0..n)
        .map(|_| {
            let x = (0..dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            (x, rng.random_range(0..classes))
        })
        .collect();
    LabeledDataset::from_pairs(split, classes, pairs).unwrap()
}
