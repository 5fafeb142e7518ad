//! Evaluation metrics: per-set error, class-confusion metrics, a loss-based
//! membership inference attack and the scale-up factor.

mod confusion;
mod mia;

pub use confusion::{confusion_matrix, fgt_err, ic_err, ConfusionMatrix};
pub use mia::{
    clip_loss, fit_logistic, mia_from_losses, mia_score, LogisticModel, MiaResult, MIA_FOLDS,
    MIA_LOSS_CLIP,
};

use crate::error::{Error, Result};

/// `retrain_seconds / method_seconds`.
pub fn scale_up_factor(retrain_seconds: f64, method_seconds: f64) -> Result<f64> {
    for (name, v) in [
        ("retrain_seconds", retrain_seconds),
        ("method_seconds", method_seconds),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositive(format!("{name} = {v}")));
        }
    }
    Ok(retrain_seconds / method_seconds)
}

/// Arithmetic mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
