use std::collections::{BTreeSet, HashSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{Example, ExampleId, LabeledDataset};
use crate::error::{Error, Result};
use crate::rng;

/// Which training examples to forget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForgetSpec {
    /// Every training example of `target_class`.
    Class { target_class: usize },
    /// `count` examples of `target_class`, sampled uniformly without replacement.
    Selective { target_class: usize, count: usize },
}

impl ForgetSpec {
    pub fn target_class(&self) -> usize {
        match *self {
            ForgetSpec::Class { target_class } | ForgetSpec::Selective { target_class, .. } => {
                target_class
            }
        }
    }
}

/// Swap `count_per_class` labels between `class_a` and `class_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionSpec {
    pub class_a: usize,
    pub class_b: usize,
    pub count_per_class: usize,
}

fn class_positions(train: &LabeledDataset, class: usize) -> Result<Vec<usize>> {
    if class >= train.num_classes() {
        return Err(Error::InvalidSplit(format!(
            "class {class} out of range for {} classes",
            train.num_classes()
        )));
    }
    Ok(train
        .positions_by_label()
        .remove(&class)
        .unwrap_or_default())
}

fn sample_positions(pool: &[usize], count: usize, seed: u64, stream: u64) -> BTreeSet<usize> {
    let mut rng = rng::stream(seed, stream);
    index::sample(&mut rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

fn partition(
    train: &LabeledDataset,
    chosen: &HashSet<ExampleId>,
) -> (LabeledDataset, LabeledDataset) {
    let retain = train.filter(|e| !chosen.contains(&e.id));
    let forget = train.filter(|e| chosen.contains(&e.id));
    (retain, forget)
}

/// Splits `train` into `(retain, forget)`. Both keep canonical order and ids.
pub fn split_retain_forget(
    train: &LabeledDataset,
    spec: &ForgetSpec,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let pool = class_positions(train, spec.target_class())?;
    if pool.is_empty() {
        return Err(Error::InvalidSplit(format!(
            "class {} has no training examples",
            spec.target_class()
        )));
    }
    let positions: BTreeSet<usize> = match *spec {
        ForgetSpec::Class { .. } => pool.into_iter().collect(),
        ForgetSpec::Selective {
            count,
            target_class,
        } => {
            if count == 0 || count > pool.len() {
                return Err(Error::InvalidSplit(format!(
                    "selective count {count} must be in 1..={} for class {target_class}",
                    pool.len()
                )));
            }
            sample_positions(&pool, count, seed, rng::SPLIT)
        }
    };
    let chosen: HashSet<ExampleId> = positions.iter().map(|&p| train.examples()[p].id).collect();
    Ok(partition(train, &chosen))
}

/// Output of [`inject_confusion`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusedTrain {
    /// The full training split with corrupted labels in place.
    pub confused_train: LabeledDataset,
    /// All and only the mislabeled examples, carrying their corrupted labels.
    pub forget: LabeledDataset,
    pub retain: LabeledDataset,
}

pub fn inject_confusion(
    train: &LabeledDataset,
    spec: &ConfusionSpec,
    seed: u64,
) -> Result<ConfusedTrain> {
    if spec.class_a == spec.class_b {
        return Err(Error::InvalidSplit("confused classes must differ".into()));
    }
    let pool_a = class_positions(train, spec.class_a)?;
    let pool_b = class_positions(train, spec.class_b)?;
    let n = spec.count_per_class;
    if n > pool_a.len().min(pool_b.len()) {
        return Err(Error::InvalidSplit(format!(
            "cannot confuse {n} examples per class: classes have {} and {} examples",
            pool_a.len(),
            pool_b.len()
        )));
    }
    // Both draws come from one stream so the pair is a single seeded event.
    let mut rng = rng::stream(seed, rng::SPLIT);
    let flip_a: BTreeSet<usize> = index::sample(&mut rng, pool_a.len(), n)
        .into_iter()
        .map(|i| pool_a[i])
        .collect();
    let flip_b: BTreeSet<usize> = index::sample(&mut rng, pool_b.len(), n)
        .into_iter()
        .map(|i| pool_b[i])
        .collect();

    let examples: Vec<Example> = train
        .examples()
        .iter()
        .enumerate()
        .map(|(pos, e)| {
            let mut e = e.clone();
            if flip_a.contains(&pos) {
                e.label = spec.class_b;
            } else if flip_b.contains(&pos) {
                e.label = spec.class_a;
            }
            e
        })
        .collect();
    let confused_train = LabeledDataset::new(
        train.split(),
        train.num_classes(),
        train.feature_dim(),
        examples,
    )?;
    let forget = confused_train.filter(|e| e.label != e.clean_label);
    let retain = confused_train.filter(|e| e.label == e.clean_label);
    Ok(ConfusedTrain {
        confused_train,
        forget,
        retain,
    })
}

/// A validation set distributed like the forget set.
#[derive(Clone, Debug, PartialEq)]
pub enum MatchedValidation {
    /// Filtered from the validation split.
    Validation(LabeledDataset),
    /// Held out from the retain set because validation lacked the forget
    /// classes. `retain` is the retain set with the held-out examples removed
    /// and must replace the original retain set.
    RetainHoldout {
        matched: LabeledDataset,
        retain: LabeledDataset,
    },
}

impl MatchedValidation {
    pub fn dataset(&self) -> &LabeledDataset {
        match self {
            MatchedValidation::Validation(d) => d,
            MatchedValidation::RetainHoldout { matched, .. } => matched,
        }
    }

    pub fn into_dataset(self) -> LabeledDataset {
        match self {
            MatchedValidation::Validation(d) => d,
            MatchedValidation::RetainHoldout { matched, .. } => matched,
        }
    }
}

/// Fraction of same-class retain examples held out by the fallback path.
const HOLDOUT_STRIDE: usize = 5;

/// Keeps the validation examples whose class appears in the forget set.
///
/// Forget classes are taken from the clean labels, so a confusion forget set
/// maps back to the classes its examples truly belong to. If validation has
/// no such examples, every fifth retain example of those classes is held out
/// instead.
pub fn build_matched_validation(
    validation: &LabeledDataset,
    forget: &LabeledDataset,
    retain: &LabeledDataset,
) -> Result<MatchedValidation> {
    if validation.is_empty() {
        return Err(Error::EmptyDataset("validation split".into()));
    }
    let classes = forget.clean_label_set();
    let matched = validation.filter(|e| classes.contains(&e.clean_label));
    if !matched.is_empty() {
        return Ok(MatchedValidation::Validation(matched));
    }

    let held: HashSet<ExampleId> = retain
        .iter()
        .filter(|e| classes.contains(&e.clean_label))
        .step_by(HOLDOUT_STRIDE)
        .map(|e| e.id)
        .collect();
    if held.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no validation or retain examples for forget classes {classes:?}"
        )));
    }
    Ok(MatchedValidation::RetainHoldout {
        matched: retain.filter(|e| held.contains(&e.id)),
        retain: retain.filter(|e| !held.contains(&e.id)),
    })
}
