//! Labeled datasets and the splits unlearning operates on.
//!
//! A [`LabeledDataset`] is an immutable, ordered list of examples. Each
//! example carries a stable [`ExampleId`] (split tag plus position in the
//! canonical ordering of that split), so subsets can always be checked for
//! disjointness and coverage against the dataset they came from.

mod source;
mod split;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use source::{load_dataset, write_archive, BlobsConfig, DatasetSource, DatasetSplits};
pub use split::{
    build_matched_validation, inject_confusion, split_retain_forget, ConfusedTrain, ConfusionSpec,
    ForgetSpec, MatchedValidation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExampleId {
    pub split: SplitTag,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: ExampleId,
    pub features: Vec<f64>,
    /// Label used for training and error computation. Differs from
    /// `clean_label` only for examples corrupted by [`inject_confusion`].
    pub label: usize,
    pub clean_label: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    split: SplitTag,
    num_classes: usize,
    feature_dim: usize,
    examples: Vec<Example>,
}

impl LabeledDataset {
    pub fn new(
        split: SplitTag,
        num_classes: usize,
        feature_dim: usize,
        examples: Vec<Example>,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::TooFewClasses(num_classes));
        }
        let mut seen = HashSet::with_capacity(examples.len());
        for ex in &examples {
            for label in [ex.label, ex.clean_label] {
                if label >= num_classes {
                    return Err(Error::LabelOutOfRange { label, num_classes });
                }
            }
            if ex.features.len() != feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: feature_dim,
                    got: ex.features.len(),
                });
            }
            if !seen.insert(ex.id) {
                return Err(Error::InvalidSplit(format!(
                    "duplicate example id {:?}",
                    ex.id
                )));
            }
        }
        Ok(Self {
            split,
            num_classes,
            feature_dim,
            examples,
        })
    }

    /// Builds a split from `(features, label)` pairs, assigning ids by position.
    pub fn from_pairs(
        split: SplitTag,
        num_classes: usize,
        pairs: Vec<(Vec<f64>, usize)>,
    ) -> Result<Self> {
        let feature_dim = pairs.first().map_or(0, |(x, _)| x.len());
        let examples = pairs
            .into_iter()
            .enumerate()
            .map(|(index, (features, label))| Example {
                id: ExampleId { split, index },
                features,
                label,
                clean_label: label,
            })
            .collect();
        Self::new(split, num_classes, feature_dim, examples)
    }

    pub fn split(&self) -> SplitTag {
        self.split
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    pub fn ids(&self) -> Vec<ExampleId> {
        self.examples.iter().map(|e| e.id).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Number of examples per (possibly corrupted) label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for e in &self.examples {
            counts[e.label] += 1;
        }
        counts
    }

    pub fn label_set(&self) -> BTreeSet<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn clean_label_set(&self) -> BTreeSet<usize> {
        self.examples.iter().map(|e| e.clean_label).collect()
    }

    /// Keeps the examples matching `keep`, preserving order and ids.
    pub fn filter<F>(&self, mut keep: F) -> LabeledDataset
    where
        F: FnMut(&Example) -> bool,
    {
        LabeledDataset {
            split: self.split,
            num_classes: self.num_classes,
            feature_dim: self.feature_dim,
            examples: self.examples.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Examples whose label is in `classes`.
    pub fn restrict_to_classes(&self, classes: &BTreeSet<usize>) -> LabeledDataset {
        self.filter(|e| classes.contains(&e.label))
    }

    /// Examples at the given positions, in the given order.
    pub(crate) fn select(&self, positions: &[usize]) -> Vec<&Example> {
        positions.iter().map(|&i| &self.examples[i]).collect()
    }

    /// Concatenates two subsets of the same split and restores canonical order.
    pub fn union(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        if self.split != other.split
            || self.num_classes != other.num_classes
            || self.feature_dim != other.feature_dim
        {
            return Err(Error::InvalidSplit(
                "union of datasets from different splits".into(),
            ));
        }
        let mut examples: Vec<Example> = self
            .examples
            .iter()
            .chain(other.examples.iter())
            .cloned()
            .collect();
        examples.sort_by_key(|e| e.id);
        LabeledDataset::new(self.split, self.num_classes, self.feature_dim, examples)
    }

    /// Per-class positions of examples, keyed by label.
    pub(crate) fn positions_by_label(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (pos, e) in self.examples.iter().enumerate() {
            map.entry(e.label).or_default().push(pos);
        }
        map
    }
}

impl<'a> IntoIterator for &'a LabeledDataset {
    type Item = &'a Example;
    type IntoIter = std::slice::Iter<'a, Example>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}
