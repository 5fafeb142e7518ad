use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::ClassifierModel;

/// `counts[a][b]` is the number of examples labeled `a` predicted as `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(num_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    /// Counts `(label, prediction)` pairs.
    pub fn from_pairs<I>(num_classes: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::zeros(num_classes);
        for (label, pred) in pairs {
            for v in [label, pred] {
                if v >= num_classes {
                    return Err(Error::LabelOutOfRange {
                        label: v,
                        num_classes,
                    });
                }
            }
            m.counts[label][pred] += 1;
        }
        Ok(m)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, label: usize, prediction: usize) -> u64 {
        self.counts[label][prediction]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sum(&self, label: usize) -> u64 {
        self.counts[label].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Examples of class `label` predicted as anything else.
    pub fn row_errors(&self, label: usize) -> u64 {
        self.row_sum(label) - self.counts[label][label]
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::InvalidConfig(format!(
                "confused classes must differ, got {a} twice"
            )));
        }
        let c = self.num_classes();
        if let Some(&bad) = [a, b].iter().find(|&&v| v >= c) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                num_classes: c,
            });
        }
        Ok(())
    }
}

pub fn confusion_matrix(model: &ClassifierModel, data: &LabeledDataset) -> Result<ConfusionMatrix> {
    if data.is_empty() {
        return Err(Error::EmptyDataset(
            "cannot build a confusion matrix".into(),
        ));
    }
    model.check_dataset(data)?;
    let pairs = data
        .iter()
        .map(|e| model.predict(&e.features).map(|p| (e.label, p)))
        .collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_pairs(model.num_classes(), pairs)
}

/// Share of examples of classes `a` and `b` that are misclassified as
/// anything: `(errors(a) + errors(b)) / (|a| + |b|)`.
pub fn ic_err(matrix: &ConfusionMatrix, a: usize, b: usize) -> Result<f64> {
    matrix.check_pair(a, b)?;
    let (na, nb) = (matrix.row_sum(a), matrix.row_sum(b));
    if na == 0 || nb == 0 {
        return Err(Error::EmptyDataset(format!(
            "class {} has no examples",
            if na == 0 { a } else { b }
        )));
    }
    Ok((matrix.row_errors(a) + matrix.row_errors(b)) as f64 / (na + nb) as f64)
}

/// Misclassifications between `a` and `b` in either direction, as a count.
pub fn fgt_err(matrix: &ConfusionMatrix, a: usize, b: usize) -> Result<u64> {
    matrix.check_pair(a, b)?;
    Ok(matrix.get(a, b) + matrix.get(b, a))
}
