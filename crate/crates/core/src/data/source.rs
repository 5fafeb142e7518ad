use std::fs::File;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Example, ExampleId, LabeledDataset, SplitTag};
use crate::error::{Error, Result};
use crate::rng;

/// Gaussian blobs: one isotropic Gaussian per class around a random center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobsConfig {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub train_per_class: usize,
    pub validation_per_class: usize,
    pub test_per_class: usize,
    /// Standard deviation of the class centers around the origin.
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
    /// Standard deviation of examples around their class center.
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_center_scale() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    1.0
}

impl BlobsConfig {
    /// Five-class desk task:
    /// 100 train, 25 validation and 100 test examples per class.
    pub fn desk_five_class() -> Self {
        Self {
            num_classes: 5,
            feature_dim: 16,
            train_per_class: 100,
            validation_per_class: 25,
            test_per_class: 100,
            center_scale: 1.0,
            noise: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::TooFewClasses(self.num_classes));
        }
        if self.feature_dim == 0 {
            return Err(Error::InvalidConfig(
                "blobs feature_dim must be positive".into(),
            ));
        }
        if !(self.center_scale.is_finite() && self.noise.is_finite())
            || self.center_scale < 0.0
            || self.noise < 0.0
        {
            return Err(Error::InvalidConfig(
                "blobs center_scale and noise must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Blobs(BlobsConfig),
    /// Directory holding `train.csv`, `validation.csv` and `test.csv`.
    ///
    /// Each row is `label,f0,f1,...`; an optional header row whose first
    /// field is not an integer is skipped. The class count is one more than
    /// the largest label found in any split.
    Archive {
        path: PathBuf,
    },
}

impl DatasetSource {
    /// Resolves a dataset identifier such as `blobs` or `archive`.
    pub fn from_identifier(id: &str, path: Option<&Path>) -> Result<Self> {
        match (id, path) {
            ("blobs", _) => Ok(DatasetSource::Blobs(BlobsConfig::desk_five_class())),
            ("archive", Some(p)) => Ok(DatasetSource::Archive {
                path: p.to_path_buf(),
            }),
            ("archive", None) => Err(Error::InvalidConfig("archive source needs a path".into())),
            (other, _) => Err(Error::UnknownDataset(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplits {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

/// Loads the train/validation/test triplet. Synthetic sources are a pure
/// function of `seed`; archives ignore it.
pub fn load_dataset(source: &DatasetSource, seed: u64) -> Result<DatasetSplits> {
    match source {
        DatasetSource::Blobs(cfg) => generate_blobs(cfg, seed),
        DatasetSource::Archive { path } => load_archive(path),
    }
}

fn generate_blobs(cfg: &BlobsConfig, seed: u64) -> Result<DatasetSplits> {
    cfg.validate()?;
    let mut rng = rng::stream(seed, rng::DATA);
    let centers: Vec<Vec<f64>> = (0..cfg.num_classes)
        .map(|_| {
            (0..cfg.feature_dim)
                .map(|_| cfg.center_scale * gaussian(&mut rng))
                .collect()
        })
        .collect();

    let mut make = |split: SplitTag, per_class: usize| -> Result<LabeledDataset> {
        let mut examples = Vec::with_capacity(per_class * cfg.num_classes);
        for i in 0..per_class {
            for (label, center) in centers.iter().enumerate() {
                let features = center
                    .iter()
                    .map(|c| c + cfg.noise * gaussian(&mut rng))
                    .collect();
                examples.push(Example {
                    id: ExampleId {
                        split,
                        index: i * cfg.num_classes + label,
                    },
                    features,
                    label,
                    clean_label: label,
                });
            }
        }
        LabeledDataset::new(split, cfg.num_classes, cfg.feature_dim, examples)
    };

    Ok(DatasetSplits {
        train: make(SplitTag::Train, cfg.train_per_class)?,
        validation: make(SplitTag::Validation, cfg.validation_per_class)?,
        test: make(SplitTag::Test, cfg.test_per_class)?,
    })
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

type RawSplit = (PathBuf, Vec<(Vec<f64>, usize)>);

fn load_archive(dir: &Path) -> Result<DatasetSplits> {
    let read = |split: SplitTag| -> Result<RawSplit> {
        let path = dir.join(format!("{}.csv", split.as_str()));
        let rows = read_split_csv(&path)?;
        Ok((path, rows))
    };
    let (train_path, train) = read(SplitTag::Train)?;
    let (val_path, validation) = read(SplitTag::Validation)?;
    let (test_path, test) = read(SplitTag::Test)?;

    let num_classes = train
        .iter()
        .chain(&validation)
        .chain(&test)
        .map(|(_, y)| y + 1)
        .max()
        .unwrap_or(0);
    if num_classes < 2 {
        return Err(Error::TooFewClasses(num_classes));
    }
    let dim = train.first().map_or(0, |(x, _)| x.len());
    for (path, rows) in [
        (&train_path, &train),
        (&val_path, &validation),
        (&test_path, &test),
    ] {
        if let Some((i, (x, _))) = rows.iter().enumerate().find(|(_, (x, _))| x.len() != dim) {
            return Err(Error::CorruptArchive {
                path: path.clone(),
                line: i + 1,
                reason: format!("expected {dim} features, found {}", x.len()),
            });
        }
    }

    Ok(DatasetSplits {
        train: LabeledDataset::from_pairs(SplitTag::Train, num_classes, train)?,
        validation: LabeledDataset::from_pairs(SplitTag::Validation, num_classes, validation)?,
        test: LabeledDataset::from_pairs(SplitTag::Test, num_classes, test)?,
    })
}

fn read_split_csv(path: &Path) -> Result<Vec<(Vec<f64>, usize)>> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let corrupt = |line: usize, reason: String| Error::CorruptArchive {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| corrupt(line, e.to_string()))?;
        let mut fields = record.iter();
        let Some(first) = fields.next() else {
            continue;
        };
        let label: usize = match first.parse() {
            Ok(l) => l,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(corrupt(line, format!("invalid label `{first}`"))),
        };
        let features = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| corrupt(line, format!("invalid feature `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if features.is_empty() {
            return Err(corrupt(line, "row has no features".into()));
        }
        rows.push((features, label));
    }
    Ok(rows)
}

/// Writes splits in the archive layout read by [`DatasetSource::Archive`].
pub fn write_archive(splits: &DatasetSplits, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for data in [&splits.train, &splits.validation, &splits.test] {
        let mut writer =
            csv::Writer::from_path(dir.join(format!("{}.csv", data.split().as_str())))?;
        let mut header = vec!["label".to_string()];
        header.extend((0..data.feature_dim()).map(|i| format!("f{i}")));
        writer.write_record(&header)?;
        for e in data {
            let mut row = vec![e.label.to_string()];
            row.extend(e.features.iter().map(|v| v.to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
    }
    Ok(())
}
