use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{ConfusionSpec, DatasetSource, ForgetSpec};
use crate::error::{Error, Result};
use crate::model::{Architecture, TrainConfig};
use crate::unlearn::ScrubConfig;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "SCRUB_OUTPUT_ROOT";

/// Evaluation suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Suite {
    /// Retain, forget and test error.
    M1,
    /// Class-confusion metrics between the two confused classes.
    M2,
    /// Loss-based membership inference on the forget set.
    M3,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" => Ok(Suite::M1),
            "M2" => Ok(Suite::M2),
            "M3" => Ok(Suite::M3),
            other => Err(Error::InvalidConfig(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchitectureSpec {
    Mlp {
        hidden: Vec<usize>,
    },
    /// Features are read as `channels x height x width` images.
    Cnn {
        channels: usize,
        height: usize,
        width: usize,
        conv_channels: Vec<usize>,
    },
}

impl ArchitectureSpec {
    pub fn build(&self, input_dim: usize, num_classes: usize) -> Result<Architecture> {
        match self {
            ArchitectureSpec::Mlp { hidden } => Architecture::mlp(input_dim, hidden, num_classes),
            ArchitectureSpec::Cnn {
                channels,
                height,
                width,
                conv_channels,
            } => {
                let arch =
                    Architecture::cnn(*channels, *height, *width, conv_channels, num_classes)?;
                if arch.input_dim != input_dim {
                    return Err(Error::DimensionMismatch {
                        expected: arch.input_dim,
                        got: input_dim,
                    });
                }
                Ok(arch)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Original,
    Retrain,
    Finetune,
    Neggrad,
    CfK,
    EuK,
    Scrub,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Original => "original",
            MethodKind::Retrain => "retrain",
            MethodKind::Finetune => "finetune",
            MethodKind::Neggrad => "neggrad",
            MethodKind::CfK => "cf_k",
            MethodKind::EuK => "eu_k",
            MethodKind::Scrub => "scrub",
        }
    }
}

/// One column of the method grid.
///
/// `train` defaults to the finetune recipe for Finetune, NegGrad and CF-k,
/// and to the original model's recipe for Retrain and EU-k. Seeds inside
/// `train` and `scrub` are replaced by the grid seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub kind: MethodKind,
    /// Row label; defaults to the kind, with `+r` appended when rewinding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub rewind: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scrub: Option<ScrubConfig>,
}

impl MethodSpec {
    pub fn new(kind: MethodKind) -> Self {
        Self {
            kind,
            name: None,
            beta: None,
            k: None,
            rewind: false,
            train: None,
            scrub: None,
        }
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None if self.rewind => format!("{}+r", self.kind.as_str()),
            None => self.kind.as_str().to_string(),
        }
    }

    fn validate(&self) -> Result<()> {
        let label = self.label();
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("method `{label}`: {msg}")));
        let uses_k = matches!(self.kind, MethodKind::CfK | MethodKind::EuK);
        if uses_k != self.k.is_some() {
            return bad("`k` is required for cf_k and eu_k and only allowed there");
        }
        if (self.kind == MethodKind::Neggrad) != self.beta.is_some() {
            return bad("`beta` is required for neggrad and only allowed there");
        }
        if (self.kind == MethodKind::Scrub) != self.scrub.is_some() {
            return bad("a `scrub` table is required for scrub and only allowed there");
        }
        if self.rewind && self.kind != MethodKind::Scrub {
            return bad("only scrub supports rewinding");
        }
        if matches!(self.kind, MethodKind::Original | MethodKind::Scrub) && self.train.is_some() {
            return bad("this method takes no `train` table");
        }
        if let Some(beta) = self.beta {
            if !(0.0..=1.0).contains(&beta) {
                return bad("beta must lie in [0, 1]");
            }
        }
        if label.is_empty() || label.contains([',', '"', '\n', '/']) {
            return bad("names must be nonempty and free of commas, quotes, slashes and newlines");
        }
        if let Some(t) = &self.train {
            t.validate()?;
        }
        if let Some(s) = &self.scrub {
            s.validate()?;
        }
        Ok(())
    }
}

/// A full experiment: data, model, forget request, methods, seeds and suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seeds: Vec<u64>,
    pub suite: BTreeSet<Suite>,
    /// Output root; falls back to `$SCRUB_OUTPUT_ROOT`, then `runs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetSource,
    pub architecture: ArchitectureSpec,
    /// Recipe for the original model trained on all training data.
    pub original: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forget: Option<ForgetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionSpec>,
    pub methods: Vec<MethodSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.suite.is_empty() {
            return bad("at least one suite is required".into());
        }
        let unique: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if unique.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        match (&self.forget, &self.confusion) {
            (Some(_), Some(_)) => {
                return bad("give either `forget` or `confusion`, not both".into())
            }
            (None, None) => return bad("a `forget` or `confusion` table is required".into()),
            _ => {}
        }
        if self.suite.contains(&Suite::M2) && self.confusion.is_none() {
            return bad("suite M2 requires a `confusion` table".into());
        }
        if self.suite.contains(&Suite::M3) && self.confusion.is_some() {
            return bad(
                "suite M3 cannot run on a confusion task: the forget-set labels for the attack are ambiguous"
                    .into(),
            );
        }
        self.original.validate()?;
        let mut labels = BTreeSet::new();
        for m in &self.methods {
            m.validate()?;
            if !labels.insert(m.label()) {
                return bad(format!("duplicate method name `{}`", m.label()));
            }
        }
        Ok(())
    }

    /// Keeps only the named methods, in config order.
    pub fn select_methods(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            if !self.methods.iter().any(|m| &m.label() == n) {
                return Err(Error::InvalidConfig(format!(
                    "no method named `{n}` in config"
                )));
            }
        }
        self.methods.retain(|m| names.contains(&m.label()));
        Ok(())
    }

    /// Hex SHA-256 of the configuration without its output location.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = None;
        Ok(hex::encode(Sha256::digest(c.to_toml()?.as_bytes())))
    }

    /// Output root: the config's `output_dir`, else `$SCRUB_OUTPUT_ROOT`,
    /// else `runs`.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }
}
