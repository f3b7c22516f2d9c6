//! Experiment configuration, read from TOML. See `docs/config.md` for the schema.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datasets::{
    gen_synthetic, gen_tictactoe, load_mnist_dir, load_tictactoe_csv, read_cache, shuffle_labels,
    Dataset,
};
use crate::error::{Error, Result};
use crate::infoplane::{BinRange, BinningSpec, DEFAULT_BINS};
use crate::nn::{ActivationKind, Architecture};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        #[serde(default)]
        label_seed: u64,
        #[serde(default)]
        split_seed: u64,
    },
    Tictactoe {
        #[serde(default)]
        split_seed: u64,
        /// Endgame CSV to load instead of enumerating the game tree.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    Mnist {
        dir: PathBuf,
        /// Keep only the first N training rows.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        train_subset: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        validation_subset: Option<usize>,
    },
    Cache {
        path: PathBuf,
    },
}

impl DatasetSpec {
    /// Loads or generates the dataset; relative paths resolve against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<Dataset> {
        let resolve = |p: &Path| match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };
        let ds = match self {
            DatasetSpec::Synthetic {
                label_seed,
                split_seed,
            } => gen_synthetic(*label_seed, *split_seed),
            DatasetSpec::Tictactoe { split_seed, csv } => match csv {
                Some(path) => load_tictactoe_csv(&resolve(path), *split_seed)?,
                None => gen_tictactoe(*split_seed),
            },
            DatasetSpec::Mnist {
                dir,
                train_subset,
                validation_subset,
            } => {
                let full = load_mnist_dir(&resolve(dir))?;
                if train_subset.is_some() || validation_subset.is_some() {
                    full.subset(
                        train_subset.unwrap_or(full.train.len()),
                        validation_subset.unwrap_or(full.validation.len()),
                    )?
                } else {
                    full
                }
            }
            DatasetSpec::Cache { path } => read_cache(&resolve(path))?,
        };
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub hidden: Vec<usize>,
    pub activation: ActivationKind,
    /// Binarize weights (a BNN) or keep them full precision.
    pub binary: bool,
    #[serde(default = "default_true")]
    pub batchnorm: bool,
}

fn default_true() -> bool {
    true
}

/// Epochs (counted as completed training epochs, 0 = untrained) at which MI
/// snapshots are taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MiSchedule {
    /// Every epoch below `dense_until`, then log-spaced up to the final epoch,
    /// about `total` points overall.
    LogSpaced {
        dense_until: usize,
        total: usize,
    },
    Epochs {
        epochs: Vec<usize>,
    },
}

impl Default for MiSchedule {
    fn default() -> Self {
        MiSchedule::LogSpaced {
            dense_until: 100,
            total: 120,
        }
    }
}

impl MiSchedule {
    pub fn resolve(&self, epochs: usize) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = match self {
            MiSchedule::Epochs { epochs: list } => {
                if let Some(bad) = list.iter().find(|&&e| e > epochs) {
                    return Err(Error::Config(format!(
                        "mi_schedule epoch {bad} beyond the {epochs} training epochs"
                    )));
                }
                list.iter().copied().collect()
            }
            &MiSchedule::LogSpaced { dense_until, total } => {
                if dense_until == 0 {
                    return Err(Error::Config("mi_schedule.dense_until must be ≥ 1".into()));
                }
                let mut set: BTreeSet<usize> = (0..dense_until.min(epochs + 1)).collect();
                if epochs >= dense_until {
                    let remaining = total.saturating_sub(set.len()).max(1);
                    let lo = dense_until as f64;
                    let ratio = epochs as f64 / lo;
                    for k in 0..=remaining {
                        let e = (lo * ratio.powf(k as f64 / remaining as f64)).round() as usize;
                        set.insert(e.clamp(dense_until, epochs));
                    }
                }
                set.insert(epochs);
                set
            }
        };
        Ok(set.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetSpec,
    pub network: NetworkSpec,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_bn_range: Option<[f64; 2]>,
    #[serde(default)]
    pub mi_schedule: MiSchedule,
    #[serde(default)]
    pub label_shuffle: bool,
    #[serde(default)]
    pub label_shuffle_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be ≥ 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch_size must be ≥ 2".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.network.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        self.network
            .activation
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.binning()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.mi_schedule.resolve(self.epochs)?;
        Ok(())
    }

    pub fn binning(&self) -> BinningSpec {
        let mut spec = BinningSpec::with_bins(self.bins);
        if let Some([lo, hi]) = self.post_bn_range {
            spec.post_bn_range = BinRange { lo, hi };
        }
        spec
    }

    pub fn architecture(&self, input_dim: usize, classes: usize) -> Architecture {
        Architecture {
            input_dim,
            hidden: self.network.hidden.clone(),
            classes,
            activation: self.network.activation,
            binary_weights: self.network.binary,
            batchnorm: self.network.batchnorm,
        }
    }

    /// Dataset after the optional label shuffle.
    pub fn load_dataset(&self, base: Option<&Path>) -> Result<Dataset> {
        let ds = self.dataset.load(base)?;
        Ok(if self.label_shuffle {
            shuffle_labels(&ds, self.label_shuffle_seed)
        } else {
            ds
        })
    }

    /// Stable identifier of everything that shapes a run except the seed
    /// list and output location.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.seeds.clear();
        canonical.output_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}
