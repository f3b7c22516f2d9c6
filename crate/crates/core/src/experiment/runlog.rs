//! Run logs and their JSONL encoding.
//!
//! Line 1 is a `header` record; then one `epoch` record per epoch, each
//! followed by the `snapshot` records taken at that epoch. Every record
//! carries a `record` tag. Floats use the shortest representation that parses
//! back to the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::stats::GradientStats;
use crate::error::{Error, Result};
use crate::infoplane::MISnapshot;
use crate::nn::TapId;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub dataset: String,
    pub input_dim: usize,
    pub classes: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub updates_per_epoch: usize,
    /// Upper bounds for the information-plane axes: log₂ of the number of
    /// distinct inputs and of the class count.
    pub mi_ceiling_x_bits: f64,
    pub mi_ceiling_y_bits: f64,
    pub taps: Vec<TapId>,
    pub schedule: Vec<usize>,
}

/// Losses and accuracies after `epoch` completed training epochs
/// (epoch 0 is the untrained network and has no gradient statistics).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochRecord {
    pub epoch: usize,
    pub updates: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad: Option<GradientStats>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub meta: RunMeta,
    pub epochs: Vec<EpochRecord>,
    pub snapshots: Vec<MISnapshot>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    schema_version: u32,
    config_hash: String,
    seed: u64,
    config: ExperimentConfig,
    meta: RunMeta,
}

#[derive(Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header(HeaderRecord),
    Epoch(EpochRecord),
    Snapshot(MISnapshot),
}

impl RunLog {
    pub fn snapshots_at(&self, epoch: usize) -> impl Iterator<Item = &MISnapshot> {
        self.snapshots.iter().filter(move |s| s.epoch == epoch)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let mut push = |r: &Record| -> Result<()> {
            out.push_str(
                &serde_json::to_string(r).map_err(|e| Error::InvalidArgument(e.to_string()))?,
            );
            out.push('\n');
            Ok(())
        };
        push(&Record::Header(HeaderRecord {
            schema_version: self.schema_version,
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            config: self.config.clone(),
            meta: self.meta.clone(),
        }))?;
        let mut snaps = self.snapshots.iter().peekable();
        for rec in &self.epochs {
            push(&Record::Epoch(rec.clone()))?;
            while let Some(s) = snaps.next_if(|s| s.epoch <= rec.epoch) {
                push(&Record::Snapshot(*s))?;
            }
        }
        for s in snaps {
            push(&Record::Snapshot(*s))?;
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header: Option<HeaderRecord> = None;
        let mut epochs = Vec::new();
        let mut snapshots = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(line).map_err(|e| {
                let msg = e.to_string();
                if msg.contains("unknown field") || msg.contains("unknown variant") {
                    Error::Schema {
                        expected: SCHEMA_VERSION,
                        found: header.as_ref().map_or(0, |h| h.schema_version),
                        detail: format!("line {line_no}: {msg}"),
                    }
                } else {
                    Error::Parse {
                        line: line_no,
                        detail: msg,
                    }
                }
            })?;
            match record {
                Record::Header(h) => {
                    if header.is_some() || line_no != 1 {
                        return Err(Error::Parse {
                            line: line_no,
                            detail: "header must be the first and only header record".into(),
                        });
                    }
                    if h.schema_version != SCHEMA_VERSION {
                        return Err(Error::Schema {
                            expected: SCHEMA_VERSION,
                            found: h.schema_version,
                            detail: "run log written by an incompatible version".into(),
                        });
                    }
                    header = Some(h);
                }
                _ if header.is_none() => {
                    return Err(Error::Parse {
                        line: line_no,
                        detail: "missing header record".into(),
                    })
                }
                Record::Epoch(e) => {
                    if e.epoch != epochs.len() {
                        return Err(Error::Parse {
                            line: line_no,
                            detail: format!("epoch {} out of sequence", e.epoch),
                        });
                    }
                    epochs.push(e);
                }
                Record::Snapshot(s) => snapshots.push(s),
            }
        }
        let h = header.ok_or(Error::Parse {
            line: 1,
            detail: "empty run log".into(),
        })?;
        Ok(RunLog {
            schema_version: h.schema_version,
            config_hash: h.config_hash,
            seed: h.seed,
            config: h.config,
            meta: h.meta,
            epochs,
            snapshots,
        })
    }

    pub fn persist(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        w.write_all(self.to_jsonl()?.as_bytes()).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::io(path, e))?);
            text.push('\n');
        }
        Self::from_jsonl(&text)
    }
}

/// File name used for one seed's log inside a run directory.
pub fn run_file_name(seed: u64) -> String {
    format!("seed-{seed}.jsonl")
}

/// Every `*.jsonl` file directly inside `dir`, in file-name order.
pub fn load_run_dir(dir: &Path) -> Result<Vec<RunLog>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Missing(format!(
            "no .jsonl run logs in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            RunLog::load(p).map_err(|e| match e {
                Error::Parse { line, detail } => Error::Parse {
                    line,
                    detail: format!("{}: {detail}", p.display()),
                },
                other => other,
            })
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::experiment::config::{DatasetSpec, MiSchedule, NetworkSpec};
    use crate::experiment::stats::NormPair;
    use crate::infoplane::Split;
    use crate::nn::{ActivationKind, TapKind};

    pub(crate) fn sample() -> RunLog {
        let config = ExperimentConfig {
            name: "t".into(),
            dataset: DatasetSpec::Synthetic {
                label_seed: 1,
                split_seed: 2,
            },
            network: NetworkSpec {
                hidden: vec![3],
                activation: ActivationKind::SwishSign { beta: 5.0 },
                binary: true,
                batchnorm: true,
            },
            batch_size: 8,
            learning_rate: 1e-4,
            epochs: 1,
            seeds: vec![0],
            bins: 30,
            post_bn_range: None,
            mi_schedule: MiSchedule::default(),
            label_shuffle: false,
            label_shuffle_seed: 0,
            output_dir: None,
        };
        let tap = TapId {
            layer: 0,
            kind: TapKind::PostAct,
        };
        let snap = |epoch| MISnapshot {
            epoch,
            tap,
            split: Split::Test,
            i_tx_bits: 0.1 + 0.2,
            i_ty_bits: 1.0 / 3.0,
        };
        RunLog {
            schema_version: SCHEMA_VERSION,
            config_hash: config.config_hash(),
            seed: 0,
            meta: RunMeta {
                dataset: "synthetic".into(),
                input_dim: 12,
                classes: 2,
                train_size: 3276,
                validation_size: 820,
                updates_per_epoch: 52,
                mi_ceiling_x_bits: 12.0,
                mi_ceiling_y_bits: 1.0,
                taps: vec![tap],
                schedule: vec![0, 1],
            },
            config,
            epochs: vec![
                EpochRecord {
                    epoch: 0,
                    updates: 0,
                    train_loss: std::f64::consts::LN_2,
                    validation_loss: 0.7,
                    train_accuracy: 0.5,
                    validation_accuracy: 0.49,
                    grad: None,
                },
                EpochRecord {
                    epoch: 1,
                    updates: 52,
                    train_loss: 0.6925,
                    validation_loss: 1e-300,
                    train_accuracy: 0.51,
                    validation_accuracy: 0.5,
                    grad: Some(GradientStats {
                        mean_norm: 0.123_456_789_012_345_67,
                        std_norm: 2.5e-17,
                        batches: 52,
                        per_layer: vec![NormPair {
                            mean_norm: 0.1,
                            std_norm: 0.2,
                        }],
                    }),
                },
            ],
            snapshots: vec![snap(0), snap(1)],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let log = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/run.jsonl");
        log.persist(&path).unwrap();
        assert_eq!(RunLog::load(&path).unwrap(), log);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text
            .lines()
            .next()
            .unwrap()
            .contains("\"schema_version\":1"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn truncated_file_reports_line() {
        let text = sample().to_jsonl().unwrap();
        let cut = &text[..text.len() - 20];
        match RunLog::from_jsonl(cut) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let text = sample().to_jsonl().unwrap();
        let patched = text.replacen("\"updates\":52", "\"updates\":52,\"lr_now\":0.1", 1);
        assert!(matches!(
            RunLog::from_jsonl(&patched),
            Err(Error::Schema { .. })
        ));
        let patched = text.replacen("\"schema_version\":1", "\"schema_version\":2", 1);
        assert!(matches!(
            RunLog::from_jsonl(&patched),
            Err(Error::Schema { found: 2, .. })
        ));
    }

    #[test]
    fn header_required_first() {
        let text = sample().to_jsonl().unwrap();
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert!(matches!(
            RunLog::from_jsonl(&body.join("\n")),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(RunLog::from_jsonl("").is_err());
    }
}
