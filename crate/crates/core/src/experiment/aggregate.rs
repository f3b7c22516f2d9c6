//! Across-seed averaging of run logs.
//!
//! Variance uses the population convention (divide by the number of seeds),
//! so a single run has variance 0 and runs at 1 and 3 give mean 2, variance 1.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runlog::{RunLog, RunMeta};
use crate::error::{Error, Result};
use crate::infoplane::Split;
use crate::nn::TapId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub variance: f64,
}

impl Stat {
    /// Summed in the given order; callers fix the order to keep results
    /// independent of how runs were listed.
    pub fn of(values: &[f64]) -> Result<Stat> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("statistic of no values".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Stat { mean, variance })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedEpoch {
    pub epoch: usize,
    pub train_loss: Stat,
    pub validation_loss: Stat,
    pub train_accuracy: Stat,
    pub validation_accuracy: Stat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_mean_norm: Option<Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_std_norm: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedSnapshot {
    pub epoch: usize,
    pub tap: TapId,
    pub split: Split,
    pub i_tx_bits: Stat,
    pub i_ty_bits: Stat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedLog {
    pub config_hash: String,
    /// Ascending.
    pub seeds: Vec<u64>,
    pub config: ExperimentConfig,
    pub meta: RunMeta,
    pub epochs: Vec<AveragedEpoch>,
    pub snapshots: Vec<AveragedSnapshot>,
}

impl AveragedLog {
    pub fn snapshots_for(
        &self,
        tap: TapId,
        split: Split,
    ) -> impl Iterator<Item = &AveragedSnapshot> {
        self.snapshots
            .iter()
            .filter(move |s| s.tap == tap && s.split == split)
    }
}

fn stat_over<'a>(logs: &[&'a RunLog], f: impl Fn(&'a RunLog) -> f64) -> Result<Stat> {
    let values: Vec<f64> = logs.iter().map(|l| f(l)).collect();
    Stat::of(&values)
}

pub fn aggregate_runs(logs: &[RunLog]) -> Result<AveragedLog> {
    let first = logs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no run logs to aggregate".into()))?;
    let mut sorted: Vec<&RunLog> = logs.iter().collect();
    sorted.sort_by_key(|l| l.seed);
    for pair in sorted.windows(2) {
        if pair[0].seed == pair[1].seed {
            return Err(Error::InvalidArgument(format!(
                "seed {} appears more than once",
                pair[0].seed
            )));
        }
    }
    for log in &sorted {
        if log.config_hash != first.config_hash {
            return Err(Error::InvalidArgument(format!(
                "config hash mismatch: {} (seed {}) vs {} (seed {})",
                log.config_hash, log.seed, first.config_hash, first.seed
            )));
        }
        if log.epochs.len() != first.epochs.len() || log.snapshots.len() != first.snapshots.len() {
            return Err(Error::InvalidArgument(format!(
                "run for seed {} has {} epochs and {} snapshots, expected {} and {}",
                log.seed,
                log.epochs.len(),
                log.snapshots.len(),
                first.epochs.len(),
                first.snapshots.len()
            )));
        }
    }
    let base = sorted[0];

    let mut epochs = Vec::with_capacity(base.epochs.len());
    for (i, rec) in base.epochs.iter().enumerate() {
        if sorted.iter().any(|l| l.epochs[i].epoch != rec.epoch) {
            return Err(Error::InvalidArgument(format!(
                "epoch records disagree at position {i}"
            )));
        }
        let grads: Option<Vec<_>> = sorted.iter().map(|l| l.epochs[i].grad.as_ref()).collect();
        let (grad_mean_norm, grad_std_norm) = match grads {
            Some(g) => (
                Some(Stat::of(
                    &g.iter().map(|s| s.mean_norm).collect::<Vec<_>>(),
                )?),
                Some(Stat::of(&g.iter().map(|s| s.std_norm).collect::<Vec<_>>())?),
            ),
            None => (None, None),
        };
        epochs.push(AveragedEpoch {
            epoch: rec.epoch,
            train_loss: stat_over(&sorted, |l| l.epochs[i].train_loss)?,
            validation_loss: stat_over(&sorted, |l| l.epochs[i].validation_loss)?,
            train_accuracy: stat_over(&sorted, |l| l.epochs[i].train_accuracy)?,
            validation_accuracy: stat_over(&sorted, |l| l.epochs[i].validation_accuracy)?,
            grad_mean_norm,
            grad_std_norm,
        });
    }

    let mut snapshots = Vec::with_capacity(base.snapshots.len());
    for (i, s) in base.snapshots.iter().enumerate() {
        let key = (s.epoch, s.tap, s.split);
        if let Some(l) = sorted.iter().find(|l| {
            (
                l.snapshots[i].epoch,
                l.snapshots[i].tap,
                l.snapshots[i].split,
            ) != key
        }) {
            return Err(Error::InvalidArgument(format!(
                "snapshot {i} of seed {} does not match epoch {} tap {} split {}",
                l.seed, s.epoch, s.tap, s.split
            )));
        }
        snapshots.push(AveragedSnapshot {
            epoch: s.epoch,
            tap: s.tap,
            split: s.split,
            i_tx_bits: stat_over(&sorted, |l| l.snapshots[i].i_tx_bits)?,
            i_ty_bits: stat_over(&sorted, |l| l.snapshots[i].i_ty_bits)?,
        });
    }

    Ok(AveragedLog {
        config_hash: base.config_hash.clone(),
        seeds: sorted.iter().map(|l| l.seed).collect(),
        config: base.config.clone(),
        meta: base.meta.clone(),
        epochs,
        snapshots,
    })
}
