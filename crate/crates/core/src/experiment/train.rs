use std::collections::HashSet;

use super::config::ExperimentConfig;
use super::runlog::{EpochRecord, RunLog, RunMeta, SCHEMA_VERSION};
use super::stats::GradientAccumulator;
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::infoplane::{snapshots_from_tape, BinningSpec, MISnapshot, Split, SplitView};
use crate::nn::{loss_and_accuracy, Mode, Network};
use crate::numerics::{streams, RngStream};
use crate::optim::NetworkOptimizer;

/// Minibatches of one epoch: consecutive chunks of `order`, the last one kept
/// even when short. A trailing single-row batch is merged into its
/// predecessor when batchnorm needs at least two rows.
pub fn minibatches(order: &[usize], batch_size: usize, batchnorm: bool) -> Vec<&[usize]> {
    let mut batches: Vec<&[usize]> = order.chunks(batch_size).collect();
    if batchnorm && batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        batches.pop();
        let start = (batches.len() - 1) * batch_size;
        let last = batches.len() - 1;
        batches[last] = &order[start..];
    }
    batches
}

/// Weight updates performed per epoch for `n` training rows.
pub fn updates_per_epoch(n: usize, batch_size: usize, batchnorm: bool) -> usize {
    let full = n.div_ceil(batch_size);
    if batchnorm && full > 1 && n % batch_size == 1 {
        full - 1
    } else {
        full
    }
}

fn distinct_rows(ds: &Dataset) -> usize {
    ds.features
        .iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

struct Evaluation {
    loss: f64,
    accuracy: f64,
    snapshots: Vec<MISnapshot>,
}

fn evaluate(
    net: &Network,
    view: &SplitView,
    spec: &BinningSpec,
    epoch: usize,
    with_mi: bool,
) -> Result<Evaluation> {
    if with_mi {
        let tape = net.infer(&view.features)?;
        let (loss, accuracy) = loss_and_accuracy(tape.logits(), &view.labels)?;
        let snapshots = snapshots_from_tape(net, &tape, view, spec, epoch)?;
        Ok(Evaluation {
            loss,
            accuracy,
            snapshots,
        })
    } else {
        let (loss, accuracy) = loss_and_accuracy(&net.logits(&view.features)?, &view.labels)?;
        Ok(Evaluation {
            loss,
            accuracy,
            snapshots: Vec::new(),
        })
    }
}

/// Loads the configured dataset and trains one seed.
pub fn run_training(config: &ExperimentConfig, seed: u64) -> Result<RunLog> {
    let ds = config.load_dataset(None)?;
    run_training_on(config, &ds, seed, None)
}

/// Trains one seed on an already loaded dataset (label shuffling, if
/// configured, must already be applied). `progress` sees each epoch record.
pub fn run_training_on(
    config: &ExperimentConfig,
    ds: &Dataset,
    seed: u64,
    mut progress: Option<&mut dyn FnMut(&EpochRecord)>,
) -> Result<RunLog> {
    config.validate()?;
    ds.validate()?;
    let schedule = config.mi_schedule.resolve(config.epochs)?;
    let spec = config.binning();
    let train = ds.view(Split::Train)?;
    let test = ds.view(Split::Test)?;
    let batchnorm = config.network.batchnorm;
    if batchnorm && train.labels.len() < 2 {
        return Err(Error::Config(
            "batchnorm needs at least two training rows".into(),
        ));
    }

    let arch = config.architecture(ds.dim(), ds.num_classes);
    let mut net = Network::new(arch, &mut RngStream::with_stream(seed, streams::INIT))?;
    let mut opt = NetworkOptimizer::new(&net, config.learning_rate)?;

    let meta = RunMeta {
        dataset: ds.name.clone(),
        input_dim: ds.dim(),
        classes: ds.num_classes,
        train_size: train.labels.len(),
        validation_size: test.labels.len(),
        updates_per_epoch: updates_per_epoch(train.labels.len(), config.batch_size, batchnorm),
        mi_ceiling_x_bits: (distinct_rows(ds) as f64).log2(),
        mi_ceiling_y_bits: (ds.num_classes as f64).log2(),
        taps: net.taps(),
        schedule: schedule.clone(),
    };

    let mut epochs = Vec::with_capacity(config.epochs + 1);
    let mut snapshots = Vec::new();
    let mut scheduled = schedule.iter().copied().peekable();

    let mut record = |epoch: usize,
                      updates: usize,
                      grad,
                      net: &Network,
                      epochs: &mut Vec<EpochRecord>,
                      snapshots: &mut Vec<MISnapshot>|
     -> Result<()> {
        let with_mi = scheduled.next_if_eq(&epoch).is_some();
        let tr = evaluate(net, &train, &spec, epoch, with_mi)?;
        let te = evaluate(net, &test, &spec, epoch, with_mi)?;
        let rec = EpochRecord {
            epoch,
            updates,
            train_loss: tr.loss,
            validation_loss: te.loss,
            train_accuracy: tr.accuracy,
            validation_accuracy: te.accuracy,
            grad,
        };
        if !(rec.train_loss.is_finite() && rec.validation_loss.is_finite()) {
            return Err(Error::State(format!("non-finite loss at epoch {epoch}")));
        }
        if let Some(cb) = progress.as_mut() {
            cb(&rec);
        }
        epochs.push(rec);
        snapshots.extend(tr.snapshots);
        snapshots.extend(te.snapshots);
        Ok(())
    };

    record(0, 0, None, &net, &mut epochs, &mut snapshots)?;

    let positions: Vec<usize> = (0..train.labels.len()).collect();
    for epoch in 1..=config.epochs {
        let mut order = positions.clone();
        RngStream::substream(seed, streams::EPOCH_SHUFFLE, epoch as u64).shuffle(&mut order);
        let mut acc = GradientAccumulator::new();
        let mut updates = 0;
        for batch in minibatches(&order, config.batch_size, batchnorm) {
            let x = train.features.select_rows(batch)?;
            let y: Vec<usize> = batch.iter().map(|&i| train.labels[i]).collect();
            net.forward(&x, Mode::Train, false)?;
            let grads = net.backward(&y)?;
            acc.push_matrices(&grads)?;
            opt.step(&mut net, &grads)?;
            updates += 1;
        }
        net.clear_tape();
        let grad = Some(acc.finish()?);
        record(epoch, updates, grad, &net, &mut epochs, &mut snapshots)?;
    }

    Ok(RunLog {
        schema_version: SCHEMA_VERSION,
        config_hash: config.config_hash(),
        seed,
        config: config.clone(),
        meta,
        epochs,
        snapshots,
    })
}
