//! Configured, instrumented training runs and their aggregation.

pub mod aggregate;
pub mod config;
pub mod presets;
pub mod runlog;
pub mod stats;
pub mod train;

pub use aggregate::{aggregate_runs, AveragedEpoch, AveragedLog, AveragedSnapshot, Stat};
pub use config::{DatasetSpec, ExperimentConfig, MiSchedule, NetworkSpec};
pub use presets::{calibration, Figure, Scale};
pub use runlog::{load_run_dir, run_file_name, EpochRecord, RunLog, RunMeta, SCHEMA_VERSION};
pub use stats::{gradient_stats, GradientAccumulator, GradientStats, NormPair};
pub use train::{minibatches, run_training, run_training_on, updates_per_epoch};
