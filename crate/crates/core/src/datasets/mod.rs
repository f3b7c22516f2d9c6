//! Datasets with fixed train/validation splits.

mod cache;
mod mnist;
mod synthetic;
mod tictactoe;

use serde::{Deserialize, Serialize};

pub use cache::{read_cache, write_cache, CACHE_MAGIC};
pub use mnist::{
    load_mnist, load_mnist_dir, load_mnist_idx, read_idx_images, read_idx_labels, write_idx_images,
    write_idx_labels, IdxImages, MNIST_IMAGES_MAGIC, MNIST_LABELS_MAGIC,
};
pub use synthetic::{gen_synthetic, SYNTHETIC_BITS, SYNTHETIC_SAMPLES};
pub use tictactoe::{
    enumerate_endgames, format_tictactoe_line, gen_tictactoe, load_tictactoe_csv,
    parse_tictactoe_line, Board, Cell, TICTACTOE_TRAIN,
};

use crate::error::{Error, Result};
use crate::infoplane::{Split, SplitView};
use crate::numerics::{Matrix, RngStream};

/// Feature matrix, labels and a fixed split. `train` and `validation` hold row
/// indices; `sample_ids` are unique per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub sample_ids: Vec<usize>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.labels.len() != n || self.sample_ids.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{}: {n} rows but {} labels and {} ids",
                self.name,
                self.labels.len(),
                self.sample_ids.len()
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&y| y >= self.num_classes) {
            return Err(Error::InvalidArgument(format!(
                "{}: label {bad} with {} classes",
                self.name, self.num_classes
            )));
        }
        let mut ids = self.sample_ids.clone();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "{}: duplicate sample ids",
                self.name
            )));
        }
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.validation) {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "{}: split is not a partition of the rows",
                    self.name
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(format!(
                "{}: split does not cover every row",
                self.name
            )));
        }
        Ok(())
    }

    pub fn split_indices(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.validation,
        }
    }

    pub fn view(&self, split: Split) -> Result<SplitView> {
        let idx = self.split_indices(split);
        if idx.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{}: {split} split is empty",
                self.name
            )));
        }
        Ok(SplitView {
            split,
            features: self.features.select_rows(idx)?,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i]).collect(),
        })
    }

    /// Keeps the first `train` training rows and `validation` validation rows.
    pub fn subset(&self, train: usize, validation: usize) -> Result<Dataset> {
        if train > self.train.len() || validation > self.validation.len() {
            return Err(Error::InvalidArgument(format!(
                "{}: subset {train}/{validation} exceeds split {}/{}",
                self.name,
                self.train.len(),
                self.validation.len()
            )));
        }
        let rows: Vec<usize> = self.train[..train]
            .iter()
            .chain(&self.validation[..validation])
            .copied()
            .collect();
        Ok(Dataset {
            name: format!("{}[{train}/{validation}]", self.name),
            features: self.features.select_rows(&rows)?,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: rows.iter().map(|&i| self.sample_ids[i]).collect(),
            train: (0..train).collect(),
            validation: (train..train + validation).collect(),
            num_classes: self.num_classes,
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }
}

/// Seeded split of `0..n` into sorted train and validation index lists.
pub fn seeded_split(n: usize, train: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let perm = RngStream::with_stream(seed, crate::numerics::streams::DATA_SPLIT).permutation(n);
    let mut tr = perm[..train].to_vec();
    let mut va = perm[train..].to_vec();
    tr.sort_unstable();
    va.sort_unstable();
    (tr, va)
}

/// Permutes labels uniformly over all rows (train and validation jointly).
pub fn shuffle_labels(ds: &Dataset, seed: u64) -> Dataset {
    let mut out = ds.clone();
    RngStream::with_stream(seed, crate::numerics::streams::LABEL_SHUFFLE).shuffle(&mut out.labels);
    out.name = format!("{}+shuffled", ds.name);
    out
}
