use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// Result of a seeded train/test split.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    /// Original instance indices, in the order they appear in `train`.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl Split {
    pub fn train_class_counts(&self) -> Vec<usize> {
        self.train.class_counts()
    }

    pub fn test_class_counts(&self) -> Vec<usize> {
        self.test.class_counts()
    }
}

/// Shuffles instance indices with `seed` and puts the first
/// `round(train_fraction * N)` of them in the training side.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig {
            field: "train_fraction",
            reason: format!("must lie strictly between 0 and 1, got {train_fraction}"),
        });
    }
    let n = dataset.len();
    let n_train = libm::round(train_fraction * n as f64) as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Precondition(format!(
            "train fraction {train_fraction} on {n} instances leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test_indices = order.split_off(n_train);
    let train_indices = order;
    Ok(Split {
        train: dataset.select(&train_indices)?,
        test: dataset.select(&test_indices)?,
        train_indices,
        test_indices,
    })
}
