use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CombinedDataset, ImagePair};
use crate::error::{Error, Result};

/// Seed-deterministic permutation of `0..len` for one epoch.
pub fn epoch_permutation(len: usize, seed: u64, epoch: usize, shuffle: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    if shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(seed, epoch));
        order.shuffle(&mut rng);
    }
    order
}

// splitmix64 finalizer over (seed, epoch)
fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    let mut z = seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A mini-batch borrowed from a combined dataset.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    pub pairs: Vec<&'a ImagePair>,
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_ids(&self) -> Vec<String> {
        self.pairs.iter().map(|p| p.pair_id.clone()).collect()
    }
}

/// Ordered batch stream over a dataset. Each epoch reshuffles with a seed
/// derived from `(seed, epoch)`; the last partial batch is kept.
#[derive(Debug, Clone)]
pub struct BatchStream<'a> {
    ds: &'a CombinedDataset,
    batch_size: usize,
    seed: u64,
    shuffle: bool,
}

pub fn batch_iterator(
    ds: &CombinedDataset,
    batch_size: usize,
    seed: u64,
    shuffle: bool,
) -> Result<BatchStream<'_>> {
    if batch_size == 0 {
        return Err(Error::Validation("batch_size must be at least 1".into()));
    }
    if ds.is_empty() {
        return Err(Error::Manifest("cannot batch an empty dataset".into()));
    }
    Ok(BatchStream {
        ds,
        batch_size,
        seed,
        shuffle,
    })
}

impl<'a> BatchStream<'a> {
    pub fn batches_per_epoch(&self) -> usize {
        self.ds.len().div_ceil(self.batch_size)
    }

    pub fn epoch(&self, epoch: usize) -> impl Iterator<Item = Batch<'a>> + 'a {
        let ds = self.ds;
        let order = epoch_permutation(ds.len(), self.seed, epoch, self.shuffle);
        let chunks: Vec<Vec<usize>> = order.chunks(self.batch_size).map(<[usize]>::to_vec).collect();
        chunks.into_iter().map(move |idx| Batch {
            pairs: idx.into_iter().map(|i| &ds.pairs[i]).collect(),
        })
    }
}
