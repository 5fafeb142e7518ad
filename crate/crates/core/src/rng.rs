//! Seeded random streams.
//!
//! Every loop that shuffles a dataset draws from a ChaCha stream selected by
//! role. Finetune, CF-k, NegGrad's retain side and SCRUB's min-epochs all read
//! the `RETAIN` stream, so runs with the same seed visit retain batches in the
//! same order regardless of method.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const RETAIN: u64 = 0;
pub(crate) const FORGET: u64 = 1;
pub(crate) const INIT: u64 = 2;
pub(crate) const DATA: u64 = 3;
pub(crate) const SPLIT: u64 = 4;
pub(crate) const ATTACK: u64 = 5;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Produces a fresh random permutation of `0..len` per epoch.
#[derive(Debug, Clone)]
pub(crate) struct EpochOrder {
    rng: ChaCha8Rng,
    len: usize,
}

impl EpochOrder {
    pub(crate) fn new(seed: u64, stream_id: u64, len: usize) -> Self {
        Self {
            rng: stream(seed, stream_id),
            len,
        }
    }

    pub(crate) fn next_epoch(&mut self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len).collect();
        order.shuffle(&mut self.rng);
        order
    }
}
