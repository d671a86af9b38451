//! Reproducible random substreams.
//!
//! Every trajectory draws from its own ChaCha8 stream, selected by
//! `(seed, trajectory index)`. Results therefore do not depend on which
//! worker runs which trajectory, or in what order.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trajectories are grouped into blocks of this size. Each block is summed
/// sequentially and blocks are combined in index order, so the reduction is
/// the same for any thread count.
pub const BLOCK: usize = 32;

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Accumulators that can absorb another accumulator of the same shape.
pub(crate) trait Merge {
    fn merge(&mut self, other: Self);
}

/// Run `block` over consecutive index blocks of size [`BLOCK`] and merge the
/// results in block order. At most `wave` blocks are in flight at once, which
/// bounds memory for large accumulators.
pub(crate) fn reduce_blocks<A, F>(n_items: usize, wave: usize, block: F) -> Option<A>
where
    A: Merge + Send,
    F: Fn(Range<usize>) -> A + Sync,
{
    let n_blocks = n_items.div_ceil(BLOCK);
    let wave = wave.max(1);
    let mut total: Option<A> = None;
    for start in (0..n_blocks).step_by(wave) {
        let end = (start + wave).min(n_blocks);
        let parts: Vec<A> = (start..end)
            .into_par_iter()
            .map(|b| block(b * BLOCK..((b + 1) * BLOCK).min(n_items)))
            .collect();
        for p in parts {
            match total.as_mut() {
                None => total = Some(p),
                Some(t) => t.merge(p),
            }
        }
    }
    total
}
