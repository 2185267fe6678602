//! Reproducible random substreams.
//!
//! Every Monte Carlo draw is addressed by `(seed, grid point, realization)`, so
//! results do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(seed: u64, grid_index: u32, realization: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | realization as u64);
    rng
}
