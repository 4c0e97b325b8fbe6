use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same identifiers produce the same sequence no matter which
/// thread draws from them, so each Monte Carlo trial owns the stream named by
/// its trial index.
#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for the `attempt`-th redraw of the same trial.
    ///
    /// Attempt 0 is the original stream. Other attempts remix the seed, so
    /// they never collide with the primary streams of other trials.
    pub fn substream(&self, attempt: u64) -> Self {
        if attempt == 0 {
            return Self::new(self.seed, self.stream_id);
        }
        Self::new(splitmix64(self.seed ^ splitmix64(attempt)), self.stream_id)
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("stream_id", &self.stream_id)
            .finish_non_exhaustive()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
