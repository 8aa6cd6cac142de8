//! Hierarchical, counter-based random streams.
//!
//! Every random quantity in a simulation is addressed by a path of integer
//! tags (master seed, replicate, purpose, element) instead of being drawn from
//! a shared sequential generator. Two consequences follow:
//!
//! * results never depend on evaluation order or on the number of worker
//!   threads, and
//! * replicate `r` sees the same edge coins and adoption thresholds no matter
//!   which configuration is being evaluated (common random numbers), so Monte
//!   Carlo estimates of `f` inherit monotonicity and submodularity exactly.
//!
//! Sequential draws (instance generation, posterior sampling for rollouts) go
//! through [`RngStream::rng`], which seeds a ChaCha generator from the key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Well-known purpose tags for substreams.
pub mod tags {
    pub const SEEDING: u64 = 0x5EED;
    pub const DIFFUSION: u64 = 0xD1FF;
    pub const ESTIMATOR: u64 = 0xE571;
    pub const ROLLOUT: u64 = 0x7011;
    pub const TRIALS: u64 = 0x7A1A;
}

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            key: mix(seed.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream addressed by `index`.
    #[inline]
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream {
            key: mix(self.key ^ mix(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1))),
        }
    }

    #[inline]
    fn bits(&self, index: u64) -> u64 {
        mix(self.key ^ mix(index.wrapping_add(GOLDEN_GAMMA)))
    }

    /// Uniform draw on `[0, 1)` for element `index`.
    #[inline]
    pub fn unit(&self, index: u64) -> f64 {
        (self.bits(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]` for element `index`.
    #[inline]
    pub fn unit_open_closed(&self, index: u64) -> f64 {
        ((self.bits(index) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Sequential generator seeded from this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}
