//! Seedable, splittable random streams.
//!
//! A stream is a ChaCha20 generator keyed by a 64-bit seed and positioned on a
//! 64-bit stream id. Substreams for parallel work are derived from the parent
//! id and an index, so a Monte Carlo run gives identical draws whether its
//! samples are produced on one thread or many.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
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

    /// Fresh stream for work item `index`, independent of this stream's position.
    pub fn substream(&self, index: u64) -> Self {
        Self::new(self.seed, splitmix64(self.stream_id ^ splitmix64(index)))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian: independent real and imaginary parts of variance 1/2.
    pub fn complex_gaussian(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }

    pub fn complex_gaussian_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex_gaussian()).collect()
    }

    /// Underlying generator, for use with `rand` adaptors.
    pub fn rng_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}
