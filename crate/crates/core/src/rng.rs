//! Seeded Gaussian variates.
//!
//! The generator is ChaCha8 keyed by a 64-bit seed, with the ChaCha stream
//! id selecting an independent substream (one per Monte Carlo trial).
//! Normal variates use the Marsaglia polar method on 53-bit uniforms; the
//! second variate of each accepted pair is cached. Both choices are frozen:
//! changing either changes every seeded output of the crate.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{ln, sqrt};

#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        GaussianStream { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = sqrt(-2.0 * ln(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.standard_normal();
        }
    }
}
