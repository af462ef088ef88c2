use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard normal variates from a fully specified pipeline:
///
/// 1. ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`;
/// 2. each `u64` becomes a uniform on the open interval `(0, 1)` as
///    `((x >> 11) + 0.5) · 2⁻⁵³`;
/// 3. Marsaglia's polar method turns accepted pairs into two normals, the
///    first returned immediately and the second on the next call.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s < 1.0 && s > 0.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Seed of trial `trial` derived from a base seed.
pub fn child_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed ^ trial as u64
}
