use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded source of uniform draws on the open interval `(0, 1)`.
///
/// Backed by ChaCha8 seeded through `SeedableRng::seed_from_u64`, which is
/// portable: the same seed yields the same draws on every platform and in
/// every run. A source is single-owner; parallel work needs one per task.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `k` independent draws from `Uniform(0, 1)`, endpoints excluded.
    pub fn uniform(&mut self, k: usize) -> Vec<f64> {
        (0..k).map(|_| self.rng.sample(Open01)).collect()
    }
}
