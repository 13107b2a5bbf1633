//! Helpers shared by unit and integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Sym3;

/// Seeded RNG with convenience samplers; deterministic across platforms.
pub struct Rng64(ChaCha8Rng);

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    /// Random symmetric tensor with entries in [-s, s].
    pub fn sym3(&mut self, s: f64) -> Sym3 {
        Sym3 {
            xx: self.range(-s, s),
            yy: self.range(-s, s),
            zz: self.range(-s, s),
            xy: self.range(-s, s),
            xz: self.range(-s, s),
            yz: self.range(-s, s),
        }
    }

    /// Random symmetric positive definite tensor near g*I.
    pub fn spd_near(&mut self, g: f64, amp: f64) -> Sym3 {
        Sym3::spherical(g) + self.sym3(amp)
    }
}
