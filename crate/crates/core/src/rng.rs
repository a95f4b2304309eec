//! Seeded, splittable random streams.
//!
//! Every random draw in the crate goes through [`RngStream`], a ChaCha8
//! generator keyed by a 64-bit seed and a 64-bit stream id. Distinct roles
//! (instance weights, trial seeds, pool chunks, tree nodes) use distinct
//! stream ids so that a sub-computation can be replayed in isolation.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids reserved for the different consumers of randomness.
pub mod streams {
    pub const WEIGHTS: u64 = 0x5745_4947_4854_5300;
    pub const POOL: u64 = 0x504f_4f4c_0000_0000;
    pub const BIVARIATE: u64 = 0x4249_5641_5200_0000;
    pub const PWIT: u64 = 0x5057_4954_0000_0000;
    pub const TREES: u64 = 0x5452_4545_5300_0000;
}

/// SplitMix64 finalizer. Used to derive child seeds and stream ids.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` in a sweep started from `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent stream derived from this one's key and `id`.
    pub fn substream(&self, id: u64) -> Self {
        Self::new(self.seed, mix64(self.stream ^ mix64(id)))
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Exponential with mean 1, by inversion.
    pub fn exp1(&mut self) -> f64 {
        -(-self.rng.gen::<f64>()).ln_1p()
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    /// First `count` points of a rate-1 Poisson process on the half line.
    pub fn poisson_points(&mut self, count: usize, out: &mut Vec<f64>) {
        out.clear();
        let mut t = 0.0;
        for _ in 0..count {
            t += self.exp1();
            out.push(t);
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_draws() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.exp1().to_bits(), b.exp1().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 4);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn poisson_points_increase() {
        let mut r = RngStream::new(1, 1);
        let mut pts = Vec::new();
        r.poisson_points(50, &mut pts);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts[0] > 0.0);
    }

    #[test]
    fn nearby_sweeps_share_no_trials() {
        use std::collections::HashSet;
        let a: HashSet<u64> = (0..10_000).map(|t| trial_seed(1, t)).collect();
        let b: HashSet<u64> = (0..10_000).map(|t| trial_seed(2, t)).collect();
        assert_eq!(a.len(), 10_000);
        assert!(a.is_disjoint(&b));
    }
}
