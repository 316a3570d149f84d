//! Seeded, reproducible random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream`-th child of `parent`.
///
/// Children depend only on `(parent, stream)`, never on the order in which
/// they are requested, so parallel work can be scheduled freely.
pub fn child_seed(parent: u64, stream: u64) -> u64 {
    parent ^ splitmix64(stream)
}

/// A random stream fully determined by its 64-bit seed.
///
/// Same seed and same call sequence give identical outputs on every platform.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream derived from this stream's seed (not its state).
    pub fn child(&self, stream: u64) -> SeededRng {
        SeededRng::new(child_seed(self.seed, stream))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0,
        // i.e. the finalizer applied to k * golden_gamma.
        let gamma = 0x9E37_79B9_7F4A_7C15u64;
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(gamma), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        let xs: Vec<u64> = (0..16).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.random()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn children_are_distinct_and_stable() {
        let parent = SeededRng::new(7);
        assert_eq!(parent.child(3).seed(), child_seed(7, 3));
        assert_ne!(parent.child(3).seed(), parent.child(4).seed());
        // Drawing from the parent does not change its children.
        let mut p2 = parent.clone();
        let _: u64 = p2.random();
        assert_eq!(p2.child(3).seed(), parent.child(3).seed());
    }
}
