//! Deterministic, splittable random number generation.
//!
//! Every random decision in the crate flows from one explicit seed through a
//! counter-based generator (SplitMix64 finalizer over `key + counter`).
//! Streams fork with [`Rng::derive`], so parallel workers draw from
//! independent, reproducible streams regardless of scheduling. Output is
//! platform-independent: only wrapping integer arithmetic is involved.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based PRNG stream. Cloning yields an identical stream; use
/// [`Rng::derive`] to fork an independent one.
#[derive(Clone, Debug)]
pub struct Rng {
    key: u64,
    counter: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { key: mix(seed ^ GOLDEN), counter: 0 }
    }

    /// Fork an independent child stream selected by `tag`.
    ///
    /// Children with distinct tags are statistically independent of each
    /// other and of the parent; the parent stream is not advanced.
    pub fn derive(&self, tag: u64) -> Rng {
        Rng {
            key: mix(self.key ^ mix(tag.wrapping_mul(GOLDEN) ^ 0xa076_1d64_78bd_642f)),
            counter: 0,
        }
    }

    /// Fork a child stream selected by a string label.
    pub fn derive_str(&self, label: &str) -> Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        self.derive(h)
    }

    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter += 1;
        mix(self.key.wrapping_add(c.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Modulo bias is negligible for our n.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + (self.next_u64() % ((hi - lo + 1) as u64)) as i64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Random sign, +1.0 or -1.0.
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derive_is_independent_of_parent_position() {
        let mut a = Rng::new(1);
        let before = a.derive(42);
        a.next_u64();
        a.next_u64();
        let after = a.derive(42);
        assert_eq!(before.clone().next_u64(), after.clone().next_u64());
    }

    #[test]
    fn distinct_tags_distinct_streams() {
        let root = Rng::new(3);
        let x = root.derive(1).next_u64();
        let y = root.derive(2).next_u64();
        assert_ne!(x, y);
    }

    #[test]
    fn f64_in_unit_interval() {
        let mut r = Rng::new(11);
        for _ in 0..1000 {
            let v = r.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut r = Rng::new(5);
        let mut v: Vec<u32> = (0..20).collect();
        r.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
