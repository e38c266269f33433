//! SplitMix64, the deterministic generator behind the mock workload and the
//! simulator. Bit-exact across platforms.

use serde::{Deserialize, Serialize};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rng64 {
    state: u64,
}

/// Pure step: returns the advanced generator and the output value.
pub fn rng_next(r: Rng64) -> (Rng64, u64) {
    let state = r.state.wrapping_add(GAMMA);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (Rng64 { state }, z ^ (z >> 31))
}

/// First output of a generator seeded with `seed`.
pub fn first_output(seed: u64) -> u64 {
    rng_next(Rng64::new(seed)).1
}

impl Rng64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        let (next, v) = rng_next(*self);
        *self = next;
        v
    }

    /// Independent stream for `label`, derived from `master`.
    pub fn stream(master: u64, label: u64) -> Self {
        Self::new(first_output(master ^ label.wrapping_mul(GAMMA) ^ 0x5EED))
    }

    /// Uniform value in `0..n` (Lemire's multiply-and-reject). `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform value in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "inverted range");
        match (hi - lo).checked_add(1) {
            Some(span) => lo + self.below(span),
            None => self.next_u64(),
        }
    }

    /// Uniform value in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(8) {
            let v = self.next_u64().to_be_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
