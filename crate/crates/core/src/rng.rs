//! Counter-based random streams.
//!
//! Every random draw in the simulator is addressed by a key
//! `(seed, frame, y, x, kind)`. The key is hashed into the starting state of
//! a small SplitMix64 stream, so the value of any draw depends only on its
//! key and never on the order in which pixels are visited. This is what
//! makes serial and parallel simulation bit-identical.

use rand_core::{impls, RngCore};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a draw is used for. Distinct kinds never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum DrawKind {
    Photon = 1,
    ReadNoise = 2,
}

/// Hashes a sequence of words into a single 64-bit key.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |acc, &w| {
        mix64(acc ^ mix64(w.wrapping_add(GOLDEN)))
    })
}

/// Derives an independent seed for a named sub-stream.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let tag_hash = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    });
    hash_words(&[seed, tag_hash, index])
}

/// A SplitMix64 stream positioned by a key.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn from_key(key: u64) -> Self {
        Self { state: key }
    }

    pub fn for_pixel(seed: u64, frame: u64, y: u64, x: u64, kind: DrawKind) -> Self {
        Self::from_key(hash_words(&[seed, frame, y, x, kind as u64]))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }
}
