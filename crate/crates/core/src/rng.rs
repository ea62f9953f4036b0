//! Counter-based random streams.
//!
//! Every draw in a realization is addressed by `(seed, channel, a, b)`.
//! The key is a hash of that tuple and a stream is SplitMix64 started at the
//! key, i.e. draw `j` of a stream is `mix(key + (j+1) * GOLDEN)`. There is no
//! shared generator state, so draws do not depend on the order in which
//! they are requested.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Disjoint sub-streams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Sign = 1,
    EdgeExcitatory = 2,
    EdgeInhibitory = 3,
    Delay = 4,
    NaiveExcitatory = 5,
    NaiveInhibitory = 6,
    Walk = 7,
}

#[inline]
pub fn derive_key(seed: u64, channel: Channel, a: u64, b: u64) -> u64 {
    let mut h = mix64(seed ^ (channel as u64).wrapping_mul(GOLDEN));
    h = mix64(h.wrapping_add(a.wrapping_mul(0xD1B5_4A32_D192_ED03)));
    mix64(h.wrapping_add(b.wrapping_mul(0xAEF1_7502_108E_F2D9)))
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `(0, 1]`.
#[inline]
pub fn open_unit_f64(x: u64) -> f64 {
    1.0 - unit_f64(x)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    pub fn keyed(seed: u64, channel: Channel, a: u64, b: u64) -> Self {
        CounterRng::new(derive_key(seed, channel, a, b))
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
