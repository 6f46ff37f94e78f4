//! Fixed 64-bit keyed hashing used everywhere the harness needs seeded,
//! order-independent randomness (stub memorization, split and contamination
//! sampling).
//!
//! The function is pinned so that results are reproducible across platforms,
//! toolchains and even languages: `hash64` is FNV-1a over the UTF-8 arguments
//! joined by a 0x1F unit separator, finalized with the splitmix64 mixer.
//! Integer arguments are rendered as decimal strings before hashing.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(parts: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            h ^= 0x1f;
            h = h.wrapping_mul(FNV_PRIME);
        }
        for &b in part.as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a list of string arguments to a uniformly mixed 64-bit value.
pub fn hash64(parts: &[&str]) -> u64 {
    mix64(fnv1a64(parts))
}

/// Decide `hash64(..) / 2^64 < fraction` without floating-point edge cases
/// at the closed ends: `fraction >= 1.0` always passes, `<= 0.0` never does.
pub fn below_fraction(h: u64, fraction: f64) -> bool {
    if fraction >= 1.0 {
        return true;
    }
    if fraction <= 0.0 {
        return false;
    }
    (h as f64) / 18_446_744_073_709_551_616.0 < fraction
}

/// splitmix64 sequence generator, used where deterministic bulk randomness
/// is needed (e.g. generating test rasters).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }
}
