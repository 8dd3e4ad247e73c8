//! Seed management: one master seed split into named, independent sub-streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG type used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Derives reproducible sub-streams (`"walks"`, `"negatives"`, `"init"`, ...) from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        SeedStream { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Seed for the named stream of a given trial.
    pub fn seed(&self, name: &str, trial: u64) -> u64 {
        let mut h = splitmix64(self.master ^ 0x6a09_e667_f3bc_c908);
        h = splitmix64(h ^ fnv1a(name.as_bytes()));
        splitmix64(h ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn rng(&self, name: &str, trial: u64) -> Rng {
        Rng::seed_from_u64(self.seed(name, trial))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
