use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Seed shared by all nodes; every label names an independent reproducible
/// stream, identical wherever it is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedRandomness {
    seed: u64,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        SharedRandomness { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// 256-bit key derived from the seed and a label.
    pub fn key(&self, label: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.finalize().into()
    }

    pub fn stream(&self, label: &str) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.key(label))
    }

    /// A child handle whose streams are disjoint from the parent's.
    pub fn fork(&self, label: &str) -> SharedRandomness {
        let k = self.key(label);
        SharedRandomness { seed: u64::from_le_bytes(k[..8].try_into().unwrap()) }
    }
}
