use serde::{Deserialize, Serialize};

/// Bits per word for an `n`-vertex network: `⌈log2 n⌉`, at least 1.
pub fn word_bits(n: usize) -> u32 {
    let n = n.max(2) as u64;
    64 - (n - 1).leading_zeros()
}

/// Per-message bandwidth limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Words(u64),
    /// No limit; for debugging only.
    Unbounded,
}

impl Budget {
    pub fn words(self) -> Option<u64> {
        match self {
            Budget::Words(w) => Some(w),
            Budget::Unbounded => None,
        }
    }

    pub fn allows(self, words: u64) -> bool {
        self.words().is_none_or(|b| words <= b)
    }

    /// Bits available per message, or `u64::MAX` when unbounded.
    pub fn bits(self, word_bits: u32) -> u64 {
        self.words().map_or(u64::MAX, |w| w * word_bits as u64)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Words(4)
    }
}

/// A message payload: a list of integer fields plus its declared encoded size.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub fields: Vec<u64>,
    pub bits: u64,
}

impl Message {
    pub fn new(fields: Vec<u64>, bits: u64) -> Self {
        Message { fields, bits }
    }

    /// A message whose fields are each `field_bits` wide.
    pub fn packed(fields: Vec<u64>, field_bits: u32) -> Self {
        let bits = fields.len() as u64 * field_bits as u64;
        Message { fields, bits }
    }

    /// Words on the wire; an empty message still occupies one word.
    pub fn words(&self, word_bits: u32) -> u64 {
        self.bits.div_ceil(word_bits as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_sizes() {
        assert_eq!(word_bits(1), 1);
        assert_eq!(word_bits(2), 1);
        assert_eq!(word_bits(50), 6);
        assert_eq!(word_bits(64), 6);
        assert_eq!(word_bits(65), 7);
        let m = Message::packed(vec![1, 2, 3], 6);
        assert_eq!(m.words(6), 3);
        assert_eq!(Message::new(vec![], 0).words(6), 1);
        assert_eq!(Message::new(vec![0], 13).words(6), 3);
        assert!(Budget::Words(3).allows(3));
        assert!(!Budget::Words(3).allows(4));
        assert!(Budget::Unbounded.allows(u64::MAX));
    }
}
