//! XOR sketches of named relations and the `[k, 8k]` cardinality estimator.
//!
//! A relation is named by an integer `x`. Its sketch is a matrix of
//! `levels x reps` cells; cell `(i, r)` holds the relation's random id when
//! the pairwise sampler of `(i, r)` activates `x` at density `2^-i`, and zeros
//! otherwise. Sketches of sets are cellwise XORs, so relations counted twice
//! cancel.

mod edge;
mod names;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use edge::{edge_sketches, EdgeSketches};
pub use names::{assign_cut_names, reference_names, CutName, NameAssignment, NameSpace};

use crate::congest::{word_bits, SharedRandomness};
use crate::error::{Error, Result};

/// Shared random bits may not exceed this many times `log^3 n` (with
/// `log n` clamped to at least 2).
pub const SHARED_BITS_FACTOR: u64 = 1024;

/// Sampler moduli are at least this large.
pub const MIN_MODULUS: u64 = 1 << 20;

/// Sketch dimensions. A cell is `words` fields of `word_bits` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SketchParams {
    pub levels: usize,
    pub reps: usize,
    pub words: usize,
    pub word_bits: u32,
}

impl SketchParams {
    /// Levels up to `2^(2 log n)`, `max(32, 16 log n)` repetitions, and ids of
    /// at least 40 bits.
    pub fn for_n(n: usize) -> Self {
        let wb = word_bits(n).max(1);
        SketchParams {
            levels: 2 * wb as usize + 1,
            reps: (16 * wb as usize).max(32),
            words: (40u32.div_ceil(wb) as usize).max(4),
            word_bits: wb,
        }
    }

    pub fn rid_bits(&self) -> u32 {
        self.words as u32 * self.word_bits
    }

    /// Number of fields in a sketch.
    pub fn len(&self) -> usize {
        self.levels * self.reps * self.words
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Wire size: a 3-word header followed by the cells.
    pub fn wire_bits(&self) -> u64 {
        3 * self.word_bits as u64 + self.len() as u64 * self.word_bits as u64
    }
}

/// Smallest prime `>= x`.
pub fn next_prime(x: u64) -> u64 {
    let mut p = x.max(2);
    while !primal_check::miller_rabin(p) {
        p += 1;
    }
    p
}

/// `h(x) = a x + b mod K'` for one (level, repetition) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseSampler {
    pub a: u64,
    pub b: u64,
    pub modulus: u64,
}

impl PairwiseSampler {
    pub fn hash(&self, x: u64) -> u64 {
        ((self.a as u128 * x as u128 + self.b as u128) % self.modulus as u128) as u64
    }

    /// Active at level `i` iff `h(x) <= K' 2^-i`.
    pub fn active(&self, level: usize, x: u64) -> bool {
        level < 64 && self.hash(x) <= self.modulus >> level
    }
}

/// Everything the nodes share to build sketches: the id key and one sampler
/// per cell.
#[derive(Clone, Debug)]
pub struct Sketcher {
    params: SketchParams,
    key: [u8; 32],
    samplers: Vec<PairwiseSampler>,
    modulus: u64,
}

impl Sketcher {
    /// `space` is the number of possible relation names.
    pub fn new(params: SketchParams, space: u64, shared: &SharedRandomness) -> Result<Self> {
        if params.word_bits > 64 || params.rid_bits() < 1 {
            return Err(Error::InvalidParams(format!("bad sketch word size {}", params.word_bits)));
        }
        if space >= 1 << 62 {
            return Err(Error::InvalidParams(format!("name space {space} too large for the samplers")));
        }
        let modulus = next_prime(space.max(MIN_MODULUS));
        let mut rng = shared.stream("sketch samplers");
        let samplers = (0..params.levels * params.reps)
            .map(|_| PairwiseSampler { a: rng.random_range(0..modulus), b: rng.random_range(0..modulus), modulus })
            .collect();
        Ok(Sketcher { params, key: shared.key("sketch ids"), samplers, modulus })
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn sampler(&self, level: usize, rep: usize) -> &PairwiseSampler {
        &self.samplers[level * self.params.reps + rep]
    }

    /// Shared random bits consumed: the id key plus two coefficients per cell.
    pub fn shared_bits(&self) -> u64 {
        let coeff = (u64::BITS - self.modulus.leading_zeros()) as u64;
        256 + 2 * coeff * self.samplers.len() as u64
    }

    /// Budget `SHARED_BITS_FACTOR * log^3 n`.
    pub fn check_shared_bits(&self, n: usize) -> Result<()> {
        let l = word_bits(n).max(2) as u64;
        let limit = SHARED_BITS_FACTOR * l * l * l;
        if self.shared_bits() > limit {
            return Err(Error::InvalidParams(format!("shared randomness {} bits > {limit}", self.shared_bits())));
        }
        Ok(())
    }

    /// Random id of relation `x`: `words` fields of `word_bits` bits, a
    /// pseudorandom function of the shared key and `x`.
    pub fn rid(&self, x: u64) -> Vec<u64> {
        let wb = self.params.word_bits;
        let mask = if wb == 64 { u64::MAX } else { (1u64 << wb) - 1 };
        let mut out = Vec::with_capacity(self.params.words);
        let mut block = 0u64;
        while out.len() < self.params.words {
            let mut h = Sha256::new();
            h.update(self.key);
            h.update(x.to_le_bytes());
            h.update(block.to_le_bytes());
            let d = h.finalize();
            for c in d.chunks(8) {
                if out.len() < self.params.words {
                    out.push(u64::from_le_bytes(c.try_into().unwrap()) & mask);
                }
            }
            block += 1;
        }
        out
    }

    /// Sketch of the single relation `x`.
    pub fn relation(&self, x: u64) -> Sketch {
        let rid = self.rid(x);
        let mut s = Sketch::zero(self.params);
        for level in 0..self.params.levels {
            for rep in 0..self.params.reps {
                if self.sampler(level, rep).active(level, x) {
                    s.cell_mut(level, rep).copy_from_slice(&rid);
                }
            }
        }
        s
    }

    /// Sketch of a set of relations.
    pub fn set<I: IntoIterator<Item = u64>>(&self, xs: I) -> Sketch {
        let mut s = Sketch::zero(self.params);
        for x in xs {
            s.xor_assign(&self.relation(x));
        }
        s
    }
}

/// Row-major `levels x reps` matrix of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sketch {
    params: SketchParams,
    cells: Vec<u64>,
}

impl Sketch {
    pub fn zero(params: SketchParams) -> Self {
        Sketch { params, cells: vec![0; params.len()] }
    }

    pub fn from_fields(params: SketchParams, cells: Vec<u64>) -> Result<Self> {
        if cells.len() != params.len() {
            return Err(Error::InvalidParams(format!("sketch has {} fields, expected {}", cells.len(), params.len())));
        }
        Ok(Sketch { params, cells })
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn fields(&self) -> &[u64] {
        &self.cells
    }

    pub fn cell(&self, level: usize, rep: usize) -> &[u64] {
        let w = self.params.words;
        let at = (level * self.params.reps + rep) * w;
        &self.cells[at..at + w]
    }

    fn cell_mut(&mut self, level: usize, rep: usize) -> &mut [u64] {
        let w = self.params.words;
        let at = (level * self.params.reps + rep) * w;
        &mut self.cells[at..at + w]
    }

    pub fn xor_assign(&mut self, other: &Sketch) {
        assert_eq!(self.params, other.params, "sketch dimensions differ");
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&c| c == 0)
    }

    /// Header `[levels, reps, words]`, then the cells row by row.
    pub fn to_words(&self) -> Vec<u64> {
        let mut w = vec![self.params.levels as u64, self.params.reps as u64, self.params.words as u64];
        w.extend_from_slice(&self.cells);
        w
    }

    pub fn from_words(w: &[u64], word_bits: u32) -> Result<Self> {
        if w.len() < 3 {
            return Err(Error::InvalidParams("sketch header truncated".into()));
        }
        let params = SketchParams { levels: w[0] as usize, reps: w[1] as usize, words: w[2] as usize, word_bits };
        Sketch::from_fields(params, w[3..].to_vec())
    }

    /// Nonzero cells per level.
    pub fn nonzero_per_level(&self) -> Vec<usize> {
        (0..self.params.levels)
            .map(|i| (0..self.params.reps).filter(|&r| self.cell(i, r).iter().any(|&c| c != 0)).count())
            .collect()
    }
}

/// `2^i*` for the largest level `i*` at which at least a quarter of the
/// repetitions are nonzero; 0 if no level qualifies.
pub fn estimate_count(s: &Sketch) -> u64 {
    let reps = s.params.reps;
    s.nonzero_per_level()
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &nz)| nz > 0 && 4 * nz >= reps)
        .map_or(0, |(i, _)| 1u64 << i)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn sketcher(seed: u64) -> Sketcher {
        let params = SketchParams { levels: 12, reps: 32, words: 4, word_bits: 10 };
        Sketcher::new(params, 1 << 24, &SharedRandomness::new(seed)).unwrap()
    }

    #[test]
    fn params_for_small_and_large_n() {
        let p = SketchParams::for_n(30);
        assert_eq!((p.levels, p.reps, p.words, p.word_bits), (11, 80, 8, 5));
        assert!(p.rid_bits() >= 40);
        let p = SketchParams::for_n(4096);
        assert_eq!((p.levels, p.reps, p.words, p.word_bits), (25, 192, 4, 12));
    }

    #[test]
    fn next_prime_values() {
        assert_eq!(next_prime(1 << 20), 1_048_583);
        assert_eq!(next_prime(2), 2);
        assert_eq!(next_prime(90), 97);
    }

    #[test]
    fn level_zero_always_active() {
        let s = sketcher(1);
        let one = s.relation(12345);
        let rid = s.rid(12345);
        for r in 0..32 {
            assert_eq!(one.cell(0, r), rid.as_slice());
        }
    }

    #[test]
    fn activity_matches_direct_hash() {
        let s = sketcher(2);
        let x = 777;
        let sk = s.relation(x);
        let k = s.modulus() as u128;
        for level in 0..12 {
            for rep in 0..32 {
                let sp = s.sampler(level, rep);
                let h = (sp.a as u128 * x as u128 + sp.b as u128) % k;
                let active = h * (1u128 << level) <= k;
                let cell = sk.cell(level, rep);
                if active {
                    assert_eq!(cell, s.rid(x).as_slice());
                } else {
                    assert!(cell.iter().all(|&c| c == 0));
                }
            }
        }
    }

    #[test]
    fn rid_is_deterministic_and_in_range() {
        let a = sketcher(3);
        let b = sketcher(3);
        assert_eq!(a.rid(99), b.rid(99));
        assert!(a.rid(99).iter().all(|&w| w < 1 << 10));
        assert_ne!(a.rid(99), sketcher(4).rid(99));
    }

    #[test]
    fn empty_set_estimates_zero() {
        let s = sketcher(5);
        assert_eq!(estimate_count(&s.set([])), 0);
        let mut x = s.relation(1);
        x.xor_assign(&s.relation(1));
        assert!(x.is_zero());
        assert_eq!(estimate_count(&x), 0);
    }

    #[test]
    fn single_relation_in_window() {
        for seed in 0..50 {
            let e = estimate_count(&sketcher(seed).relation(seed * 31 + 7));
            assert!((1..=8).contains(&e), "seed {seed}: {e}");
        }
    }

    #[test]
    fn wire_roundtrip() {
        let s = sketcher(6).set([1, 2, 3]);
        let w = s.to_words();
        assert_eq!(&w[..3], &[12, 32, 4]);
        assert_eq!(Sketch::from_words(&w, 10).unwrap(), s);
        assert_eq!(s.params().wire_bits(), 3 * 10 + 12 * 32 * 4 * 10);
    }

    #[test]
    fn shared_bits_within_budget() {
        for n in [2, 4, 16, 30, 80, 256, 4096] {
            let p = SketchParams::for_n(n);
            let s = Sketcher::new(p, (n * n) as u64 * 64, &SharedRandomness::new(0)).unwrap();
            s.check_shared_bits(n).unwrap();
        }
    }

    #[test]
    fn estimates_scale_with_set_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ok = 0;
        let mut total = 0;
        for s in [3u64, 17, 60, 150] {
            for seed in 0..20 {
                let names: BTreeSet<u64> = std::iter::repeat_with(|| rng.random_range(0..1u64 << 24)).take(s as usize).collect();
                let e = estimate_count(&sketcher(100 + seed).set(names.iter().copied()));
                total += 1;
                ok += usize::from(e >= names.len() as u64 && e <= 8 * names.len() as u64);
            }
        }
        assert!(ok * 100 >= total * 95, "{ok}/{total}");
    }

    proptest! {
        #[test]
        fn xor_is_symmetric_difference(
            a in proptest::collection::btree_set(0u64..5000, 0..20),
            b in proptest::collection::btree_set(0u64..5000, 0..20),
            seed in 0u64..1000,
        ) {
            let s = sketcher(seed);
            let mut x = s.set(a.iter().copied());
            x.xor_assign(&s.set(b.iter().copied()));
            let sym: Vec<u64> = a.symmetric_difference(&b).copied().collect();
            prop_assert_eq!(x, s.set(sym));
        }
    }
}
