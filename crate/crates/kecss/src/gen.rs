//! Instance generators: random k-edge-connected multigraphs, a path of
//! cliques for scaling runs, and the lower-bound families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedMultigraph};

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    perm
}

/// `ceil(k / 2)` random Hamiltonian cycles plus `extra` random edges, with
/// weights uniform in `1..=w_max`. Every cut is crossed at least
/// `2 * ceil(k / 2)` times, so the result is k-edge-connected.
pub fn random_kconnected(n: usize, k: usize, extra: usize, w_max: u64, seed: u64) -> Result<WeightedMultigraph> {
    if n < 2 || k == 0 || w_max == 0 {
        return Err(Error::InvalidParams(format!("random family needs n >= 2, k >= 1, w_max >= 1 (n={n}, k={k})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Vec<(VertexId, VertexId, u64)> = Vec::new();
    for _ in 0..k.div_ceil(2) {
        let perm = shuffled(n, &mut rng);
        if n == 2 {
            t.push((perm[0], perm[1], 0));
            t.push((perm[0], perm[1], 0));
            continue;
        }
        for i in 0..n {
            t.push((perm[i], perm[(i + 1) % n], 0));
        }
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = (u + rng.random_range(1..n)) % n;
        t.push((u, v, 0));
    }
    for e in &mut t {
        e.2 = rng.random_range(1..=w_max);
    }
    WeightedMultigraph::from_triples(n, &t)
}

/// About `sqrt(n)` cliques in a row, consecutive cliques joined by `k`
/// vertex-disjoint edges. Weights are uniform in `1..=w_max`.
pub fn path_of_cliques(n: usize, k: usize, w_max: u64, seed: u64) -> Result<WeightedMultigraph> {
    let count = (n as f64).sqrt().ceil() as usize;
    if count == 0 || n / count < k + 1 || w_max == 0 {
        return Err(Error::InvalidParams(format!("path of cliques needs cliques of at least k+1 vertices (n={n}, k={k})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = Vec::with_capacity(count + 1);
    for c in 0..=count {
        starts.push(c * n / count);
    }
    let mut t = Vec::new();
    for c in 0..count {
        for u in starts[c]..starts[c + 1] {
            for v in u + 1..starts[c + 1] {
                t.push((u, v, rng.random_range(1..=w_max)));
            }
        }
        if c + 1 < count {
            for i in 0..k {
                t.push((starts[c] + i, starts[c + 1] + i, rng.random_range(1..=w_max)));
            }
        }
    }
    WeightedMultigraph::from_triples(n, &t)
}

/// Parameters shared by the two disjointness families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundParams {
    /// Number of paths.
    pub x: usize,
    /// Path length in vertices.
    pub y: usize,
    pub k: usize,
    pub alpha: u64,
    /// Inputs of `x - 1` bits each.
    pub a: Vec<bool>,
    pub b: Vec<bool>,
}

impl LowerBoundParams {
    fn validate(&self) -> Result<()> {
        if self.x < 2 || self.y < 2 || self.k == 0 || self.alpha == 0 {
            return Err(Error::InvalidParams("lower-bound family needs x, y >= 2 and k, alpha >= 1".into()));
        }
        if self.a.len() + 1 != self.x || self.b.len() + 1 != self.x {
            return Err(Error::InvalidParams(format!("inputs must have x - 1 = {} bits", self.x - 1)));
        }
        Ok(())
    }

    /// Weight of a blocking star edge, `alpha x k + 1`.
    pub fn heavy(&self) -> u64 {
        self.alpha * (self.x * self.k) as u64 + 1
    }

    pub fn disjoint(&self) -> bool {
        !self.a.iter().zip(&self.b).any(|(&p, &q)| p && q)
    }

    fn input_weight(&self, bit: bool) -> u64 {
        if bit {
            self.heavy()
        } else {
            1
        }
    }

    /// Edges of the first path that shorten its diameter: `{j, j + 2^s}` for
    /// every `s >= 1` with `2^s` dividing `j`. Steps of 1 would duplicate
    /// path edges and are left out.
    fn shortcuts(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.y {
            let mut step = 2;
            while j + step < self.y {
                if j % step == 0 {
                    out.push((j, j + step));
                }
                step *= 2;
            }
        }
        out
    }

    fn no_weight_bound(n: usize, t: &[(VertexId, VertexId, u64)]) -> Result<WeightedMultigraph> {
        let edges = t.iter().enumerate().map(|(id, &(u, v, w))| crate::graph::Edge::new(id, u, v, w)).collect();
        WeightedMultigraph::with_weight_exponent(n, edges, 64)
    }
}

/// The multigraph family with `x` paths of `y` vertices: path edges as `k`
/// parallel zero-weight copies, zero-weight shortcuts on the first path, and
/// star edges to the first path. The first and last stars have `k` parallel
/// copies weighted by the inputs; the other star edges are heavy.
/// Vertex `(i, j)` has id `i + x j`.
pub fn lower_bound_multigraph(p: &LowerBoundParams) -> Result<WeightedMultigraph> {
    p.validate()?;
    let id = |i: usize, j: usize| i + p.x * j;
    let mut t = Vec::new();
    for i in 0..p.x {
        for j in 0..p.y - 1 {
            for _ in 0..p.k {
                t.push((id(i, j), id(i, j + 1), 0));
            }
        }
    }
    for (j, j2) in p.shortcuts() {
        t.push((id(0, j), id(0, j2), 0));
    }
    for i in 1..p.x {
        for j in 0..p.y {
            if j == 0 || j == p.y - 1 {
                let bit = if j == 0 { p.a[i - 1] } else { p.b[i - 1] };
                for _ in 0..p.k {
                    t.push((id(0, j), id(i, j), p.input_weight(bit)));
                }
            } else {
                t.push((id(0, j), id(i, j), p.heavy()));
            }
        }
    }
    LowerBoundParams::no_weight_bound(p.x * p.y, &t)
}

/// The simple-graph version: every vertex becomes a zero-weight clique of
/// `k` vertices, with parallel copies spread over the clique members.
/// Vertex `(i, j, l)` has id `(i + x j) k + l`.
pub fn lower_bound_simple(p: &LowerBoundParams) -> Result<WeightedMultigraph> {
    p.validate()?;
    let k = p.k;
    let id = |i: usize, j: usize, l: usize| (i + p.x * j) * k + l;
    let mut t = Vec::new();
    for i in 0..p.x {
        for j in 0..p.y {
            for l in 0..k {
                for l2 in l + 1..k {
                    t.push((id(i, j, l), id(i, j, l2), 0));
                }
            }
        }
    }
    for i in 0..p.x {
        for j in 0..p.y - 1 {
            for l in 0..k {
                t.push((id(i, j, l), id(i, j + 1, l), 0));
            }
        }
    }
    for (j, j2) in p.shortcuts() {
        t.push((id(0, j, 0), id(0, j2, 0), 0));
    }
    for i in 1..p.x {
        for j in 0..p.y {
            if j == 0 || j == p.y - 1 {
                let bit = if j == 0 { p.a[i - 1] } else { p.b[i - 1] };
                for l in 0..k {
                    t.push((id(0, j, l), id(i, j, l), p.input_weight(bit)));
                }
            } else {
                t.push((id(0, j, 0), id(i, j, 0), p.heavy()));
            }
        }
    }
    LowerBoundParams::no_weight_bound(p.x * p.y * k, &t)
}

/// Contracts consecutive blocks of `size` vertices, dropping edges inside a
/// block and keeping the rest as (sorted endpoints, weight) triples.
pub fn contract_blocks(g: &WeightedMultigraph, size: usize) -> Vec<(VertexId, VertexId, u64)> {
    let mut out: Vec<_> = g
        .edges()
        .iter()
        .filter(|e| e.u / size != e.v / size)
        .map(|e| {
            let (a, b) = (e.u / size, e.v / size);
            (a.min(b), a.max(b), e.w)
        })
        .collect();
    out.sort_unstable();
    out
}

/// A cycle of `cliques` zero-weight cliques of `k` vertices, consecutive
/// cliques joined by a zero-weight perfect matching, except two matchings
/// about half the cycle apart: one of weight `alpha k + 1`, the other of
/// weight 1 (light) or `(alpha k + 1) alpha k + 1` (heavy).
pub fn cycle_of_cliques(cliques: usize, k: usize, alpha: u64, heavy: bool) -> Result<WeightedMultigraph> {
    if cliques < 3 || k == 0 || alpha == 0 {
        return Err(Error::InvalidParams("cycle of cliques needs at least 3 cliques and k, alpha >= 1".into()));
    }
    let ak = alpha * k as u64;
    let id = |c: usize, l: usize| c * k + l;
    let far = cliques / 2;
    let mut t = Vec::new();
    for c in 0..cliques {
        for l in 0..k {
            for l2 in l + 1..k {
                t.push((id(c, l), id(c, l2), 0));
            }
        }
        let w = if c == 0 {
            ak + 1
        } else if c == far {
            if heavy {
                (ak + 1) * ak + 1
            } else {
                1
            }
        } else {
            0
        };
        for l in 0..k {
            t.push((id(c, l), id((c + 1) % cliques, l), w));
        }
    }
    LowerBoundParams::no_weight_bound(cliques * k, &t)
}

/// Decodes a bitstring such as `"0110"`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidParams(format!("bitstring {s:?} contains {c:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{min_cut, optimal_kecss};
    use proptest::prelude::*;

    fn params(a: &str, b: &str) -> LowerBoundParams {
        LowerBoundParams { x: 3, y: 3, k: 2, alpha: 2, a: parse_bits(a).unwrap(), b: parse_bits(b).unwrap() }
    }

    #[test]
    fn random_family_is_k_connected() {
        for (n, k) in [(2, 3), (5, 1), (12, 2), (20, 3), (16, 4)] {
            let g = random_kconnected(n, k, 5, 8, n as u64).unwrap();
            assert!(min_cut(&g) >= k, "n={n} k={k}");
            assert!(g.edges().iter().all(|e| (1..=8).contains(&e.w)));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_kconnected(15, 2, 7, 50, 3).unwrap().to_text();
        let b = random_kconnected(15, 2, 7, 50, 3).unwrap().to_text();
        assert_eq!(a, b);
        assert_ne!(a, random_kconnected(15, 2, 7, 50, 4).unwrap().to_text());
        assert_eq!(path_of_cliques(64, 2, 9, 1).unwrap().to_text(), path_of_cliques(64, 2, 9, 1).unwrap().to_text());
    }

    #[test]
    fn path_of_cliques_shape() {
        let g = path_of_cliques(64, 2, 9, 1).unwrap();
        // 8 cliques of 8 vertices, 7 links of 2 edges.
        assert_eq!(g.m(), 8 * 28 + 7 * 2);
        assert_eq!(min_cut(&g), 2);
        assert!(path_of_cliques(9, 3, 9, 1).is_err());
    }

    #[test]
    fn lower_bound_shape() {
        let p = params("00", "00");
        let g = lower_bound_multigraph(&p).unwrap();
        assert_eq!(g.n(), 9);
        // 12 path copies, 1 shortcut, 8 input star copies, 2 middle stars.
        assert_eq!(g.m(), 23);
        assert_eq!(p.shortcuts(), vec![(0, 2)]);
        let long = LowerBoundParams { y: 9, ..params("00", "00") };
        assert_eq!(long.shortcuts(), vec![(0, 2), (0, 4), (0, 8), (2, 4), (4, 6), (4, 8), (6, 8)]);
        assert!(min_cut(&g) >= 2);
        assert_eq!(p.heavy(), 13);
    }

    #[test]
    fn lower_bound_dichotomy_small() {
        for (a, b) in [("00", "11"), ("10", "01"), ("11", "00"), ("10", "10"), ("11", "01")] {
            let p = params(a, b);
            let opt = optimal_kecss(&lower_bound_multigraph(&p).unwrap(), 2).unwrap().cost;
            if p.disjoint() {
                assert!(opt <= 6, "{a} {b}: {opt}");
            } else {
                assert!(opt >= 13, "{a} {b}: {opt}");
            }
        }
    }

    #[test]
    fn simple_version_contracts_to_multigraph() {
        for k in 1..=3 {
            let p = LowerBoundParams { k, ..params("01", "11") };
            let simple = lower_bound_simple(&p).unwrap();
            let multi = lower_bound_multigraph(&p).unwrap();
            assert!(min_cut(&simple) >= k);
            assert_eq!(contract_blocks(&simple, k), contract_blocks(&multi, 1));
            // No parallel edges in the simple version.
            let mut pairs: Vec<_> = simple.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
            pairs.sort_unstable();
            let len = pairs.len();
            pairs.dedup();
            assert_eq!(pairs.len(), len);
        }
    }

    #[test]
    fn cycle_of_cliques_cases() {
        let light = cycle_of_cliques(6, 2, 2, false).unwrap();
        let heavy = cycle_of_cliques(6, 2, 2, true).unwrap();
        assert_eq!(light.n(), 12);
        assert!(min_cut(&light) >= 2);
        // Light: avoid the alpha k + 1 matching. Heavy: it is needed.
        assert_eq!(optimal_kecss(&light, 2).unwrap().cost, 2);
        assert_eq!(optimal_kecss(&heavy, 2).unwrap().cost, 10);
    }

    proptest! {
        #[test]
        fn bitstrings_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..16)) {
            let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            prop_assert_eq!(parse_bits(&s).unwrap(), bits);
        }
    }
}
