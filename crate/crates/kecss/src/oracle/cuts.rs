use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::mincut::min_cut_pairs;
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeId, WeightedMultigraph};

/// Largest vertex count accepted by bipartition enumeration.
pub const BIPARTITION_GUARD: usize = 25;
/// Largest vertex count accepted by any min-cut enumeration.
pub const ENUMERATION_GUARD: usize = 40;
/// Largest number of edge subsets scanned by subset enumeration.
pub const SUBSET_GUARD: u128 = 3_000_000;

/// A cut given by the vertex side not containing vertex 0 (as a bitmask) and
/// its crossing edges in ascending id order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MinCut {
    pub side: u64,
    pub edges: Vec<EdgeId>,
}

impl MinCut {
    pub fn separates(&self, u: usize, v: usize) -> bool {
        ((self.side >> u) & 1) != ((self.side >> v) & 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinCuts {
    pub value: usize,
    pub cuts: Vec<MinCut>,
}

impl MinCuts {
    /// Number of cuts crossed by the edge `e`.
    pub fn covered_by(&self, e: &Edge) -> usize {
        self.cuts.iter().filter(|c| c.separates(e.u, e.v)).count()
    }
}

fn cut_from_side(h: &WeightedMultigraph, side: u64) -> MinCut {
    let edges = h
        .edges()
        .iter()
        .filter(|e| ((side >> e.u) & 1) != ((side >> e.v) & 1))
        .map(|e| e.id)
        .collect();
    MinCut { side, edges }
}

fn finish(h: &WeightedMultigraph, value: usize, mut sides: Vec<u64>) -> MinCuts {
    sides.sort_unstable();
    sides.dedup();
    MinCuts { value, cuts: sides.into_iter().map(|s| cut_from_side(h, s)).collect() }
}

fn binomial(m: usize, k: usize) -> u128 {
    let k = k.min(m.saturating_sub(k));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (m - i) as u128 / (i + 1) as u128;
        if r > u128::MAX / 1024 {
            break;
        }
    }
    r
}

/// All minimum cuts, choosing the cheapest exact method for the instance.
pub fn enumerate_min_cuts(h: &WeightedMultigraph) -> Result<MinCuts> {
    let n = h.n();
    if n > ENUMERATION_GUARD {
        return Err(Error::SizeGuard { what: "min-cut enumeration", limit: ENUMERATION_GUARD, actual: n });
    }
    let value = min_cut_pairs(n, &h.endpoint_pairs(&h.full_subset()));
    if value > 0 && binomial(h.m(), value) <= SUBSET_GUARD {
        return enumerate_by_subsets(h);
    }
    if n <= BIPARTITION_GUARD {
        return enumerate_by_bipartitions(h);
    }
    enumerate_by_contraction(h, 0x5eed)
}

/// Exhaustive scan of all `2^(n-1) - 1` bipartitions in Gray-code order.
pub fn enumerate_by_bipartitions(h: &WeightedMultigraph) -> Result<MinCuts> {
    let n = h.n();
    if n > BIPARTITION_GUARD {
        return Err(Error::SizeGuard { what: "bipartition enumeration", limit: BIPARTITION_GUARD, actual: n });
    }
    if n < 2 {
        return Ok(MinCuts { value: 0, cuts: Vec::new() });
    }
    let mut nbrs = vec![Vec::new(); n];
    for e in h.edges() {
        nbrs[e.u].push(e.v);
        nbrs[e.v].push(e.u);
    }
    let mut side = 0u64;
    let mut value: i64 = 0;
    let mut best = i64::MAX;
    let mut found = Vec::new();
    for step in 1u64..(1u64 << (n - 1)) {
        // Gray code: flip vertex 1 + (number of trailing zeros of step).
        let x = 1 + step.trailing_zeros() as usize;
        let was_in = (side >> x) & 1;
        for &y in &nbrs[x] {
            if (side >> y) & 1 == was_in {
                value += 1;
            } else {
                value -= 1;
            }
        }
        side ^= 1 << x;
        if value < best {
            best = value;
            found.clear();
        }
        if value == best {
            found.push(side);
        }
    }
    Ok(finish(h, best as usize, found))
}

/// Enumerates all edge sets of size λ whose removal disconnects the graph;
/// each such set is exactly one minimum cut.
pub fn enumerate_by_subsets(h: &WeightedMultigraph) -> Result<MinCuts> {
    let n = h.n();
    if n > 64 {
        return Err(Error::SizeGuard { what: "subset enumeration", limit: 64, actual: n });
    }
    let value = min_cut_pairs(n, &h.endpoint_pairs(&h.full_subset()));
    if value == 0 {
        return enumerate_by_bipartitions(h);
    }
    let m = h.m();
    let count = binomial(m, value);
    if count > SUBSET_GUARD {
        return Err(Error::SizeGuard { what: "subset enumeration", limit: SUBSET_GUARD as usize, actual: count as usize });
    }
    let edges = h.edges();
    let mut idx: Vec<usize> = (0..value).collect();
    let mut sides = Vec::new();
    let mut removed = vec![false; m];
    loop {
        for &i in &idx {
            removed[i] = true;
        }
        let mut uf = UnionFind::<usize>::new(n);
        let mut merged = 0;
        for (i, e) in edges.iter().enumerate() {
            if !removed[i] && uf.union(e.u, e.v) {
                merged += 1;
            }
        }
        if merged + 1 < n {
            let root0 = uf.find(0);
            let side = (0..n).filter(|&v| uf.find(v) != root0).fold(0u64, |s, v| s | (1 << v));
            sides.push(side);
        }
        for &i in &idx {
            removed[i] = false;
        }
        // Next combination in lexicographic order.
        let mut pos = value;
        while pos > 0 && idx[pos - 1] == m - value + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..value {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(finish(h, value, sides))
}

/// Repeated random contraction; every cut it reports is verified against the
/// exact min-cut value, and the trial count makes missing a cut unlikely.
pub fn enumerate_by_contraction(h: &WeightedMultigraph, seed: u64) -> Result<MinCuts> {
    let n = h.n();
    if n > ENUMERATION_GUARD {
        return Err(Error::SizeGuard { what: "contraction enumeration", limit: ENUMERATION_GUARD, actual: n });
    }
    let value = min_cut_pairs(n, &h.endpoint_pairs(&h.full_subset()));
    if value == 0 || n < 2 {
        return enumerate_by_bipartitions(h).or(Ok(MinCuts { value: 0, cuts: Vec::new() }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 8 * n * n * (usize::BITS - n.leading_zeros()) as usize;
    let edges = h.edges();
    let mut sides = Vec::new();
    for _ in 0..trials {
        let mut uf = UnionFind::<usize>::new(n);
        let mut groups = n;
        let mut order: Vec<usize> = (0..edges.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for &i in &order {
            if groups == 2 {
                break;
            }
            if uf.union(edges[i].u, edges[i].v) {
                groups -= 1;
            }
        }
        let root0 = uf.find(0);
        let side = (0..n).filter(|&v| uf.find(v) != root0).fold(0u64, |s, v| s | (1 << v));
        let crossing = edges.iter().filter(|e| ((side >> e.u) & 1) != ((side >> e.v) & 1)).count();
        if crossing == value {
            sides.push(side);
        }
    }
    Ok(finish(h, value, sides))
}

/// Exact `|C_e|`: min cuts of `h` crossed by `e`, via the side bitmasks.
pub fn exact_covered_count(h: &WeightedMultigraph, e: &Edge) -> Result<usize> {
    if h.contains(e.id) {
        return Err(Error::EdgeInSubgraph(e.id));
    }
    Ok(enumerate_min_cuts(h)?.covered_by(e))
}

/// `|C_e|` computed independently: a min cut `C` is covered iff
/// `(H \ C) ∪ {e}` is connected.
pub fn covered_count_by_reconnection(h: &WeightedMultigraph, cuts: &MinCuts, e: &Edge) -> usize {
    let n = h.n();
    cuts.cuts
        .iter()
        .filter(|c| {
            let mut uf = UnionFind::<usize>::new(n);
            let mut merged = 0;
            for x in h.edges() {
                if c.edges.binary_search(&x.id).is_err() && uf.union(x.u, x.v) {
                    merged += 1;
                }
            }
            if uf.union(e.u, e.v) {
                merged += 1;
            }
            merged + 1 == n
        })
        .count()
}

/// Cost-effectiveness `|C_e| / w(e)` kept as an exact pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rho {
    pub covered: usize,
    pub weight: u64,
}

impl Rho {
    pub fn value(&self) -> f64 {
        if self.covered == 0 {
            0.0
        } else if self.weight == 0 {
            f64::INFINITY
        } else {
            self.covered as f64 / self.weight as f64
        }
    }

    /// `covered / weight >= num / den` in exact arithmetic.
    pub fn at_least(&self, num: u128, den: u128) -> bool {
        if self.weight == 0 {
            return self.covered > 0 || num == 0;
        }
        (self.covered as u128) * den >= num * self.weight as u128
    }
}

pub fn exact_rho(h: &WeightedMultigraph, e: &Edge) -> Result<Rho> {
    Ok(Rho { covered: exact_covered_count(h, e)?, weight: e.w })
}
