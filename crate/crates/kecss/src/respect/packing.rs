use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_connected, min_cut_value, EdgeId, EdgeSubset, VertexId, WeightedMultigraph};
use crate::oracle::{enumerate_min_cuts, MinCut, MinCuts};
use crate::par;
use crate::tree::SpanTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingMode {
    /// Greedy load-balancing trees on a sampled sub-multigraph.
    Faithful,
    /// Trees selected against the enumerated minimum cuts.
    Oracle,
}

/// Spanning trees of `h`, all rooted at vertex 0.
#[derive(Clone, Debug)]
pub struct TreePacking {
    pub trees: Vec<SpanTree>,
    pub mode: PackingMode,
}

impl TreePacking {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Checks that every minimum cut of `h` 2-respects at least a third of
    /// the trees.
    pub fn validate(&self, h: &WeightedMultigraph) -> Result<()> {
        let cuts = enumerate_min_cuts(h)?;
        let frac = respect_fraction(self, &cuts);
        if self.is_empty() || 3.0 * frac < 1.0 {
            return Err(Error::PackingValidation(format!(
                "{} trees, worst cut respected by a fraction {frac:.3}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// `⌈3 · (log2 n)^2.2⌉`, at least 1.
pub fn faithful_len(n: usize) -> usize {
    let l = (n.max(2) as f64).log2();
    (3.0 * l.powf(2.2)).ceil().max(1.0) as usize
}

/// Smallest fraction of trees 2-respected by any of the cuts; 1 when there
/// are no cuts.
pub fn respect_fraction(packing: &TreePacking, cuts: &MinCuts) -> f64 {
    if packing.is_empty() {
        return 0.0;
    }
    cuts.cuts
        .iter()
        .map(|c| packing.trees.iter().filter(|t| respects(t, c)).count() as f64 / packing.len() as f64)
        .fold(1.0, f64::min)
}

fn respects(tree: &SpanTree, cut: &MinCut) -> bool {
    cut.edges.iter().filter(|&&e| tree.is_tree_edge(e)).count() <= 2
}

/// Builds a packing of `len` trees (faithful mode) or a validated selection
/// (oracle mode, where `len` is the size of the candidate pool).
pub fn build_packing(h: &WeightedMultigraph, mode: PackingMode, seed: u64, len: Option<usize>) -> Result<TreePacking> {
    if !is_connected(h, &h.full_subset()) {
        return Err(Error::Disconnected);
    }
    let len = len.unwrap_or_else(|| faithful_len(h.n()));
    if len == 0 {
        return Err(Error::EmptyPacking);
    }
    let trees = match mode {
        PackingMode::Faithful => faithful(h, seed, len)?,
        PackingMode::Oracle => oracle_selected(h, seed, len)?,
    };
    let trees = trees.iter().map(|t| SpanTree::new(h, t, 0)).collect::<Result<_>>()?;
    Ok(TreePacking { trees, mode })
}

fn faithful(h: &WeightedMultigraph, seed: u64, len: usize) -> Result<Vec<EdgeSubset>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = min_cut_value(h, &h.full_subset())?.max(1);
    let p = (6.0 * (h.n().max(2) as f64).ln() / lambda as f64).min(1.0);
    let mut sample = h.full_subset();
    if p < 1.0 {
        for _ in 0..32 {
            let s = EdgeSubset::from_ids(h.id_bound(), h.edges().iter().filter(|_| rng.random_bool(p)).map(|e| e.id));
            if is_connected(h, &s) {
                sample = s;
                break;
            }
        }
    }
    let tiebreak: Vec<u64> = (0..h.id_bound()).map(|_| rng.random()).collect();
    Ok(greedy_trees(h, &sample, &tiebreak, len))
}

/// `len` successive minimum spanning trees with respect to the current edge
/// loads; each chosen tree raises the load of its edges by one.
fn greedy_trees(h: &WeightedMultigraph, sample: &EdgeSubset, tiebreak: &[u64], len: usize) -> Vec<EdgeSubset> {
    let mut load = vec![0u32; h.id_bound()];
    let ids = sample.to_vec();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut order = ids.clone();
        order.sort_by_key(|&e| (load[e], tiebreak[e], e));
        let tree = kruskal(h, order);
        for e in tree.iter() {
            load[e] += 1;
        }
        out.push(tree);
    }
    out
}

fn kruskal(h: &WeightedMultigraph, order: impl IntoIterator<Item = EdgeId>) -> EdgeSubset {
    let mut uf = UnionFind::<VertexId>::new(h.n());
    let mut out = h.empty_subset();
    for id in order {
        let e = h.edge(id);
        if uf.union(e.u, e.v) {
            out.insert(id);
        }
    }
    out
}

/// Tree crossing `cut` exactly once: spanning trees of both sides joined by
/// the smallest crossing edge.
fn one_crossing_tree(h: &WeightedMultigraph, cut: &MinCut) -> EdgeSubset {
    let side = |v: VertexId| (cut.side >> v) & 1;
    let inside = h.edges().iter().filter(|e| side(e.u) == side(e.v)).map(|e| e.id);
    kruskal(h, inside.chain(cut.edges.iter().copied()))
}

fn oracle_selected(h: &WeightedMultigraph, seed: u64, pool_len: usize) -> Result<Vec<EdgeSubset>> {
    let cuts = enumerate_min_cuts(h)?;
    let pool: Vec<EdgeSubset> = par::map_range(pool_len, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let tiebreak: Vec<u64> = (0..h.id_bound()).map(|_| rng.random()).collect();
        greedy_trees(h, &h.full_subset(), &tiebreak, i % 4 + 1).pop().expect("nonempty")
    });
    let respects_set = |t: &EdgeSubset| -> Vec<bool> {
        cuts.cuts.iter().map(|c| c.edges.iter().filter(|&&e| t.contains(e)).count() <= 2).collect()
    };
    let pool_resp: Vec<Vec<bool>> = par::map(&pool, respects_set);
    let mut count = vec![0usize; cuts.cuts.len()];
    let mut chosen: Vec<EdgeSubset> = Vec::new();
    let cap = pool_len + 3 * cuts.cuts.len() + 3;
    let satisfied = |count: &[usize], size: usize| count.iter().all(|&c| 3 * c >= size);
    while chosen.is_empty() || !satisfied(&count, chosen.len()) {
        if chosen.len() >= cap {
            return Err(Error::PackingValidation(format!("no valid selection within {cap} trees")));
        }
        let next = chosen.len() + 1;
        let score = |resp: &[bool]| count.iter().zip(resp).filter(|&(&c, &r)| 3 * (c + usize::from(r)) >= next).count();
        let best = (0..pool.len()).max_by_key(|&i| (score(&pool_resp[i]), std::cmp::Reverse(i)));
        let (tree, resp) = match best {
            Some(i) if score(&pool_resp[i]) == cuts.cuts.len() => (pool[i].clone(), pool_resp[i].clone()),
            _ => {
                let worst = (0..cuts.cuts.len()).min_by_key(|&c| (count[c], c)).expect("some cut is unsatisfied");
                let t = one_crossing_tree(h, &cuts.cuts[worst]);
                let r = respects_set(&t);
                match best {
                    Some(i) if score(&pool_resp[i]) >= score(&r) => (pool[i].clone(), pool_resp[i].clone()),
                    _ => (t, r),
                }
            }
        };
        for (c, r) in count.iter_mut().zip(&resp) {
            *c += usize::from(*r);
        }
        chosen.push(tree);
    }
    Ok(chosen)
}
