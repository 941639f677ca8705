//! Cuts that cross a spanning tree in one or two edges.

mod packing;

use std::collections::HashMap;

use serde::Serialize;

pub use packing::{build_packing, faithful_len, respect_fraction, PackingMode, TreePacking};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, WeightedMultigraph};
use crate::tree::{cover_values, LabelScheme, LcaLabel, SpanTree};

/// A cut given by one tree edge, or by an unordered pair of tree edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TwoRespectingCut {
    pub t: EdgeId,
    pub t_prime: Option<EdgeId>,
}

impl TwoRespectingCut {
    pub fn single(t: EdgeId) -> Self {
        TwoRespectingCut { t, t_prime: None }
    }

    /// Pair with the smaller id first.
    pub fn pair(a: EdgeId, b: EdgeId) -> Self {
        TwoRespectingCut { t: a.min(b), t_prime: Some(a.max(b)) }
    }
}

/// `Cut(t, t') = Cov(t) + Cov(t') - 2 Cov(t, t')`.
pub fn cut_value(cov_t: u64, cov_t_prime: u64, cov_pair: u64) -> u64 {
    cov_t + cov_t_prime - 2 * cov_pair
}

/// Number of edges of `h` crossing the cut obtained by deleting `t` (and `t2`)
/// from the tree, counted directly from the vertex sides.
pub fn crossing_count(h: &WeightedMultigraph, tree: &SpanTree, t: EdgeId, t2: Option<EdgeId>) -> Result<usize> {
    let a = tree.lower(t)?;
    let b = t2.map(|x| tree.lower(x)).transpose()?;
    let side = |v| tree.is_ancestor(a, v) ^ b.is_some_and(|b| tree.is_ancestor(b, v));
    Ok(h.edges().iter().filter(|e| side(e.u) != side(e.v)).count())
}

/// Whether `e` (endpoint labels `ea`, `eb`) covers the cut, decided from
/// labels only: a 1-respecting cut is covered iff `t` lies on `e`'s tree path,
/// a 2-respecting cut iff exactly one of its two edges does.
pub fn edge_covers_cut(
    scheme: &LabelScheme,
    ea: &LcaLabel,
    eb: &LcaLabel,
    t: (&LcaLabel, &LcaLabel),
    t_prime: Option<(&LcaLabel, &LcaLabel)>,
) -> bool {
    let first = scheme.covers(ea, eb, t.0, t.1);
    match t_prime {
        None => first,
        Some((a, b)) => first != scheme.covers(ea, eb, a, b),
    }
}

/// Cover values and pairwise cover counts of all tree edges, computed
/// centrally by walking every tree path.
#[derive(Clone, Debug)]
pub struct CoverTable {
    index: HashMap<EdgeId, usize>,
    edges: Vec<EdgeId>,
    cov: Vec<u64>,
    pair: Vec<u64>,
}

impl CoverTable {
    pub fn new(h: &WeightedMultigraph, tree: &SpanTree) -> Self {
        let edges = tree.edge_ids();
        let index: HashMap<EdgeId, usize> = edges.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let m = edges.len();
        let mut pair = vec![0u64; m * m];
        for e in h.edges() {
            let path: Vec<usize> = tree.path_edges(e.u, e.v).iter().map(|t| index[t]).collect();
            for &i in &path {
                for &j in &path {
                    pair[i * m + j] += 1;
                }
            }
        }
        let cv = cover_values(h, tree);
        let cov = edges.iter().map(|&t| cv.get(t)).collect();
        CoverTable { index, edges, cov, pair }
    }

    pub fn tree_edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn cov(&self, t: EdgeId) -> u64 {
        self.cov[self.index[&t]]
    }

    pub fn pair(&self, t: EdgeId, t2: EdgeId) -> u64 {
        self.pair[self.index[&t] * self.edges.len() + self.index[&t2]]
    }

    /// Size of the cut defined by `t` alone or by the pair.
    pub fn cut(&self, t: EdgeId, t2: Option<EdgeId>) -> u64 {
        match t2 {
            None => self.cov(t),
            Some(t2) => cut_value(self.cov(t), self.cov(t2), self.pair(t, t2)),
        }
    }

    /// Partners `t'` with `Cut(t, t') = k`, ascending.
    pub fn partners(&self, t: EdgeId, k: u64) -> Vec<EdgeId> {
        self.edges.iter().copied().filter(|&t2| t2 != t && self.cut(t, Some(t2)) == k).collect()
    }

    /// All 1- and 2-respecting cuts of size `k`.
    pub fn min_respecting(&self, k: u64) -> Vec<TwoRespectingCut> {
        let mut out = Vec::new();
        for (i, &t) in self.edges.iter().enumerate() {
            if self.cov[i] == k {
                out.push(TwoRespectingCut::single(t));
            }
            for &t2 in &self.edges[i + 1..] {
                if self.cut(t, Some(t2)) == k {
                    out.push(TwoRespectingCut::pair(t, t2));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Global estimate `3 * sum / l` from per-tree covered-cut counts.
pub fn reduce_counts(counts: &[f64]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyPacking);
    }
    Ok(3.0 * counts.iter().sum::<f64>() / counts.len() as f64)
}
