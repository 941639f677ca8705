//! Weighted multigraphs, edge subsets, and the shared connectivity predicates.

mod io;
mod ops;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ops::{components, is_connected, is_k_edge_connected, min_cut_value, mst};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Default exponent `c` in the weight bound `W_max = n^c`.
pub const DEFAULT_WEIGHT_EXPONENT: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub w: u64,
}

impl Edge {
    pub fn new(id: EdgeId, u: VertexId, v: VertexId, w: u64) -> Self {
        Edge { id, u, v, w }
    }

    /// The endpoint opposite to `x`.
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected multigraph with unique edge ids. Edges are stored in ascending id
/// order, which is also the global tie-breaking order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedMultigraph {
    n: usize,
    edges: Vec<Edge>,
    slot: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

impl WeightedMultigraph {
    /// Builds a graph with the default weight bound `n^3`.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_weight_exponent(n, edges, DEFAULT_WEIGHT_EXPONENT)
    }

    pub fn with_weight_exponent(n: usize, edges: Vec<Edge>, exponent: u32) -> Result<Self> {
        let bound = weight_bound(n, exponent);
        Self::build(n, edges, bound)
    }

    fn build(n: usize, mut edges: Vec<Edge>, bound: u64) -> Result<Self> {
        edges.sort_by_key(|e| e.id);
        for pair in edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateEdgeId(pair[0].id));
            }
        }
        for e in &edges {
            for x in [e.u, e.v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { edge: e.id, vertex: x, n });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop { edge: e.id, vertex: e.u });
            }
            if e.w > bound {
                return Err(Error::WeightTooLarge { edge: e.id, weight: e.w, bound });
            }
        }
        let id_bound = edges.last().map_or(0, |e| e.id + 1);
        let mut slot = vec![usize::MAX; id_bound];
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            slot[e.id] = i;
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
        Ok(WeightedMultigraph { n, edges, slot, adj })
    }

    /// Convenience constructor assigning ids `0..m` in list order.
    pub fn from_triples(n: usize, triples: &[(VertexId, VertexId, u64)]) -> Result<Self> {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(id, &(u, v, w))| Edge::new(id, u, v, w))
            .collect();
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// All edges in ascending id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// One past the largest edge id.
    pub fn id_bound(&self) -> usize {
        self.slot.len()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.slot.get(id).is_some_and(|&s| s != usize::MAX)
    }

    /// Panics if `id` is not an edge of the graph.
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[self.slot[id]]
    }

    pub fn get(&self, id: EdgeId) -> Option<&Edge> {
        self.slot.get(id).and_then(|&s| self.edges.get(s))
    }

    /// Incident edges of `v` in ascending id order.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.adj[v].iter().map(move |&i| &self.edges[i])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    pub fn full_subset(&self) -> EdgeSubset {
        EdgeSubset::from_ids(self.id_bound(), self.edges.iter().map(|e| e.id))
    }

    pub fn empty_subset(&self) -> EdgeSubset {
        EdgeSubset::new(self.id_bound())
    }

    /// Checks that every id in `sub` names an edge of this graph.
    pub fn check_subset(&self, sub: &EdgeSubset) -> Result<()> {
        for id in sub.iter() {
            if !self.contains(id) {
                return Err(Error::InvalidSubset(id));
            }
        }
        Ok(())
    }

    /// The sub-multigraph on the same vertex set, keeping edge ids.
    pub fn restrict(&self, sub: &EdgeSubset) -> Result<WeightedMultigraph> {
        self.check_subset(sub)?;
        let edges = sub.iter().map(|id| *self.edge(id)).collect();
        Self::build(self.n, edges, u64::MAX)
    }

    pub fn weight_of(&self, sub: &EdgeSubset) -> u64 {
        sub.iter().filter_map(|id| self.get(id)).map(|e| e.w).sum()
    }

    /// Edge list as `(u, v)` pairs for the subset, in id order.
    pub fn endpoint_pairs(&self, sub: &EdgeSubset) -> Vec<(VertexId, VertexId)> {
        sub.iter().filter_map(|id| self.get(id)).map(|e| (e.u, e.v)).collect()
    }
}

pub fn weight_bound(n: usize, exponent: u32) -> u64 {
    (n.max(2) as u64).saturating_pow(exponent)
}

/// Set of edge ids backed by a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    bits: FixedBitSet,
}

impl EdgeSubset {
    pub fn new(id_bound: usize) -> Self {
        EdgeSubset { bits: FixedBitSet::with_capacity(id_bound) }
    }

    pub fn from_ids(id_bound: usize, ids: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut s = Self::new(id_bound);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn insert(&mut self, id: EdgeId) {
        if id >= self.bits.len() {
            self.bits.grow(id + 1);
        }
        self.bits.insert(id);
    }

    pub fn remove(&mut self, id: EdgeId) {
        if id < self.bits.len() {
            self.bits.set(id, false);
        }
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.bits.contains(id)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.bits.ones()
    }

    pub fn union(&self, other: &EdgeSubset) -> EdgeSubset {
        let mut bits = self.bits.clone();
        if other.bits.len() > bits.len() {
            bits.grow(other.bits.len());
        }
        bits.union_with(&other.bits);
        EdgeSubset { bits }
    }

    pub fn difference(&self, other: &EdgeSubset) -> EdgeSubset {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        EdgeSubset { bits }
    }

    pub fn is_subset(&self, other: &EdgeSubset) -> bool {
        self.iter().all(|id| other.contains(id))
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }
}

impl FromIterator<EdgeId> for EdgeSubset {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        let ids: Vec<EdgeId> = iter.into_iter().collect();
        let bound = ids.iter().max().map_or(0, |&m| m + 1);
        EdgeSubset::from_ids(bound, ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert_eq!(
            WeightedMultigraph::from_triples(2, &[(1, 1, 1)]),
            Err(Error::SelfLoop { edge: 0, vertex: 1 })
        );
        let dup = vec![Edge::new(3, 0, 1, 1), Edge::new(3, 1, 0, 1)];
        assert_eq!(WeightedMultigraph::new(2, dup), Err(Error::DuplicateEdgeId(3)));
    }

    #[test]
    fn weight_bound_is_enforced() {
        let err = WeightedMultigraph::from_triples(2, &[(0, 1, 9)]).unwrap_err();
        assert!(matches!(err, Error::WeightTooLarge { bound: 8, .. }));
    }

    #[test]
    fn parallel_edges_keep_distinct_ids() {
        let g = WeightedMultigraph::from_triples(2, &[(0, 1, 1), (0, 1, 2), (1, 0, 3)]).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.incident(0).map(|e| e.id).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn restrict_keeps_ids() {
        let g = WeightedMultigraph::from_triples(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let h = g.restrict(&EdgeSubset::from_ids(3, [2])).unwrap();
        assert_eq!(h.m(), 1);
        assert_eq!(h.edge(2).u, 0);
        assert!(!h.contains(0));
    }

    #[test]
    fn subset_algebra() {
        let a = EdgeSubset::from_ids(4, [0, 2]);
        let b = EdgeSubset::from_ids(6, [2, 5]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 2, 5]);
        assert_eq!(b.difference(&a).to_vec(), vec![5]);
        assert!(EdgeSubset::from_ids(3, [2]).is_subset(&a));
    }
}

/// Serializes as the ascending list of member ids.
impl Serialize for EdgeSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
