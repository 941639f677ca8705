//! Centralized brute-force ground truth used by tests and the verify command.

mod cuts;
mod mincut;
mod optimal;

pub use cuts::{
    covered_count_by_reconnection, enumerate_by_bipartitions, enumerate_by_contraction, enumerate_by_subsets,
    enumerate_min_cuts, exact_covered_count, exact_rho, MinCut, MinCuts, Rho, BIPARTITION_GUARD, ENUMERATION_GUARD,
};
pub use mincut::{edge_connectivity_at_least, min_cut_flow, min_cut_pairs};
pub use optimal::{optimal_kecss, OptimalKecss, OPTIMAL_GUARD};

use crate::graph::{VertexId, WeightedMultigraph};

/// Above this many vertices [`min_cut`] switches from the dense contraction
/// method to degree-bounded max flows.
const DENSE_LIMIT: usize = 256;

/// Exact global edge connectivity of `h` (0 if disconnected).
pub fn min_cut(h: &WeightedMultigraph) -> usize {
    min_cut_of(h.n(), &h.endpoint_pairs(&h.full_subset()))
}

/// Edge connectivity of the multigraph given by endpoint pairs on `n` vertices.
pub fn min_cut_of(n: usize, pairs: &[(VertexId, VertexId)]) -> usize {
    if n <= DENSE_LIMIT {
        min_cut_pairs(n, pairs)
    } else {
        min_cut_flow(n, pairs)
    }
}
