use serde::Serialize;

use super::mincut::edge_connectivity_at_least;
use crate::error::{Error, Result};
use crate::graph::{EdgeSubset, WeightedMultigraph};

/// Largest number of positive-weight edges accepted by [`optimal_kecss`];
/// zero-weight edges are always taken and do not enlarge the search.
pub const OPTIMAL_GUARD: usize = 22;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalKecss {
    pub edges: Vec<usize>,
    pub cost: u64,
}

impl OptimalKecss {
    pub fn subset(&self, g: &WeightedMultigraph) -> EdgeSubset {
        EdgeSubset::from_ids(g.id_bound(), self.edges.iter().copied())
    }
}

/// Minimum-cost k-edge-connected spanning subgraph by branch and bound over
/// edge subsets. Zero-weight edges are always taken.
pub fn optimal_kecss(g: &WeightedMultigraph, k: usize) -> Result<OptimalKecss> {
    let weighted = g.edges().iter().filter(|e| e.w > 0).count();
    if weighted > OPTIMAL_GUARD {
        return Err(Error::SizeGuard { what: "optimal k-ECSS", limit: OPTIMAL_GUARD, actual: weighted });
    }
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let edges = g.edges();
    let all: Vec<(usize, usize)> = edges.iter().map(|e| (e.u, e.v)).collect();
    if !edge_connectivity_at_least(g.n(), &all, k) {
        return Err(Error::NotKConnected(k));
    }
    let mut forced = Vec::new();
    let mut free = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if e.w == 0 {
            forced.push(i);
        } else {
            free.push(i);
        }
    }
    // Expensive edges first: excluding them early finds cheap solutions fast.
    free.sort_by_key(|&i| (std::cmp::Reverse(edges[i].w), edges[i].id));
    let mut search = Search {
        g,
        k,
        free,
        state: vec![None; edges.len()],
        best_cost: u64::MAX,
        best: Vec::new(),
    };
    for &i in &forced {
        search.state[i] = Some(true);
    }
    search.dfs(0, 0);
    let mut ids: Vec<usize> = search.best.iter().map(|&i| edges[i].id).collect();
    ids.sort_unstable();
    Ok(OptimalKecss { edges: ids, cost: search.best_cost })
}

struct Search<'a> {
    g: &'a WeightedMultigraph,
    k: usize,
    free: Vec<usize>,
    state: Vec<Option<bool>>,
    best_cost: u64,
    best: Vec<usize>,
}

impl Search<'_> {
    fn feasible(&self) -> bool {
        let pairs: Vec<(usize, usize)> = self
            .g
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.state[*i] != Some(false))
            .map(|(_, e)| (e.u, e.v))
            .collect();
        edge_connectivity_at_least(self.g.n(), &pairs, self.k)
    }

    fn dfs(&mut self, depth: usize, cost: u64) {
        if cost >= self.best_cost {
            return;
        }
        if depth == self.free.len() {
            self.best_cost = cost;
            self.best = (0..self.state.len()).filter(|&i| self.state[i] == Some(true)).collect();
            return;
        }
        let i = self.free[depth];
        self.state[i] = Some(false);
        if self.feasible() {
            self.dfs(depth + 1, cost);
        }
        self.state[i] = Some(true);
        self.dfs(depth + 1, cost + self.g.edges()[i].w);
        self.state[i] = None;
    }
}
