use serde::Serialize;

use super::span::SpanTree;
use crate::congest::primitives::Combine;
use crate::graph::{EdgeId, WeightedMultigraph};

/// `Cov(t)` for every tree edge: the number of edges of the host graph whose
/// tree path contains `t`, counting `t` itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverValues {
    values: Vec<u64>,
}

impl CoverValues {
    pub fn from_vec(values: Vec<u64>) -> Self {
        CoverValues { values }
    }

    pub fn get(&self, t: EdgeId) -> u64 {
        self.values[t]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.values
    }
}

/// Cover values by `+1` at both endpoints, `-2` at the LCA, and subtree sums.
pub fn cover_values(h: &WeightedMultigraph, tree: &SpanTree) -> CoverValues {
    let n = tree.n();
    let mut mark = vec![0i64; n];
    for e in h.edges() {
        mark[e.u] += 1;
        mark[e.v] += 1;
        mark[tree.lca(e.u, e.v)] -= 2;
    }
    for &x in tree.order.iter().rev() {
        if let Some(p) = tree.parent[x] {
            mark[p] += mark[x];
        }
    }
    let mut values = vec![0; h.id_bound().max(tree.edges().iter().max().map_or(0, |m| m + 1))];
    for x in 0..n {
        if let Some(t) = tree.parent_edge[x] {
            values[t] = mark[x] as u64;
        }
    }
    CoverValues { values }
}

/// For every edge of `h`, the fold of `value(t)` over the tree edges on its
/// tree path, in ascending edge-id order of `h`.
pub fn path_aggregate<F>(h: &WeightedMultigraph, tree: &SpanTree, op: Combine, value: F) -> Vec<(EdgeId, u64)>
where
    F: Fn(EdgeId) -> u64,
{
    // Prefix folds from the root are enough for invertible operations; the
    // general case walks up to the LCA.
    match op {
        Combine::Xor | Combine::Sum => {
            let n = tree.n();
            let mut prefix = vec![op.identity(); n];
            for &x in &tree.order {
                if let (Some(p), Some(t)) = (tree.parent[x], tree.parent_edge[x]) {
                    prefix[x] = op.apply(prefix[p], value(t));
                }
            }
            h.edges()
                .iter()
                .map(|e| {
                    let w = tree.lca(e.u, e.v);
                    let v = match op {
                        Combine::Xor => prefix[e.u] ^ prefix[e.v],
                        _ => prefix[e.u].wrapping_add(prefix[e.v]).wrapping_sub(prefix[w].wrapping_mul(2)),
                    };
                    (e.id, v)
                })
                .collect()
        }
        _ => path_aggregate_naive(h, tree, op, value),
    }
}

/// Reference fold along explicit tree paths.
pub fn path_aggregate_naive<F>(h: &WeightedMultigraph, tree: &SpanTree, op: Combine, value: F) -> Vec<(EdgeId, u64)>
where
    F: Fn(EdgeId) -> u64,
{
    h.edges()
        .iter()
        .map(|e| (e.id, tree.path_edges(e.u, e.v).into_iter().fold(op.identity(), |acc, t| op.apply(acc, value(t)))))
        .collect()
}
