use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSubset, VertexId, WeightedMultigraph};

/// A spanning tree rooted at `root`. Each tree edge is identified with its
/// lower endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub depth: Vec<usize>,
    pub children: Vec<Vec<VertexId>>,
    /// Vertices in BFS order from the root.
    pub order: Vec<VertexId>,
    pre: Vec<usize>,
    post: Vec<usize>,
    lower: Vec<Option<VertexId>>,
    edges: EdgeSubset,
}

impl SpanTree {
    /// Roots the spanning tree formed by `edges` at `root`.
    pub fn new(g: &WeightedMultigraph, edges: &EdgeSubset, root: VertexId) -> Result<Self> {
        let n = g.n();
        g.check_subset(edges)?;
        if edges.len() + 1 != n.max(1) {
            return Err(Error::NotATree(format!("{} edges for {} vertices", edges.len(), n)));
        }
        let mut adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); n];
        for id in edges.iter() {
            let e = g.edge(id);
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        let mut parent = vec![None; n];
        let mut parent_edge = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &(y, id) in &adj[x] {
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some(x);
                    parent_edge[y] = Some(id);
                    children[x].push(y);
                    queue.push_back(y);
                }
            }
        }
        if order.len() != n {
            return Err(Error::NotATree("edges do not span the graph".into()));
        }
        for c in children.iter_mut() {
            c.sort_unstable();
        }
        let mut lower = vec![None; g.id_bound()];
        for v in 0..n {
            if let Some(id) = parent_edge[v] {
                lower[id] = Some(v);
            }
        }
        let (mut pre, mut post) = (vec![0; n], vec![0; n]);
        let mut clock = 0;
        let mut stack = vec![(root, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                post[x] = clock;
                continue;
            }
            pre[x] = clock;
            clock += 1;
            stack.push((x, true));
            for &c in children[x].iter().rev() {
                stack.push((c, false));
            }
        }
        Ok(SpanTree { root, parent, parent_edge, depth, children, order, pre, post, lower, edges: edges.clone() })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn edges(&self) -> &EdgeSubset {
        &self.edges
    }

    /// Tree edge ids in ascending order.
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.to_vec()
    }

    pub fn is_tree_edge(&self, id: EdgeId) -> bool {
        self.lower.get(id).is_some_and(|x| x.is_some())
    }

    /// Lower endpoint of tree edge `id`.
    pub fn lower(&self, id: EdgeId) -> Result<VertexId> {
        self.lower.get(id).copied().flatten().ok_or(Error::NotTreeEdge(id))
    }

    /// Whether `a` is an ancestor of `b` (or equal).
    pub fn is_ancestor(&self, a: VertexId, b: VertexId) -> bool {
        self.pre[a] <= self.pre[b] && self.post[b] <= self.post[a]
    }

    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Tree edges on the path between `a` and `b`.
    pub fn path_edges(&self, a: VertexId, b: VertexId) -> Vec<EdgeId> {
        let w = self.lca(a, b);
        let mut out = Vec::new();
        for mut x in [a, b] {
            while x != w {
                out.push(self.parent_edge[x].unwrap());
                x = self.parent[x].unwrap();
            }
        }
        out
    }

    /// Whether tree edge `t` lies on the tree path between `a` and `b`.
    pub fn path_contains(&self, a: VertexId, b: VertexId, t: EdgeId) -> bool {
        match self.lower.get(t).copied().flatten() {
            Some(x) => self.is_ancestor(x, a) != self.is_ancestor(x, b),
            None => false,
        }
    }

    /// Vertices of the subtree rooted at `x` as a bitmask-free list.
    pub fn subtree(&self, x: VertexId) -> Vec<VertexId> {
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rooting_and_paths() {
        let g = WeightedMultigraph::from_triples(5, &[(0, 1, 1), (1, 2, 1), (1, 3, 1), (3, 4, 1), (0, 4, 1)]).unwrap();
        let t = SpanTree::new(&g, &EdgeSubset::from_ids(5, [0, 1, 2, 3]), 0).unwrap();
        assert_eq!(t.depth, vec![0, 1, 2, 2, 3]);
        assert_eq!(t.lca(2, 4), 1);
        assert_eq!(t.path_edges(2, 4), vec![1, 3, 2]);
        assert!(t.path_contains(0, 4, 3));
        assert!(!t.path_contains(0, 2, 3));
        assert_eq!(t.lower(3).unwrap(), 4);
        assert_eq!(t.lower(4), Err(Error::NotTreeEdge(4)));
        assert!(SpanTree::new(&g, &EdgeSubset::from_ids(5, [0, 1, 2]), 0).is_err());
        assert!(SpanTree::new(&g, &EdgeSubset::from_ids(5, [0, 2, 3, 4]), 0).is_err());
    }
}
