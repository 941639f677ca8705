use std::collections::BTreeSet;

use super::span::SpanTree;
use crate::graph::{EdgeId, VertexId};

/// An edge-disjoint piece of the tree with a root `r`, a unique bottom
/// vertex `d`, and the highway path between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub id: usize,
    pub root: VertexId,
    pub bottom: VertexId,
    /// Whether other fragments hang below `bottom`.
    pub boundary_below: bool,
    /// Parent fragment: the one whose bottom is this fragment's root.
    pub parent: Option<usize>,
    pub edges: Vec<EdgeId>,
    /// Highway edges ordered from `root` down to `bottom`.
    pub highway: Vec<EdgeId>,
}

/// Fragment decomposition of a rooted spanning tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentDecomp {
    pub target: usize,
    pub fragments: Vec<Fragment>,
    /// Fragment of each tree edge, indexed by edge id.
    edge_frag: Vec<Option<usize>>,
    highway: Vec<bool>,
    /// Fragment of each vertex's parent edge; `None` for the tree root.
    pub vertex_frag: Vec<Option<usize>>,
    /// Deepest highway vertex on the vertex's root path inside its fragment.
    pub anchor: Vec<VertexId>,
    depth_of_frag: Vec<usize>,
}

impl FragmentDecomp {
    /// Decomposes `tree` into fragments of fewer than `2 * target` edges.
    pub fn build(tree: &SpanTree, target: usize) -> Self {
        let target = target.max(1);
        let n = tree.n();
        let pieces = bin_pieces(tree, target);
        // Marked vertices: tree root, piece roots, and their branching points.
        let mut marked = vec![false; n];
        marked[tree.root] = true;
        for (r, _) in &pieces {
            marked[*r] = true;
        }
        let mut below = vec![0usize; n];
        for &x in tree.order.iter().rev() {
            let branches = tree.children[x].iter().filter(|&&c| below[c] > 0).count();
            if branches >= 2 {
                marked[x] = true;
            }
            below[x] = usize::from(marked[x] || branches > 0);
        }
        let mut raw: Vec<(VertexId, Vec<EdgeId>)> = Vec::new();
        for (r, edges) in &pieces {
            split_piece(tree, *r, edges, &marked, &mut raw);
        }
        // Deterministic numbering: by root preorder position, then first edge.
        let pos: Vec<usize> = {
            let mut p = vec![0; n];
            for (i, &v) in tree.order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        raw.sort_by_key(|(r, e)| (pos[*r], e.iter().copied().min()));
        let id_bound = tree.edges().iter().max().map_or(0, |m| m + 1);
        let mut edge_frag = vec![None; id_bound];
        let mut fragments = Vec::with_capacity(raw.len());
        for (id, (r, edges)) in raw.into_iter().enumerate() {
            for &e in &edges {
                edge_frag[e] = Some(id);
            }
            let lows: Vec<VertexId> = edges.iter().map(|&e| tree.lower(e).unwrap()).collect();
            let bottom_marked = lows.iter().copied().find(|&x| marked[x]);
            let bottom = bottom_marked.unwrap_or_else(|| {
                *lows.iter().max_by_key(|&&x| (tree.depth[x], std::cmp::Reverse(x))).unwrap()
            });
            let mut highway = Vec::new();
            let mut x = bottom;
            while x != r {
                highway.push(tree.parent_edge[x].unwrap());
                x = tree.parent[x].unwrap();
            }
            highway.reverse();
            let mut edges = edges;
            edges.sort_unstable();
            fragments.push(Fragment {
                id,
                root: r,
                bottom,
                boundary_below: bottom_marked.is_some(),
                parent: None,
                edges,
                highway,
            });
        }
        let mut vertex_frag = vec![None; n];
        for v in 0..n {
            if let Some(e) = tree.parent_edge[v] {
                vertex_frag[v] = edge_frag[e];
            }
        }
        for f in fragments.iter_mut() {
            f.parent = vertex_frag[f.root];
        }
        let mut highway = vec![false; id_bound];
        for f in &fragments {
            for &e in &f.highway {
                highway[e] = true;
            }
        }
        let mut anchor = vec![tree.root; n];
        for &x in &tree.order {
            let Some(fx) = vertex_frag[x] else { continue };
            let pe = tree.parent_edge[x].unwrap();
            let p = tree.parent[x].unwrap();
            anchor[x] = if highway[pe] {
                x
            } else if vertex_frag[p] == Some(fx) {
                anchor[p]
            } else {
                p
            };
        }
        let mut depth_of_frag = vec![0; fragments.len()];
        for f in &fragments {
            depth_of_frag[f.id] = f.parent.map_or(0, |p| depth_of_frag[p] + 1);
        }
        FragmentDecomp { target, fragments, edge_frag, highway, vertex_frag, anchor, depth_of_frag }
    }

    /// Builds with the default target `⌈√n⌉`.
    pub fn build_default(tree: &SpanTree) -> Self {
        Self::build(tree, default_target(tree.n()))
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn fragment_of_edge(&self, t: EdgeId) -> Option<usize> {
        self.edge_frag.get(t).copied().flatten()
    }

    pub fn is_highway(&self, t: EdgeId) -> bool {
        self.highway.get(t).copied().unwrap_or(false)
    }

    /// Whether `v` is `r_F` or `d_F` of fragment `f`, or outside it.
    pub fn is_internal(&self, tree: &SpanTree, f: usize, v: VertexId) -> bool {
        let fr = &self.fragments[f];
        v != fr.root && v != fr.bottom && self.vertex_frag[v] == Some(f) && tree.parent[v].is_some()
    }

    /// Fragments on the way from `f` up to the top of the fragment tree.
    pub fn ancestors(&self, f: usize) -> Vec<usize> {
        let mut out = vec![f];
        let mut x = f;
        while let Some(p) = self.fragments[x].parent {
            out.push(p);
            x = p;
        }
        out
    }

    /// Lowest common ancestor in the fragment tree; `None` for the virtual top.
    pub fn fragment_lca(&self, mut a: usize, mut b: usize) -> Option<usize> {
        while self.depth_of_frag[a] > self.depth_of_frag[b] {
            a = self.fragments[a].parent?;
        }
        while self.depth_of_frag[b] > self.depth_of_frag[a] {
            b = self.fragments[b].parent?;
        }
        while a != b {
            a = self.fragments[a].parent?;
            b = self.fragments[b].parent?;
        }
        Some(a)
    }

    /// Children of each fragment in the fragment tree.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for f in &self.fragments {
            if let Some(p) = f.parent {
                out[p].push(f.id);
            }
        }
        out
    }
}

pub fn default_target(n: usize) -> usize {
    (n as f64).sqrt().ceil().max(1.0) as usize
}

/// Bottom-up greedy binning: child branches of a vertex are packed into bins
/// that close once they reach `target` edges. Returns (root, edges) pieces.
fn bin_pieces(tree: &SpanTree, target: usize) -> Vec<(VertexId, Vec<EdgeId>)> {
    let n = tree.n();
    let mut pending: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    let mut pieces = Vec::new();
    for &x in tree.order.iter().rev() {
        let mut bin: Vec<EdgeId> = Vec::new();
        for &c in &tree.children[x] {
            let mut branch = std::mem::take(&mut pending[c]);
            branch.push(tree.parent_edge[c].unwrap());
            bin.extend(branch);
            if bin.len() >= target {
                pieces.push((x, std::mem::take(&mut bin)));
            }
        }
        if x == tree.root {
            if !bin.is_empty() {
                pieces.push((x, bin));
            }
        } else {
            pending[x] = bin;
        }
    }
    pieces
}

/// Cuts a piece at its marked vertices. Each child branch at a marked vertex
/// that reaches another marked vertex becomes its own fragment; branches that
/// reach none join the first such fragment at the same vertex.
fn split_piece(
    tree: &SpanTree,
    root: VertexId,
    edges: &[EdgeId],
    marked: &[bool],
    out: &mut Vec<(VertexId, Vec<EdgeId>)>,
) {
    let in_piece: BTreeSet<EdgeId> = edges.iter().copied().collect();
    let child_in = |x: VertexId| -> Vec<VertexId> {
        tree.children[x].iter().copied().filter(|&c| in_piece.contains(&tree.parent_edge[c].unwrap())).collect()
    };
    let mut stack = vec![root];
    while let Some(top) = stack.pop() {
        let mut with_mark: Vec<Vec<EdgeId>> = Vec::new();
        let mut free: Vec<EdgeId> = Vec::new();
        for c in child_in(top) {
            // Walk the branch below `top` until marked vertices.
            let mut branch = vec![tree.parent_edge[c].unwrap()];
            let mut hit = false;
            let mut walk = vec![c];
            while let Some(y) = walk.pop() {
                if marked[y] {
                    hit = true;
                    stack.push(y);
                    continue;
                }
                for z in child_in(y) {
                    branch.push(tree.parent_edge[z].unwrap());
                    walk.push(z);
                }
            }
            if hit {
                with_mark.push(branch);
            } else {
                free.extend(branch);
            }
        }
        if with_mark.is_empty() {
            if !free.is_empty() {
                out.push((top, free));
            }
        } else {
            with_mark[0].extend(free);
            for b in with_mark {
                out.push((top, b));
            }
        }
    }
}
