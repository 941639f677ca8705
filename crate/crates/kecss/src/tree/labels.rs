use std::collections::HashMap;

use serde::Serialize;

use super::fragments::FragmentDecomp;
use super::span::SpanTree;
use crate::congest::word_bits;
use crate::graph::VertexId;

/// One heavy-path step of a root-to-vertex route: the path (named by its head
/// vertex), the head's depth, and the position along the path where the
/// route leaves it (or ends).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathStep {
    pub head: u32,
    pub head_depth: u32,
    pub pos: u32,
}

/// Label of a vertex: heavy-path route, fragment, and anchor depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LcaLabel {
    pub route: Vec<PathStep>,
    /// Fragment of the parent edge; `None` only at the tree root.
    pub frag: Option<u32>,
    /// Depth of the deepest highway vertex on the root path inside `frag`.
    pub anchor_depth: u32,
}

impl LcaLabel {
    pub fn depth(&self) -> usize {
        let last = self.route.last().expect("route is nonempty");
        (last.head_depth + last.pos) as usize
    }

    /// Whether `self` is an ancestor of `other` (or equal).
    pub fn is_ancestor_of(&self, other: &LcaLabel) -> bool {
        let k = self.route.len();
        if other.route.len() < k || self.route[..k - 1] != other.route[..k - 1] {
            return false;
        }
        let (a, b) = (self.route[k - 1], other.route[k - 1]);
        a.head == b.head && a.pos <= b.pos
    }

    /// Route prefix of the ancestor at `depth`.
    pub fn ancestor_route(&self, depth: usize) -> Vec<PathStep> {
        let mut out = Vec::new();
        for s in &self.route {
            if s.head_depth as usize > depth {
                break;
            }
            out.push(*s);
        }
        let last = out.last_mut().expect("depth within route");
        last.pos = depth as u32 - last.head_depth;
        out
    }

    /// Encoded size: three words per route step plus two.
    pub fn bits(&self, n: usize) -> u64 {
        (3 * self.route.len() as u64 + 2) * word_bits(n) as u64
    }

    /// Flattened words for transmission.
    pub fn to_words(&self) -> Vec<u64> {
        let mut w = vec![self.frag.map_or(0, |f| f as u64 + 1), self.anchor_depth as u64];
        for s in &self.route {
            w.extend([s.head as u64, s.head_depth as u64, s.pos as u64]);
        }
        w
    }

    pub fn from_words(w: &[u64]) -> Self {
        let frag = if w[0] == 0 { None } else { Some((w[0] - 1) as u32) };
        let route = w[2..].chunks(3).map(|c| PathStep { head: c[0] as u32, head_depth: c[1] as u32, pos: c[2] as u32 }).collect();
        LcaLabel { route, frag, anchor_depth: w[1] as u32 }
    }
}

/// The globally known part of the scheme: the fragment tree with root and
/// bottom depths. Together with two vertex labels it determines their LCA.
#[derive(Clone, Debug)]
pub struct LabelScheme {
    pub labels: Vec<LcaLabel>,
    frag_parent: Vec<Option<usize>>,
    frag_depth: Vec<usize>,
    root_depth: Vec<usize>,
    bottom_depth: Vec<usize>,
    by_route: HashMap<Vec<PathStep>, VertexId>,
}

impl LabelScheme {
    pub fn build(tree: &SpanTree, decomp: &FragmentDecomp) -> Self {
        let n = tree.n();
        let mut size = vec![1usize; n];
        for &x in tree.order.iter().rev() {
            if let Some(p) = tree.parent[x] {
                size[p] += size[x];
            }
        }
        // Heavy child: largest subtree, ties to the smallest id.
        let heavy: Vec<Option<VertexId>> =
            (0..n).map(|x| tree.children[x].iter().copied().max_by_key(|&c| (size[c], std::cmp::Reverse(c)))).collect();
        let mut route: Vec<Vec<PathStep>> = vec![Vec::new(); n];
        for &x in &tree.order {
            route[x] = match tree.parent[x] {
                None => vec![PathStep { head: x as u32, head_depth: 0, pos: 0 }],
                Some(p) if heavy[p] == Some(x) => {
                    let mut r = route[p].clone();
                    r.last_mut().unwrap().pos += 1;
                    r
                }
                Some(p) => {
                    let mut r = route[p].clone();
                    r.push(PathStep { head: x as u32, head_depth: tree.depth[x] as u32, pos: 0 });
                    r
                }
            };
        }
        let labels: Vec<LcaLabel> = (0..n)
            .map(|x| LcaLabel {
                route: route[x].clone(),
                frag: decomp.vertex_frag[x].map(|f| f as u32),
                anchor_depth: tree.depth[decomp.anchor[x]] as u32,
            })
            .collect();
        let by_route = (0..n).map(|x| (route[x].clone(), x)).collect();
        let nf = decomp.len();
        let mut frag_depth = vec![0; nf];
        for f in &decomp.fragments {
            frag_depth[f.id] = f.parent.map_or(0, |p| frag_depth[p] + 1);
        }
        LabelScheme {
            labels,
            frag_parent: decomp.fragments.iter().map(|f| f.parent).collect(),
            frag_depth,
            root_depth: decomp.fragments.iter().map(|f| tree.depth[f.root]).collect(),
            bottom_depth: decomp.fragments.iter().map(|f| tree.depth[f.bottom]).collect(),
            by_route,
        }
    }

    pub fn label(&self, v: VertexId) -> &LcaLabel {
        &self.labels[v]
    }

    /// Resolves a label to its vertex (a central convenience, not part of the
    /// label-only contract).
    pub fn vertex(&self, l: &LcaLabel) -> VertexId {
        self.by_route[&l.route]
    }

    /// Largest label size in bits.
    pub fn max_bits(&self) -> u64 {
        let n = self.labels.len();
        self.labels.iter().map(|l| l.bits(n)).max().unwrap_or(0)
    }

    fn frag_lca(&self, mut a: usize, mut b: usize) -> Option<usize> {
        while self.frag_depth[a] > self.frag_depth[b] {
            a = self.frag_parent[a]?;
        }
        while self.frag_depth[b] > self.frag_depth[a] {
            b = self.frag_parent[b]?;
        }
        while a != b {
            a = self.frag_parent[a]?;
            b = self.frag_parent[b]?;
        }
        Some(a)
    }

    /// Label of the ancestor of `x` at `depth`, from `x`'s label and the
    /// fragment tree alone.
    pub fn ancestor_at(&self, x: &LcaLabel, depth: usize) -> LcaLabel {
        assert!(depth <= x.depth(), "ancestor below the vertex");
        let route = x.ancestor_route(depth);
        let Some(own) = x.frag else { return LcaLabel { route, frag: None, anchor_depth: 0 } };
        let own = own as usize;
        let mut cur = own;
        while self.root_depth[cur] > depth {
            cur = self.frag_parent[cur].expect("ancestor above the tree root");
        }
        if self.root_depth[cur] == depth {
            let frag = self.frag_parent[cur];
            return LcaLabel { route, frag: frag.map(|p| p as u32), anchor_depth: if frag.is_some() { depth as u32 } else { 0 } };
        }
        let anchor = if cur == own { depth.min(x.anchor_depth as usize) } else { depth };
        LcaLabel { route, frag: Some(cur as u32), anchor_depth: anchor as u32 }
    }

    /// Whether vertex `z` lies on the tree path between `a` and `b`.
    pub fn on_path(&self, a: &LcaLabel, b: &LcaLabel, z: &LcaLabel) -> bool {
        (z.is_ancestor_of(a) || z.is_ancestor_of(b)) && self.lca(a, b).is_ancestor_of(z)
    }

    /// Whether the tree edge with lower endpoint `x` lies on the path
    /// between `a` and `b`.
    pub fn edge_on_path(a: &LcaLabel, b: &LcaLabel, x: &LcaLabel) -> bool {
        x.is_ancestor_of(a) != x.is_ancestor_of(b)
    }

    /// The vertex where the paths between the three vertices meet.
    pub fn median(&self, a: &LcaLabel, b: &LcaLabel, c: &LcaLabel) -> LcaLabel {
        [self.lca(a, b), self.lca(a, c), self.lca(b, c)].into_iter().max_by_key(|l| l.depth()).unwrap()
    }

    /// Number of edges on the path between `a` and `b`.
    pub fn distance(&self, a: &LcaLabel, b: &LcaLabel) -> usize {
        a.depth() + b.depth() - 2 * self.lca(a, b).depth()
    }

    /// The vertex at distance `dist` from `a` on the path towards `b`.
    pub fn walk(&self, a: &LcaLabel, b: &LcaLabel, dist: usize) -> LcaLabel {
        let w = self.lca(a, b);
        let up = a.depth() - w.depth();
        if dist <= up {
            self.ancestor_at(a, a.depth() - dist)
        } else {
            self.ancestor_at(b, w.depth() + (dist - up))
        }
    }

    /// LCA of two vertices computed from their labels and the fragment tree.
    pub fn lca(&self, a: &LcaLabel, b: &LcaLabel) -> LcaLabel {
        if a.is_ancestor_of(b) {
            return a.clone();
        }
        if b.is_ancestor_of(a) {
            return b.clone();
        }
        let (fa, fb) = (a.frag.expect("non-root") as usize, b.frag.expect("non-root") as usize);
        match self.frag_lca(fa, fb) {
            None => self.ancestor_at(a, 0),
            Some(x) if x == fa && x == fb => self.ancestor_at(a, route_lca_depth(&a.route, &b.route)),
            Some(x) if x == fa => self.ancestor_at(a, a.anchor_depth as usize),
            Some(x) if x == fb => self.ancestor_at(b, b.anchor_depth as usize),
            Some(x) => self.ancestor_at(a, self.bottom_depth[x]),
        }
    }

    /// Whether the edge with endpoint labels `(ea, eb)` has tree edge `t`
    /// (endpoint labels `(ta, tb)`) on its tree path.
    pub fn covers(&self, ea: &LcaLabel, eb: &LcaLabel, ta: &LcaLabel, tb: &LcaLabel) -> bool {
        let low = if ta.depth() > tb.depth() { ta } else { tb };
        low.is_ancestor_of(ea) != low.is_ancestor_of(eb)
    }
}

/// Depth of the deepest common vertex of two heavy-path routes.
fn route_lca_depth(a: &[PathStep], b: &[PathStep]) -> usize {
    let mut i = 0;
    while i < a.len() && i < b.len() && a[i] == b[i] {
        i += 1;
    }
    if i == a.len() || i == b.len() {
        let s = a[i - 1];
        return (s.head_depth + s.pos) as usize;
    }
    if a[i].head == b[i].head {
        (a[i].head_depth + a[i].pos.min(b[i].pos)) as usize
    } else {
        let s = a[i - 1];
        (s.head_depth + s.pos) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedMultigraph;
    use rand::{Rng, SeedableRng};

    fn random_tree(n: usize, seed: u64) -> (WeightedMultigraph, SpanTree) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<_> = (1..n).map(|v| (rng.random_range(0..v), v, 1)).collect();
        let g = WeightedMultigraph::from_triples(n, &t).unwrap();
        let tree = SpanTree::new(&g, &g.full_subset(), 0).unwrap();
        (g, tree)
    }

    #[test]
    fn lca_from_labels_matches_ancestor_walk() {
        for seed in 0..6 {
            let (_, tree) = random_tree(60, seed);
            for target in [2, 3, 8] {
                let d = FragmentDecomp::build(&tree, target);
                let s = LabelScheme::build(&tree, &d);
                for u in 0..60 {
                    for v in 0..60 {
                        let l = s.lca(s.label(u), s.label(v));
                        let w = tree.lca(u, v);
                        assert_eq!(&l, s.label(w), "u={u} v={v} seed={seed} target={target}");
                    }
                }
            }
        }
    }

    #[test]
    fn ancestors_and_walks_from_labels() {
        for seed in 0..4 {
            let (_, tree) = random_tree(50, seed + 20);
            for target in [2, 4, 7] {
                let d = FragmentDecomp::build(&tree, target);
                let s = LabelScheme::build(&tree, &d);
                for x in 0..50 {
                    let mut y = x;
                    loop {
                        assert_eq!(&s.ancestor_at(s.label(x), tree.depth[y]), s.label(y), "x={x} y={y}");
                        match tree.parent[y] {
                            Some(p) => y = p,
                            None => break,
                        }
                    }
                }
                for a in (0..50).step_by(3) {
                    for b in (0..50).step_by(5) {
                        let (la, lb) = (s.label(a), s.label(b));
                        let path = tree.path_edges(a, b);
                        assert_eq!(s.distance(la, lb), path.len());
                        let mut verts = vec![a];
                        for i in 1..=path.len() {
                            let v = s.vertex(&s.walk(la, lb, i));
                            assert!(tree.path_edges(a, v).len() == i && tree.path_edges(v, b).len() == path.len() - i);
                            verts.push(v);
                        }
                        for z in 0..50 {
                            assert_eq!(s.on_path(la, lb, s.label(z)), verts.contains(&z));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_cases() {
        let (_, tree) = random_tree(20, 9);
        let d = FragmentDecomp::build_default(&tree);
        let s = LabelScheme::build(&tree, &d);
        assert_eq!(s.lca(s.label(5), s.label(5)), *s.label(5));
        assert_eq!(s.vertex(&s.lca(s.label(0), s.label(19))), 0);
    }

    #[test]
    fn words_round_trip() {
        let (_, tree) = random_tree(30, 2);
        let d = FragmentDecomp::build_default(&tree);
        let s = LabelScheme::build(&tree, &d);
        for l in &s.labels {
            assert_eq!(&LcaLabel::from_words(&l.to_words()), l);
        }
    }
}
