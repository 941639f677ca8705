//! Simulated versions of the tree computations. Results are assembled only
//! from what the primitives deliver to each node.

use std::collections::{BTreeMap, HashMap};

use super::cover::CoverValues;
use super::fragments::FragmentDecomp;
use super::labels::{LabelScheme, LcaLabel};
use super::span::SpanTree;
use crate::congest::primitives::{self, Arc, BfsTree, Combine, Overlay};
use crate::congest::{Message, Simulator};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId, WeightedMultigraph};

/// BFS tree of the whole network used for global broadcast and aggregation.
pub struct GlobalTree {
    pub bfs: BfsTree,
    pub overlay: Overlay,
}

impl GlobalTree {
    pub fn build(sim: &mut Simulator, root: VertexId) -> Result<Self> {
        let bfs = primitives::bfs_tree(sim, root, "bfs")?;
        let overlay = Overlay::from_parents(sim, 0, root, &bfs.parent_edge)?;
        Ok(GlobalTree { bfs, overlay })
    }

    /// Broadcasts `items` (origin, fields of `field_bits` each) to every node.
    /// Items wider than one message are split and reassembled.
    pub fn broadcast(
        &self,
        sim: &mut Simulator,
        items: &[(VertexId, Vec<u64>)],
        field_bits: u32,
        phase: &str,
    ) -> Result<Vec<Vec<u64>>> {
        let tagged: Vec<(VertexId, usize, Vec<u64>)> = items.iter().map(|(v, f)| (*v, 0, f.clone())).collect();
        let mut out = scoped_broadcast(sim, &self.overlay, &tagged, field_bits, phase)?;
        Ok(out.remove(&0).unwrap_or_default())
    }

    /// Global OR of one bit per node: a convergecast followed by the root's
    /// broadcast of the result.
    pub fn any<F>(&self, sim: &mut Simulator, flag: F, phase: &str) -> Result<bool>
    where
        F: Fn(VertexId) -> bool,
    {
        let cc = primitives::convergecast(sim, &self.overlay, 1, 1, Combine::Max, |v, _| vec![u64::from(flag(v))], phase)?;
        let root = self.bfs.root;
        let got = self.broadcast(sim, &[(root, vec![cc.values[root][&0][0]])], 1, phase)?;
        Ok(got[0][0] == 1)
    }
}

/// Broadcasts variable-length items within their scopes, splitting each into
/// messages with an (item, chunk) header. Checks that every member of a scope
/// received every chunk and returns each scope's items in input order.
pub fn scoped_broadcast(
    sim: &mut Simulator,
    overlay: &Overlay,
    items: &[(VertexId, usize, Vec<u64>)],
    field_bits: u32,
    phase: &str,
) -> Result<BTreeMap<usize, Vec<Vec<u64>>>> {
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, s, _) in items {
        *count.entry(*s).or_default() += 1;
    }
    let width = |x: u64| (u64::BITS - x.leading_zeros()).max(1) as u64;
    let idx_bits = width(count.values().max().map_or(0, |&c| c as u64 - 1));
    let chunk_bits = width(items.iter().map(|(_, _, f)| f.len() as u64).max().unwrap_or(0));
    let header = idx_bits + chunk_bits;
    let per = chunk_fields(sim, field_bits, header)?;
    let mut next: BTreeMap<usize, u64> = BTreeMap::new();
    let mut tagged = Vec::new();
    for (v, scope, fields) in items {
        let slot = next.entry(*scope).or_default();
        let i = *slot;
        *slot += 1;
        let mut chunks: Vec<&[u64]> = fields.chunks(per).collect();
        if chunks.is_empty() {
            chunks.push(&[]);
        }
        for (j, c) in chunks.into_iter().enumerate() {
            let mut f = vec![i, j as u64];
            f.extend_from_slice(c);
            tagged.push((*v, *scope, Message::new(f, header + c.len() as u64 * field_bits as u64)));
        }
    }
    let mut want: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, s, _) in &tagged {
        *want.entry(*s).or_default() += 1;
    }
    let out = primitives::broadcast(sim, overlay, &tagged, phase)?;
    for v in 0..sim.graph().n() {
        for view in overlay.views(v) {
            let w = want.get(&view.scope).copied().unwrap_or(0);
            let got = out.at(v, view.scope).map_or(0, |s| s.len());
            if got != w {
                return Err(Error::NotATree(format!("node {v} received {got} of {w} chunks in scope {}", view.scope)));
            }
        }
    }
    let mut res = BTreeMap::new();
    for (&scope, &c) in &count {
        let root = overlay.root(scope).ok_or_else(|| Error::NotATree(format!("scope {scope} has no root")))?;
        res.insert(scope, reassemble(out.at(root, scope).into_iter().flatten(), c));
    }
    Ok(res)
}

fn reassemble<'a>(msgs: impl Iterator<Item = &'a Message>, count: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); count];
    let mut parts: BTreeMap<(u64, u64), &[u64]> = BTreeMap::new();
    for m in msgs {
        parts.insert((m.fields[0], m.fields[1]), &m.fields[2..]);
    }
    for ((i, _), f) in parts {
        out[i as usize].extend_from_slice(f);
    }
    out
}

/// Data fields per message after a header of `header` bits.
fn chunk_fields(sim: &Simulator, field_bits: u32, header: u64) -> Result<usize> {
    let budget_bits = sim.config().budget.bits(sim.word_bits());
    let room = budget_bits.saturating_sub(header);
    if (field_bits as u64) > room {
        return Err(Error::ValueTooWide { bits: field_bits as u64 + header, budget_bits });
    }
    Ok(((room / field_bits.max(1) as u64).min(1 << 16) as usize).max(1))
}

/// What every node knows about a fragment after the skeleton broadcast.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonEntry {
    pub id: usize,
    pub parent: Option<usize>,
    pub root_depth: usize,
    pub bottom: VertexId,
    pub bottom_depth: usize,
    pub root_label: LcaLabel,
    pub bottom_label: LcaLabel,
}

/// A spanning tree of the subgraph laid out in the network, with its
/// fragments, labels and the skeleton every node has received.
pub struct NetTree<'t> {
    pub tree: &'t SpanTree,
    pub decomp: FragmentDecomp,
    pub scheme: LabelScheme,
    pub frag_overlay: Overlay,
    pub skeleton: Vec<SkeletonEntry>,
    /// Label of the far endpoint, as received over each subgraph edge.
    pub far_label: HashMap<(VertexId, EdgeId), LcaLabel>,
}

impl<'t> NetTree<'t> {
    /// Builds fragments and labels (centrally, logged as oracle calls),
    /// broadcasts the skeleton, and exchanges labels over every edge of `h`.
    pub fn setup(
        sim: &mut Simulator,
        global: &GlobalTree,
        h: &WeightedMultigraph,
        tree: &'t SpanTree,
        target: usize,
    ) -> Result<Self> {
        let decomp = FragmentDecomp::build(tree, target);
        sim.record_oracle("fragment decomposition");
        let scheme = LabelScheme::build(tree, &decomp);
        sim.record_oracle("lca labels");
        let mut arcs = Vec::new();
        for f in &decomp.fragments {
            for &t in &f.edges {
                let x = tree.lower(t)?;
                arcs.push(Arc { scope: f.id, child: x, parent: tree.parent[x].unwrap(), edge: t });
            }
        }
        let roots: Vec<_> = decomp.fragments.iter().map(|f| (f.id, f.root)).collect();
        let frag_overlay = Overlay::new(sim, &arcs, &roots)?;

        let wb = sim.word_bits();
        let items: Vec<(VertexId, Vec<u64>)> = decomp
            .fragments
            .iter()
            .map(|f| {
                let rl = scheme.label(f.root).to_words();
                let mut w = vec![
                    f.id as u64,
                    f.parent.map_or(0, |p| p as u64 + 1),
                    tree.depth[f.root] as u64,
                    f.bottom as u64,
                    tree.depth[f.bottom] as u64,
                    rl.len() as u64,
                ];
                w.extend(rl);
                w.extend(scheme.label(f.bottom).to_words());
                (f.root, w)
            })
            .collect();
        let got = global.broadcast(sim, &items, wb, "skeleton")?;
        let skeleton: Vec<SkeletonEntry> = got
            .iter()
            .map(|f| {
                let rl = 6 + f[5] as usize;
                SkeletonEntry {
                    id: f[0] as usize,
                    parent: if f[1] == 0 { None } else { Some(f[1] as usize - 1) },
                    root_depth: f[2] as usize,
                    bottom: f[3] as VertexId,
                    bottom_depth: f[4] as usize,
                    root_label: LcaLabel::from_words(&f[6..rl]),
                    bottom_label: LcaLabel::from_words(&f[rl..]),
                }
            })
            .collect();

        let sends: Vec<(VertexId, EdgeId, Vec<u64>)> = h
            .edges()
            .iter()
            .flat_map(|e| [(e.u, e.id, scheme.label(e.u).to_words()), (e.v, e.id, scheme.label(e.v).to_words())])
            .collect();
        let got = primitives::exchange(sim, &sends, wb, "label exchange")?;
        let far_label = got.into_iter().map(|(k, w)| (k, LcaLabel::from_words(&w))).collect();
        Ok(NetTree { tree, decomp, scheme, frag_overlay, skeleton, far_label })
    }

    /// Exchanges labels over the edges of `g` whose far labels are not yet
    /// known, so that path aggregation can run over them.
    pub fn learn_far_labels(&mut self, sim: &mut Simulator, g: &WeightedMultigraph) -> Result<()> {
        let sends: Vec<(VertexId, EdgeId, Vec<u64>)> = g
            .edges()
            .iter()
            .filter(|e| !self.far_label.contains_key(&(e.u, e.id)))
            .flat_map(|e| {
                [(e.u, e.id, self.scheme.label(e.u).to_words()), (e.v, e.id, self.scheme.label(e.v).to_words())]
            })
            .collect();
        if sends.is_empty() {
            return Ok(());
        }
        let got = primitives::exchange(sim, &sends, sim.word_bits(), "label exchange")?;
        self.far_label.extend(got.into_iter().map(|(k, w)| (k, LcaLabel::from_words(&w))));
        Ok(())
    }

    fn own(&self, v: VertexId) -> &LcaLabel {
        self.scheme.label(v)
    }

    /// The label an endpoint sees for the other side of edge `id`.
    pub fn far(&self, v: VertexId, id: EdgeId) -> &LcaLabel {
        &self.far_label[&(v, id)]
    }

    /// Cover values: degree and LCA marks summed per fragment, global marks
    /// at fragment bottoms, and per-fragment totals combined via the skeleton.
    pub fn cover_values(&self, sim: &mut Simulator, global: &GlobalTree, h: &WeightedMultigraph) -> Result<CoverValues> {
        let n = self.tree.n();
        let nf = self.decomp.len();
        let wb = sim.word_bits();
        let fb = 2 * wb;
        let height = self.frag_overlay.max_height();
        let len = 1 + height + 1;
        // Local contributions.
        let mut local: Vec<Vec<u64>> = vec![vec![0; len]; n];
        let mut gmarks: Vec<u64> = vec![0; nf];
        let mut gm_owner: Vec<Vec<u64>> = vec![vec![0; nf]; n];
        for e in h.edges() {
            for x in [e.u, e.v] {
                if self.own(x).frag.is_some() {
                    local[x][0] += 1;
                }
            }
            let (la, lb) = (self.own(e.u), self.far(e.u, e.id));
            let w = self.scheme.lca(la, lb);
            let Some(xw) = w.frag else { continue };
            let owner = [e.u, e.v].into_iter().filter(|&x| self.own(x).frag == Some(xw)).min();
            match owner {
                Some(x) => {
                    let off = w.depth() - self.skeleton[xw as usize].root_depth;
                    local[x][off] += 1;
                }
                None => gm_owner[e.u.min(e.v)][xw as usize] += 1,
            }
        }
        let cc = primitives::convergecast(
            sim,
            &self.frag_overlay,
            len,
            fb,
            Combine::Sum,
            |v, scope| if self.own(v).frag == Some(scope as u32) { local[v].clone() } else { vec![0; len] },
            "cover: fragment sums",
        )?;
        if nf > 0 {
            let g = primitives::convergecast(sim, &global.overlay, nf, fb, Combine::Sum, |v, _| gm_owner[v].clone(), "cover: global marks")?;
            gmarks = g.values[global.bfs.root][&0].clone();
        }
        let items: Vec<(VertexId, Vec<u64>)> =
            gmarks.iter().enumerate().filter(|(_, &c)| c > 0).map(|(f, &c)| (global.bfs.root, vec![f as u64, c])).collect();
        let gm_known = global.broadcast(sim, &items, fb, "cover: global marks down")?;
        let mut gm = vec![0i64; nf];
        for f in gm_known {
            gm[f[0] as usize] = f[1] as i64;
        }
        // Per-fragment totals, computed at each fragment root.
        let sum_lca = |vec: &[u64], from: usize| -> i64 { vec[from..].iter().map(|&x| x as i64).sum() };
        let items: Vec<(VertexId, Vec<u64>)> = self
            .decomp
            .fragments
            .iter()
            .map(|f| {
                let s = &cc.values[f.root][&f.id];
                let total = s[0] as i64 - 2 * sum_lca(s, 1) - 2 * gm[f.id];
                (f.root, vec![f.id as u64, (total < 0) as u64, total.unsigned_abs()])
            })
            .collect();
        let totals = global.broadcast(sim, &items, fb, "cover: fragment totals")?;
        let mut total = vec![0i64; nf];
        for t in totals {
            let mag = t[2] as i64;
            total[t[0] as usize] = if t[1] == 1 { -mag } else { mag };
        }
        // below[F]: totals of all strict fragment-tree descendants.
        let mut below = vec![0i64; nf];
        let mut order: Vec<usize> = (0..nf).collect();
        let mut fdepth = vec![0usize; nf];
        for f in &self.skeleton {
            let mut d = 0;
            let mut x = f.parent;
            while let Some(p) = x {
                d += 1;
                x = self.skeleton[p].parent;
            }
            fdepth[f.id] = d;
        }
        order.sort_by_key(|&f| std::cmp::Reverse(fdepth[f]));
        for &f in &order {
            if let Some(p) = self.skeleton[f].parent {
                below[p] += below[f] + total[f];
            }
        }
        let mut values = vec![0u64; h.id_bound().max(self.tree.edges().iter().max().map_or(0, |m| m + 1))];
        for x in 0..n {
            let Some(t) = self.tree.parent_edge[x] else { continue };
            let label = self.own(x);
            let f = label.frag.unwrap() as usize;
            let s = &cc.values[x][&f];
            let off = label.depth() - self.skeleton[f].root_depth;
            let mut cov = s[0] as i64 - 2 * sum_lca(s, off);
            if label.anchor_depth as usize == label.depth() {
                cov += below[f] - 2 * gm[f];
            }
            values[t] = cov as u64;
        }
        Ok(CoverValues::from_vec(values))
    }

    /// For every edge of `h`, the fold of `value(t)` (a `len`-vector of
    /// `field_bits` fields, combined elementwise) over its tree path. Both
    /// endpoints end up holding the result.
    #[allow(clippy::too_many_arguments)]
    pub fn path_aggregate<F>(
        &self,
        sim: &mut Simulator,
        global: &GlobalTree,
        h: &WeightedMultigraph,
        len: usize,
        field_bits: u32,
        op: Combine,
        value: F,
        phase: &str,
    ) -> Result<Vec<(EdgeId, Vec<u64>)>>
    where
        F: Fn(EdgeId) -> Vec<u64>,
    {
        let wb = sim.word_bits();
        // 1. Fragment-local broadcast of (child, parent) and chunked values.
        let per = chunk_fields(sim, field_bits, 2 * sim.word_bits() as u64)?;
        let mut items = Vec::new();
        for f in &self.decomp.fragments {
            for &t in &f.edges {
                let x = self.tree.lower(t)?;
                let p = self.tree.parent[x].unwrap();
                items.push((x, f.id, Message::new(vec![x as u64, 0, p as u64], 3 * wb as u64)));
                let mut val = value(t);
                val.resize(len, op.identity());
                for (j, c) in val.chunks(per).enumerate() {
                    let mut fields = vec![x as u64, j as u64 + 1];
                    fields.extend_from_slice(c);
                    items.push((x, f.id, Message::new(fields, 2 * wb as u64 + c.len() as u64 * field_bits as u64)));
                }
            }
        }
        let known = primitives::broadcast(sim, &self.frag_overlay, &items, &format!("{phase}: fragment values"))?;
        // Each fragment's view, rebuilt from its root's copy after checking
        // every member received the same number of items.
        let mut views: Vec<FragView> = Vec::with_capacity(self.decomp.len());
        for f in &self.decomp.fragments {
            let root_set = known.at(f.root, f.id).ok_or_else(|| Error::NotATree("fragment root missing".into()))?;
            for &t in &f.edges {
                let x = self.tree.lower(t)?;
                if known.at(x, f.id).map_or(0, |s| s.len()) != root_set.len() {
                    return Err(Error::NotATree(format!("vertex {x} missed fragment items")));
                }
            }
            views.push(FragView::from_items(root_set.iter(), self.skeleton[f.id].root_depth, len, op));
        }
        // 2. Highway folds, broadcast globally from fragment roots.
        let hw_items: Vec<(VertexId, Vec<u64>)> = self
            .decomp
            .fragments
            .iter()
            .map(|f| {
                let v = &views[f.id];
                (f.root, v.fold_up(f.bottom, self.tree.depth[f.root], op, len))
            })
            .collect();
        let hw = global.broadcast(sim, &hw_items, field_bits, &format!("{phase}: highway folds"))?;
        // 3. Each endpoint folds its half, then the halves are exchanged.
        let mut sends = Vec::new();
        let mut halves: HashMap<(VertexId, EdgeId), Vec<u64>> = HashMap::new();
        for e in h.edges() {
            for x in [e.u, e.v] {
                let half = self.half(x, e.id, &views, &hw, op, len);
                sends.push((x, e.id, half.clone()));
                halves.insert((x, e.id), half);
            }
        }
        let got = primitives::exchange(sim, &sends, field_bits, &format!("{phase}: halves"))?;
        let mut out = Vec::with_capacity(h.m());
        for e in h.edges() {
            let mine = &halves[&(e.u, e.id)];
            let theirs = &got[&(e.u, e.id)];
            let total: Vec<u64> = mine.iter().zip(theirs).map(|(&a, &b)| op.apply(a, b)).collect();
            let check: Vec<u64> =
                halves[&(e.v, e.id)].iter().zip(&got[&(e.v, e.id)]).map(|(&a, &b)| op.apply(a, b)).collect();
            debug_assert_eq!(total, check);
            out.push((e.id, total));
        }
        Ok(out)
    }

    /// Fold from `x` up to LCA(x, y) restricted to what `x` can see, following
    /// the split rule shared by both endpoints.
    #[allow(clippy::too_many_arguments)]
    fn half(
        &self,
        x: VertexId,
        id: EdgeId,
        views: &[FragView],
        hw: &[Vec<u64>],
        op: Combine,
        len: usize,
    ) -> Vec<u64> {
        let lx = self.own(x);
        let ly = self.far(x, id);
        let w = self.scheme.lca(lx, ly);
        let wd = w.depth();
        let mut acc = vec![op.identity(); len];
        let Some(fx) = lx.frag else { return acc };
        let fx = fx as usize;
        if w.frag == Some(fx as u32) {
            acc = views[fx].fold_up(x, wd, op, len);
            if ly.frag != w.frag {
                // The other side enters this fragment through its bottom.
                let d = self.skeleton[fx].bottom;
                let seg = views[fx].fold_up(d, wd, op, len);
                combine_into(&mut acc, &seg, op);
            }
            return acc;
        }
        acc = views[fx].fold_up(x, self.skeleton[fx].root_depth, op, len);
        let mut cur = fx;
        while self.skeleton[cur].root_depth != wd {
            let Some(p) = self.skeleton[cur].parent else { break };
            if Some(p as u32) == w.frag {
                break;
            }
            combine_into(&mut acc, &hw[p], op);
            cur = p;
        }
        acc
    }
}

fn combine_into(acc: &mut [u64], other: &[u64], op: Combine) {
    for (a, &b) in acc.iter_mut().zip(other) {
        *a = op.apply(*a, b);
    }
}

/// What a fragment member knows after the fragment-local broadcast.
struct FragView {
    parent: HashMap<VertexId, VertexId>,
    value: HashMap<VertexId, Vec<u64>>,
    /// Absolute depths, offset by the fragment root's depth from the skeleton.
    depth: HashMap<VertexId, usize>,
}

impl FragView {
    fn from_items<'a>(items: impl Iterator<Item = &'a Message>, root_depth: usize, len: usize, op: Combine) -> Self {
        let mut parent = HashMap::new();
        let mut chunks: BTreeMap<(VertexId, u64), Vec<u64>> = BTreeMap::new();
        for m in items {
            let x = m.fields[0] as VertexId;
            if m.fields[1] == 0 {
                parent.insert(x, m.fields[2] as VertexId);
            } else {
                chunks.insert((x, m.fields[1]), m.fields[2..].to_vec());
            }
        }
        let mut value: HashMap<VertexId, Vec<u64>> = HashMap::new();
        for ((x, _), c) in chunks {
            value.entry(x).or_default().extend(c);
        }
        for v in value.values_mut() {
            v.resize(len, op.identity());
        }
        let mut depth = HashMap::new();
        if let Some(r) = parent.values().copied().find(|p| !parent.contains_key(p)) {
            depth.insert(r, root_depth);
        }
        let keys: Vec<VertexId> = parent.keys().copied().collect();
        for x in keys {
            let mut chain = vec![x];
            let mut y = x;
            while !depth.contains_key(&y) {
                y = parent[&y];
                chain.push(y);
            }
            let mut d = depth[&y];
            for &z in chain.iter().rev().skip(1) {
                d += 1;
                depth.insert(z, d);
            }
        }
        FragView { parent, value, depth }
    }

    /// Fold of values from `x` up to its ancestor at depth `to`.
    fn fold_up(&self, x: VertexId, to: usize, op: Combine, len: usize) -> Vec<u64> {
        let mut acc = vec![op.identity(); len];
        let mut y = x;
        while self.depth.get(&y).is_some_and(|&d| d > to) {
            combine_into(&mut acc, &self.value[&y], op);
            y = self.parent[&y];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::{Budget, SimConfig};
    use crate::graph::EdgeSubset;
    use crate::tree::{cover_values, path_aggregate_naive};
    use rand::{Rng, SeedableRng};

    fn random_graph(n: usize, extra: usize, seed: u64) -> WeightedMultigraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t: Vec<_> = (1..n).map(|v| (rng.random_range(0..v), v, 1)).collect();
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let v = (u + rng.random_range(1..n)) % n;
            t.push((u, v, 1));
        }
        WeightedMultigraph::from_triples(n, &t).unwrap()
    }

    fn sim(g: &WeightedMultigraph) -> Simulator<'_> {
        Simulator::new(g, SimConfig { budget: Budget::Words(4), ..SimConfig::default() }, 7)
    }

    #[test]
    fn distributed_cover_and_paths_match_central() {
        for seed in 0..5 {
            let n = 40;
            let g = random_graph(n, 50, seed);
            let tree = SpanTree::new(&g, &EdgeSubset::from_ids(g.id_bound(), 0..n - 1), (seed as usize * 7) % n).unwrap();
            for target in [2, 4, 7] {
                let mut s = sim(&g);
                let global = GlobalTree::build(&mut s, 0).unwrap();
                let nt = NetTree::setup(&mut s, &global, &g, &tree, target).unwrap();
                let cov = nt.cover_values(&mut s, &global, &g).unwrap();
                let central = cover_values(&g, &tree);
                for t in tree.edge_ids() {
                    assert_eq!(cov.get(t), central.get(t), "seed={seed} target={target} t={t}");
                }
                for op in [Combine::Xor, Combine::Sum, Combine::Min, Combine::Max] {
                    let val = |t: EdgeId| (t as u64 * 2654435761) % 1000;
                    let got = nt
                        .path_aggregate(&mut s, &global, &g, 3, 12, op, |t| vec![val(t), val(t) % 7, 1], "agg")
                        .unwrap();
                    let want = path_aggregate_naive(&g, &tree, op, val);
                    let ones = path_aggregate_naive(&g, &tree, op, |_| 1);
                    for ((id, v), ((wid, w), (_, o))) in got.iter().zip(want.iter().zip(&ones)) {
                        assert_eq!(id, wid);
                        assert_eq!(v[0], *w, "op={op:?} seed={seed} target={target} edge={id}");
                        assert_eq!(v[2], *o);
                    }
                }
                assert!(s.trace().bandwidth_ok());
            }
        }
    }

    #[test]
    fn too_wide_fields_are_rejected() {
        let g = random_graph(10, 5, 1);
        let tree = SpanTree::new(&g, &EdgeSubset::from_ids(g.id_bound(), 0..9), 0).unwrap();
        let mut s = sim(&g);
        let global = GlobalTree::build(&mut s, 0).unwrap();
        let nt = NetTree::setup(&mut s, &global, &g, &tree, 3).unwrap();
        let err = nt.path_aggregate(&mut s, &global, &g, 1, 64, Combine::Xor, |_| vec![1], "wide");
        assert!(matches!(err, Err(Error::ValueTooWide { .. })));
    }
}
