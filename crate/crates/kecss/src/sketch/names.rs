//! Names for min 2-respecting cuts, agreed on by one vertex in each of the
//! two fragments involved.
//!
//! Pairs inside one fragment, or across fragments joined by an interior edge,
//! are named explicitly by their edge ids. Across fragments with no interior
//! edge, the partners of a highway edge form a product `A x B` of highway
//! runs (or a non-highway path times the minimum-cover edges of a highway),
//! and a cut is named by its fragments and its positions in `A` and `B`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::congest::primitives::{self, Combine};
use crate::congest::Simulator;
use crate::cutinfo::{CutInfo, Learned};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId, WeightedMultigraph};
use crate::tree::dist::{scoped_broadcast, GlobalTree, NetTree};
use crate::tree::{CoverValues, LcaLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutName {
    /// Both edge ids, smaller first.
    Pair { a: EdgeId, b: EdgeId },
    /// `i`-th edge of `A` in fragment `f` with the `j`-th edge of `B` in
    /// fragment `g`, both on highways, `f < g`.
    Highway { f: usize, g: usize, i: usize, j: usize },
    /// `i`-th non-highway edge of `A` in fragment `f` with the `j`-th
    /// minimum-cover highway edge of fragment `g`.
    Mixed { f: usize, g: usize, i: usize, j: usize },
}

impl CutName {
    pub fn pair(a: EdgeId, b: EdgeId) -> Self {
        CutName::Pair { a: a.min(b), b: a.max(b) }
    }
}

/// Injective integer encoding of names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NameSpace {
    id_bound: u128,
    frags: u128,
    n: u128,
}

impl NameSpace {
    pub fn new(id_bound: usize, frags: usize, n: usize) -> Self {
        NameSpace { id_bound: id_bound.max(1) as u128, frags: frags.max(1) as u128, n: n.max(1) as u128 }
    }

    fn block(&self) -> u128 {
        self.frags * self.frags * self.n * self.n
    }

    pub fn size(&self) -> u128 {
        self.id_bound * self.id_bound + 2 * self.block()
    }

    pub fn encode(&self, name: &CutName) -> u64 {
        let pairs = self.id_bound * self.id_bound;
        let inner = |f: usize, g: usize, i: usize, j: usize| {
            debug_assert!(i >= 1 && j >= 1);
            ((f as u128 * self.frags + g as u128) * self.n + (i - 1) as u128) * self.n + (j - 1) as u128
        };
        let x = match *name {
            CutName::Pair { a, b } => a as u128 * self.id_bound + b as u128,
            CutName::Highway { f, g, i, j } => pairs + inner(f, g, i, j),
            CutName::Mixed { f, g, i, j } => pairs + self.block() + inner(f, g, i, j),
        };
        debug_assert!(x < self.size());
        x as u64
    }
}

/// Which vertex holds which names, per tree edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameAssignment {
    pub held: BTreeMap<VertexId, Vec<(EdgeId, CutName)>>,
    pub rounds: u64,
}

impl NameAssignment {
    fn add(&mut self, v: VertexId, t: EdgeId, name: CutName) {
        self.held.entry(v).or_default().push((t, name));
    }

    /// `(holder, tree edge, name)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (VertexId, EdgeId, CutName)> + '_ {
        self.held.iter().flat_map(|(&v, list)| list.iter().map(move |&(t, n)| (v, t, n)))
    }

    /// Names per tree edge.
    pub fn by_edge(&self) -> BTreeMap<EdgeId, Vec<CutName>> {
        let mut out: BTreeMap<EdgeId, Vec<CutName>> = BTreeMap::new();
        for (_, t, n) in self.entries() {
            out.entry(t).or_default().push(n);
        }
        out
    }

    /// The pair of tree edges behind every name; fails unless each name is
    /// held for exactly two distinct edges, once each.
    pub fn resolve(&self) -> Result<BTreeMap<CutName, (EdgeId, EdgeId)>> {
        let mut sides: BTreeMap<CutName, Vec<EdgeId>> = BTreeMap::new();
        for (_, t, n) in self.entries() {
            sides.entry(n).or_default().push(t);
        }
        sides
            .into_iter()
            .map(|(n, ts)| match ts.as_slice() {
                &[a, b] if a != b => Ok((n, (a.min(b), a.max(b)))),
                _ => Err(Error::InvalidParams(format!("name {n:?} held for edges {ts:?}"))),
            })
            .collect()
    }
}

fn bits_for(x: u64) -> u32 {
    u64::BITS - x.max(1).leading_zeros()
}

fn on_highway(x: &LcaLabel) -> bool {
    x.anchor_depth as usize == x.depth()
}

/// A tree edge as its fragment knows it.
#[derive(Clone, Debug)]
struct Entry {
    cov: u64,
    x: LcaLabel,
    info: CutInfo,
}

impl Entry {
    fn words(&self) -> Vec<u64> {
        let l = self.x.to_words();
        let mut w = vec![self.cov, l.len() as u64];
        w.extend(l);
        w.extend(self.info.to_words());
        w
    }

    /// Parses one entry, returning it and the number of words used.
    fn from_words(w: &[u64]) -> (Self, usize) {
        let len = w[1] as usize;
        let x = LcaLabel::from_words(&w[2..2 + len]);
        let (info, used) = CutInfo::from_words(&w[2 + len..]);
        (Entry { cov: w[0], x, info }, 2 + len + used)
    }

    fn t(&self) -> EdgeId {
        self.info.owner
    }
}

/// Whether `{a, b}` is a min 2-respecting cut, asking both sides.
fn is_cut(a: &Entry, b: &Entry) -> Result<bool> {
    let ab = a.info.decode(&b.x, b.cov);
    if ab != b.info.decode(&a.x, a.cov) {
        return Err(Error::InvalidParams(format!("CutInfo of edges {} and {} disagree", a.t(), b.t())));
    }
    Ok(ab)
}

/// Names every min 2-respecting cut of the tree of `net`, given the outcome
/// of CutInfo learning.
#[allow(clippy::too_many_arguments)]
pub fn assign_cut_names(
    sim: &mut Simulator,
    global: &GlobalTree,
    net: &NetTree,
    h: &WeightedMultigraph,
    cov: &CoverValues,
    learned: &Learned,
    k: u64,
) -> Result<NameAssignment> {
    let before = sim.trace().rounds;
    let mut out = NameAssignment::default();
    if k < 2 {
        return Ok(out);
    }
    let tree = net.tree;
    let scheme = &net.scheme;
    let n = tree.n();
    let nf = net.decomp.len();
    let wb = sim.word_bits();
    let vbits = wb.max(bits_for(h.id_bound().max(n).max(h.m() + 2 * k as usize) as u64));
    let root = |f: usize| net.frag_overlay.root(f).expect("fragment overlay root");
    let linked = |f: usize, g: usize| f == g || learned.links[f].contains_key(&g);

    // Every fragment learns its edges with cover values and CutInfo.
    let mut items = Vec::new();
    for (&t, info) in &learned.info {
        let u = tree.lower(t)?;
        let f = net.decomp.fragment_of_edge(t).expect("tree edge in a fragment");
        items.push((u, f, Entry { cov: cov.get(t), x: scheme.label(u).clone(), info: info.clone() }.words()));
    }
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "names: fragment cutinfo")?;
    let entries: Vec<Vec<Entry>> =
        (0..nf).map(|f| got.get(&f).into_iter().flatten().map(|w| Entry::from_words(w).0).collect()).collect();

    // Pairs inside one fragment, named at its root.
    for (f, es) in entries.iter().enumerate() {
        for (ia, a) in es.iter().enumerate() {
            for b in &es[ia + 1..] {
                if is_cut(a, b)? {
                    let name = CutName::pair(a.t(), b.t());
                    out.add(root(f), a.t(), name);
                    out.add(root(f), b.t(), name);
                }
            }
        }
    }

    // Pairs across an interior edge, named at its endpoints.
    let mut sends = Vec::new();
    for (f, links) in learned.links.iter().enumerate() {
        let mut w = Vec::new();
        for e in &entries[f] {
            let ew = e.words();
            w.push(ew.len() as u64);
            w.extend(ew);
        }
        for &id in links.values() {
            let edge = h.edge(id);
            let x = if scheme.label(edge.u).frag == Some(f as u32) { edge.u } else { edge.v };
            sends.push((x, id, w.clone()));
        }
    }
    let got = primitives::exchange(sim, &sends, vbits, "names: cutinfo across interior edges")?;
    for (&(y, _), w) in &got {
        let g = scheme.label(y).frag.expect("link endpoint inside a fragment") as usize;
        let mut at = 0;
        while at < w.len() {
            let len = w[at] as usize;
            let (b, _) = Entry::from_words(&w[at + 1..at + 1 + len]);
            at += 1 + len;
            for a in &entries[g] {
                if is_cut(a, &b)? {
                    out.add(y, a.t(), CutName::pair(a.t(), b.t()));
                }
            }
        }
    }

    // Positions in the sets A and B, counted from the bottom of each fragment.
    let (hw_min, nh_a, min_cov) = (0, nf, 2 * nf);
    let frag_info = |t: EdgeId| &learned.frag_info[&t];
    let counts = primitives::convergecast(
        sim,
        &net.frag_overlay,
        2 * nf + 1,
        bits_for(n as u64),
        Combine::Sum,
        |v, f| {
            let mut acc = vec![0u64; 2 * nf + 1];
            let lv = scheme.label(v);
            let Some(t) = tree.parent_edge[v] else { return acc };
            if lv.frag != Some(f as u32) {
                return acc;
            }
            let fi = frag_info(t);
            let hw = on_highway(lv);
            for g in (0..nf).filter(|&g| !linked(f, g)) {
                let (all, high) = fi[g];
                if hw && high > 0 {
                    acc[hw_min + g] = 1;
                }
                if !hw && all > 0 {
                    acc[nh_a + g] = 1;
                }
            }
            let (c, cnt) = learned.highway_min[f];
            if hw && cnt > 0 && cov.get(t) == c {
                acc[min_cov] = 1;
            }
            acc
        },
        "names: set positions",
    )?;

    // Sizes of the non-highway sets, announced globally.
    let items: Vec<_> = (0..nf)
        .flat_map(|f| {
            let tot = &counts.values[root(f)][&f];
            (0..nf).filter(|&g| tot[nh_a + g] > 0).map(move |g| (root(f), vec![f as u64, g as u64, tot[nh_a + g]]))
        })
        .collect();
    let mixed: BTreeMap<(usize, usize), u64> =
        global.broadcast(sim, &items, vbits, "names: non-highway set sizes")?.iter().map(|w| ((w[0] as usize, w[1] as usize), w[2])).collect();

    // Owners of edges with partners in unlinked fragments name their cuts.
    for &t in learned.info.keys() {
        let u = tree.lower(t)?;
        let f = net.decomp.fragment_of_edge(t).unwrap();
        let lu = scheme.label(u);
        let pos = &counts.values[u][&f];
        let fi = frag_info(t);
        for g in (0..nf).filter(|&g| !linked(f, g)) {
            let (all, high) = fi[g];
            if on_highway(lu) {
                for other in 1..=high as usize {
                    let me = pos[hw_min + g] as usize;
                    let name = if f < g {
                        CutName::Highway { f, g, i: me, j: other }
                    } else {
                        CutName::Highway { f: g, g: f, i: other, j: me }
                    };
                    out.add(u, t, name);
                }
                let (c, cnt) = learned.highway_min[f];
                let in_b = cnt > 0 && cov.get(t) == c;
                let expect = if in_b { mixed.get(&(g, f)).copied().unwrap_or(0) } else { 0 };
                if all - high != expect {
                    return Err(Error::InvalidParams(format!(
                        "edge {t}: {} non-highway partners in fragment {g}, announced {expect}",
                        all - high
                    )));
                }
                for i in 1..=expect as usize {
                    out.add(u, t, CutName::Mixed { f: g, g: f, i, j: pos[min_cov] as usize });
                }
            } else if all > 0 {
                let (_, cnt) = learned.highway_min[g];
                if all != high || all != cnt {
                    return Err(Error::InvalidParams(format!(
                        "non-highway edge {t}: {all} partners in fragment {g}, {high} on its highway, {cnt} of minimum cover"
                    )));
                }
                for j in 1..=cnt as usize {
                    out.add(u, t, CutName::Mixed { f, g, i: pos[nh_a + g] as usize, j });
                }
            }
        }
    }
    out.rounds = sim.trace().rounds - before;
    Ok(out)
}

/// Min 2-respecting cuts with two edges, from the exact cover table.
pub fn reference_names(table: &crate::respect::CoverTable, k: u64) -> BTreeSet<(EdgeId, EdgeId)> {
    table.min_respecting(k).into_iter().filter_map(|c| c.t_prime.map(|b| (c.t, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::{Budget, SimConfig};
    use crate::cutinfo::tests::kconnected_multigraph;
    use crate::cutinfo::{candidate_paths, learn_cutinfo, PathProvider};
    use crate::respect::{build_packing, CoverTable, PackingMode};

    /// Learns CutInfo and names on a packing tree of `g`, then checks the
    /// names against the exact cover table.
    pub(crate) fn check(g: &WeightedMultigraph, k: u64, target: usize, seed: u64) -> BTreeMap<CutName, (EdgeId, EdgeId)> {
        let packing = build_packing(g, PackingMode::Faithful, seed, Some(1)).unwrap();
        let tree = &packing.trees[0];
        let table = CoverTable::new(g, tree);
        let cfg = SimConfig { budget: Budget::Words(8), ..SimConfig::default() };
        let mut sim = Simulator::new(g, cfg, seed);
        let global = GlobalTree::build(&mut sim, 0).unwrap();
        let net = NetTree::setup(&mut sim, &global, g, tree, target).unwrap();
        let cov = net.cover_values(&mut sim, &global, g).unwrap();
        let paths = candidate_paths(PathProvider::Oracle, tree, &table, k).unwrap();
        let learned = learn_cutinfo(&mut sim, &global, &net, g, &cov, k, &paths).unwrap();
        let names = assign_cut_names(&mut sim, &global, &net, g, &cov, &learned, k).unwrap();
        assert!(sim.trace().bandwidth_ok());
        let resolved = names.resolve().unwrap();
        let pairs: BTreeSet<_> = resolved.values().copied().collect();
        assert_eq!(pairs.len(), resolved.len(), "two names for one cut");
        assert_eq!(pairs, reference_names(&table, k));
        // One holder per side, inside that side's fragment.
        let mut holders: BTreeMap<(CutName, EdgeId), Vec<VertexId>> = BTreeMap::new();
        for (v, t, n) in names.entries() {
            holders.entry((n, t)).or_default().push(v);
        }
        for ((_, t), vs) in holders {
            assert_eq!(vs.len(), 1);
            let f = net.decomp.fragment_of_edge(t).unwrap();
            assert!(net.frag_overlay.views(vs[0]).iter().any(|view| view.scope == f));
        }
        resolved
    }

    #[test]
    fn single_fragment_names_are_pairs() {
        let g = kconnected_multigraph(10, 2, 3, 1);
        let r = check(&g, 2, 100, 0);
        assert!(!r.is_empty());
        assert!(r.keys().all(|n| matches!(n, CutName::Pair { .. })));
    }

    #[test]
    fn cycle_with_small_fragments_uses_all_cases() {
        let g = WeightedMultigraph::from_triples(16, &(0..16).map(|i| (i, (i + 1) % 16, 1)).collect::<Vec<_>>()).unwrap();
        let r = check(&g, 2, 3, 0);
        assert_eq!(r.len(), 15 * 14 / 2);
        assert!(r.keys().any(|n| matches!(n, CutName::Highway { .. })));
    }

    #[test]
    fn random_multi_fragment_instances() {
        let mut kinds = std::collections::HashSet::new();
        for seed in 0..8 {
            for k in [2, 3] {
                let g = kconnected_multigraph(40, k as usize, 6, seed);
                for n in check(&g, k, 6, seed).keys() {
                    kinds.insert(std::mem::discriminant(n));
                }
            }
        }
        assert_eq!(kinds.len(), 3);
    }

    #[test]
    fn encoding_is_injective() {
        let ns = NameSpace::new(20, 3, 5);
        let mut seen = BTreeSet::new();
        let mut all = Vec::new();
        for a in 0..20 {
            for b in a + 1..20 {
                all.push(CutName::pair(a, b));
            }
        }
        for f in 0..3 {
            for g in 0..3 {
                for i in 1..=5 {
                    for j in 1..=5 {
                        all.push(CutName::Highway { f, g, i, j });
                        all.push(CutName::Mixed { f, g, i, j });
                    }
                }
            }
        }
        for n in &all {
            let x = ns.encode(n);
            assert!((x as u128) < ns.size());
            assert!(seen.insert(x));
        }
    }
}
