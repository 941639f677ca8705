//! Distributed learning of `CutInfo` and the per-fragment partner counts.
//!
//! Every tree edge `t = (u, p(u))` is owned by `u`. For each candidate path
//! `j`, the owner learns the `k` closest virtual endpoints on both sides of
//! `t` (local k-best inside its fragment, plus edges crossing its whole
//! highway), builds `CutInfo(t, P_j)`, and counts the partners that
//! `CutInfo(t, P_j)` describes in every fragment. The path with the largest
//! total wins.

use std::collections::{BTreeMap, HashMap};

use super::{CandidatePaths, CutInfo, Oriented, PathEnds, Side};
use crate::congest::primitives::{self, Combine};
use crate::congest::{Message, Simulator};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId, WeightedMultigraph};
use crate::tree::dist::{scoped_broadcast, GlobalTree, NetTree};
use crate::tree::{CoverValues, LabelScheme, LcaLabel};

/// What the owners hold after learning.
#[derive(Clone, Debug)]
pub struct Learned {
    /// `CutInfo(t)` for the selected path.
    pub info: BTreeMap<EdgeId, CutInfo>,
    /// The selected path.
    pub path: BTreeMap<EdgeId, PathEnds>,
    /// Per fragment `(partners, partners on the fragment's highway)`.
    pub frag_info: BTreeMap<EdgeId, Vec<(u64, u64)>>,
    /// `CutInfo(t, P)` for every candidate, in candidate order.
    pub candidates: BTreeMap<EdgeId, Vec<CutInfo>>,
    /// Per fragment, the lowest-id edge joining its interior to the interior
    /// of each neighbouring fragment.
    pub links: Vec<BTreeMap<usize, EdgeId>>,
    /// Per fragment, the minimum cover value on its highway and how many
    /// highway edges attain it (`(0, 0)` without a highway).
    pub highway_min: Vec<(u64, u64)>,
    pub rounds: u64,
}

const SIDES: [Side; 2] = [Side::Low, Side::High];

fn side_bit(s: Side) -> u64 {
    match s {
        Side::Low => 0,
        Side::High => 1,
    }
}

fn bits_for(x: u64) -> u32 {
    u64::BITS - x.max(1).leading_zeros()
}

fn push_label(w: &mut Vec<u64>, l: &LcaLabel) {
    let x = l.to_words();
    w.push(x.len() as u64);
    w.extend(x);
}

fn read_label(w: &[u64], at: &mut usize) -> LcaLabel {
    let len = w[*at] as usize;
    let l = LcaLabel::from_words(&w[*at + 1..*at + 1 + len]);
    *at += 1 + len;
    l
}

fn is_highway_lower(x: &LcaLabel) -> bool {
    x.anchor_depth as usize == x.depth()
}

/// One candidate path of one tree edge, as known inside the edge's fragment.
#[derive(Clone, Debug)]
struct Query {
    t: EdgeId,
    j: usize,
    owner: VertexId,
    frag: usize,
    u: LcaLabel,
    pu: LcaLabel,
    pl: LcaLabel,
    ph: LcaLabel,
}

impl Query {
    fn words(&self) -> Vec<u64> {
        let mut w = vec![self.t as u64, self.j as u64, self.owner as u64];
        for l in [&self.u, &self.pu, &self.pl, &self.ph] {
            push_label(&mut w, l);
        }
        w
    }

    fn from_words(frag: usize, w: &[u64]) -> Self {
        let mut at = 3;
        let mut next = || read_label(w, &mut at);
        let (u, pu, pl, ph) = (next(), next(), next(), next());
        Query { t: w[0] as EdgeId, j: w[1] as usize, owner: w[2] as VertexId, frag, u, pu, pl, ph }
    }

    fn group(&self, s: Side) -> u64 {
        2 * self.owner as u64 + side_bit(s)
    }

    fn end(&self, s: Side) -> &LcaLabel {
        match s {
            Side::Low => &self.pl,
            Side::High => &self.ph,
        }
    }
}

/// A fragment's tree edge as every member of the fragment knows it.
#[derive(Clone, Debug)]
struct ViewEdge {
    x: LcaLabel,
    cov: u64,
}

/// Paths of highway edges through fragment boundaries are shared by many
/// owners; the k-best search for them runs once per shared path.
#[derive(Clone, Debug)]
struct Group {
    j: usize,
    id: u64,
    frag: usize,
    side: Side,
    exit: LcaLabel,
    end: LcaLabel,
}

/// Summary of a fragment's highway: minimum cover value, its multiplicity,
/// and the depth range of the edges attaining it.
#[derive(Clone, Copy, Debug, Default)]
struct HighwayMin {
    c: u64,
    n: u64,
    top: usize,
    bottom: usize,
}

/// Subpath of a shared path inside one fragment, as distances from the
/// shared path's exit vertex.
#[derive(Clone, Copy, Debug)]
struct Piece {
    lo: usize,
    hi: usize,
    c: u64,
    n: u64,
    nh: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Route {
    PassThrough,
    Neighbour,
    NoEdgeLast,
    Shared,
}

struct Learner<'a, 't> {
    net: &'a NetTree<'t>,
    nf: usize,
}

impl<'a, 't> Learner<'a, 't> {
    fn scheme(&self) -> &'a LabelScheme {
        &self.net.scheme
    }

    fn root_label(&self, f: usize) -> &'a LcaLabel {
        &self.net.skeleton[f].root_label
    }

    fn bottom_label(&self, f: usize) -> &'a LcaLabel {
        &self.net.skeleton[f].bottom_label
    }

    fn root_vertex(&self, f: usize) -> VertexId {
        self.net.frag_overlay.root(f).expect("fragment overlay root")
    }

    fn internal(&self, f: usize, x: &LcaLabel) -> bool {
        x.frag == Some(f as u32) && x != self.bottom_label(f)
    }

    /// Whether an edge with both endpoints outside fragment `f`'s interior
    /// covers its highway.
    fn crosses_highway(&self, f: usize, a: &LcaLabel, b: &LcaLabel) -> bool {
        let d = self.bottom_label(f);
        !self.internal(f, a) && !self.internal(f, b) && d.is_ancestor_of(a) != d.is_ancestor_of(b)
    }

    fn oriented(&self, q: &Query) -> Result<Oriented<'a>> {
        Oriented::new(self.scheme(), q.t, q.u.clone(), q.pu.clone(), q.pl.clone(), q.ph.clone())
    }

    /// Fragment of the last edge on the path from `a` to `b` (`a != b`).
    fn last_fragment(&self, a: &LcaLabel, b: &LcaLabel) -> Option<usize> {
        let x = if b.is_ancestor_of(a) { self.scheme().ancestor_at(a, b.depth() + 1) } else { b.clone() };
        x.frag.map(|f| f as usize)
    }

    fn pass_through(&self, f: usize, a: &LcaLabel, b: &LcaLabel) -> bool {
        let s = self.scheme();
        s.on_path(a, b, self.root_label(f)) && s.on_path(a, b, self.bottom_label(f))
    }

    /// Whether the side of the path leaves the owner's fragment; only
    /// meaningful for highway edges.
    fn exits(&self, q: &Query, s: Side) -> bool {
        let f = q.frag;
        match s {
            Side::Low => {
                let d = self.bottom_label(f);
                d.is_ancestor_of(&q.pl) && *d != q.pl
            }
            Side::High => {
                let r = self.root_label(f);
                if !self.scheme().on_path(&q.pu, &q.ph, r) || *r == q.ph {
                    return false;
                }
                if !r.is_ancestor_of(&q.ph) {
                    return true;
                }
                let next = self.scheme().ancestor_at(&q.ph, r.depth() + 1);
                next.frag != Some(f as u32)
            }
        }
    }

    fn exit_vertex(&self, f: usize, s: Side) -> &'a LcaLabel {
        match s {
            Side::Low => self.bottom_label(f),
            Side::High => self.root_label(f),
        }
    }

    /// Distance from `t` to the exit vertex of the owner's fragment.
    fn exit_offset(&self, q: &Query, s: Side) -> usize {
        match s {
            Side::Low => self.bottom_label(q.frag).depth() - q.u.depth(),
            Side::High => self.scheme().distance(&q.pu, self.root_label(q.frag)),
        }
    }

    /// Fragments other than the owner's with edges on one side of the path.
    fn visited(&self, q: &Query, s: Side) -> Vec<(usize, bool)> {
        let (a, b) = match s {
            Side::Low => (&q.u, &q.pl),
            Side::High => (&q.pu, &q.ph),
        };
        if a == b {
            return Vec::new();
        }
        let mut out: Vec<(usize, bool)> = (0..self.nf).filter(|&f| f != q.frag && self.pass_through(f, a, b)).map(|f| (f, true)).collect();
        if let Some(last) = self.last_fragment(a, b) {
            if last != q.frag && !out.iter().any(|&(f, _)| f == last) {
                out.push((last, false));
            }
        }
        out
    }

    /// How the partners in fragment `f` are counted, decided from what the
    /// owner's whole fragment knows.
    fn route(&self, q: &Query, info: &CutInfo, s: Side, f: usize, pass: bool, neighbour: bool) -> Result<Route> {
        let segs = match s {
            Side::Low => &info.low,
            Side::High => &info.high,
        };
        let breaks = segs.iter().flat_map(|x| [&x.a, &x.b]).any(|v| self.internal(f, v));
        Ok(if pass && !breaks {
            Route::PassThrough
        } else if neighbour {
            Route::Neighbour
        } else if !is_highway_lower(&q.u) {
            if pass {
                return Err(Error::InvalidParams(format!("edge {} has a breakpoint inside fragment {f}", q.t)));
            }
            Route::NoEdgeLast
        } else {
            Route::Shared
        })
    }
}

/// Runs the learning phases for all tree edges of `net` at once.
#[allow(clippy::too_many_arguments)]
pub fn learn_cutinfo(
    sim: &mut Simulator,
    global: &GlobalTree,
    net: &NetTree,
    h: &WeightedMultigraph,
    cov: &CoverValues,
    k: u64,
    paths: &CandidatePaths,
) -> Result<Learned> {
    let before = sim.trace().rounds;
    let tree = net.tree;
    let scheme = &net.scheme;
    let n = tree.n();
    let wb = sim.word_bits();
    let vbits = wb.max(bits_for(h.id_bound().max(n).max(h.m() + 2 * k as usize) as u64));
    let nf = net.decomp.len();
    let lr = &Learner { net, nf };
    let tree_edges = tree.edge_ids();

    let mut out = Learned {
        info: BTreeMap::new(),
        path: BTreeMap::new(),
        frag_info: BTreeMap::new(),
        candidates: BTreeMap::new(),
        links: vec![BTreeMap::new(); nf],
        highway_min: vec![(0, 0); nf],
        rounds: 0,
    };
    if k < 2 {
        for &t in &tree_edges {
            let u = tree.lower(t)?;
            out.info.insert(t, CutInfo::empty(t));
            out.path.insert(t, PathEnds { low: u, high: tree.parent[u].unwrap() });
            out.frag_info.insert(t, vec![(0, 0); nf]);
            out.candidates.insert(t, vec![CutInfo::empty(t)]);
        }
        return Ok(out);
    }
    sim.record_oracle("candidate paths");

    // Owners announce their candidate paths inside their fragments.
    let mut items = Vec::new();
    for &t in &tree_edges {
        let uv = tree.lower(t)?;
        let list = paths.of(t);
        if list.is_empty() {
            return Err(Error::InvalidParams(format!("no candidate path for tree edge {t}")));
        }
        let f = net.decomp.fragment_of_edge(t).expect("tree edge in a fragment");
        for (j, p) in list.iter().enumerate() {
            let q = Query {
                t,
                j,
                owner: uv,
                frag: f,
                u: scheme.label(uv).clone(),
                pu: net.far(uv, t).clone(),
                pl: scheme.label(p.low).clone(),
                ph: scheme.label(p.high).clone(),
            };
            items.push((uv, f, q.words()));
        }
    }
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "cutinfo queries")?;
    let queries: Vec<Vec<Query>> = (0..nf)
        .map(|f| got.get(&f).map(|v| v.iter().map(|w| Query::from_words(f, w)).collect()).unwrap_or_default())
        .collect();
    let mut oriented: HashMap<(EdgeId, usize), Oriented> = HashMap::new();
    for q in queries.iter().flatten() {
        oriented.insert((q.t, q.j), lr.oriented(q)?);
    }
    let jmax = paths.max_len();
    let idb = bits_for(h.id_bound() as u64);

    // Covering edges with an endpoint inside the owner's fragment.
    let mut local: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    for j in 0..jmax {
        let mut items = Vec::new();
        for x in 0..n {
            let lx = scheme.label(x);
            let Some(f) = lx.frag.map(|f| f as usize) else { continue };
            if !lr.internal(f, lx) {
                continue;
            }
            for q in queries[f].iter().filter(|q| q.j == j) {
                let o = &oriented[&(q.t, q.j)];
                for e in h.incident(x) {
                    let ly = net.far(x, e.id);
                    if !scheme.covers(lx, ly, &q.u, &q.pu) || (lr.internal(f, ly) && !q.u.is_ancestor_of(lx)) {
                        continue;
                    }
                    let ve = o.virtual_endpoints(e.id, lx, ly)?;
                    for (s, v) in [(Side::Low, &ve.low), (Side::High, &ve.high)] {
                        let fields = vec![q.group(s), o.key(s, v) as u64, e.id as u64];
                        items.push((x, f, Message::new(fields, (wb + 1 + wb + idb) as u64)));
                    }
                }
            }
        }
        let best = primitives::kbest_upcast(sim, &net.frag_overlay, k as usize, &items, "cutinfo local k-best")?;
        let items: Vec<_> = best.iter().flat_map(|(&f, ms)| ms.iter().map(move |m| (lr.root_vertex(f), f, m.fields.clone()))).collect();
        let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "cutinfo local k-best")?;
        for w in got.values().flatten() {
            local.entry((j, w[0])).or_default().push(w[1] as usize);
        }
    }

    // Edges crossing a whole highway: counted per fragment.
    let gcc = primitives::convergecast(
        sim,
        &global.overlay,
        nf,
        vbits,
        Combine::Sum,
        |v, _| {
            let mut acc = vec![0u64; nf];
            for e in h.incident(v).filter(|e| v == e.u.min(e.v)) {
                let (a, b) = (scheme.label(v), net.far(v, e.id));
                for (f, c) in acc.iter_mut().enumerate() {
                    if lr.crosses_highway(f, a, b) {
                        *c += 1;
                    }
                }
            }
            acc
        },
        "highway-crossing counts",
    )?;
    let groot = global.bfs.root;
    let totals = gcc.values[groot][&0].clone();
    let items: Vec<_> = totals.iter().enumerate().filter(|(_, &c)| c > 0).map(|(f, &c)| (groot, vec![f as u64, c])).collect();
    let mut crossing = vec![0u64; nf];
    for w in global.broadcast(sim, &items, vbits, "highway-crossing counts")? {
        crossing[w[0] as usize] = w[1];
    }

    // Shared paths leaving a fragment, and the k closest crossing edges on each.
    let mut items = Vec::new();
    for (f, qs) in queries.iter().enumerate() {
        let mut seen: BTreeMap<(usize, u64, Vec<u64>), u64> = BTreeMap::new();
        for q in qs.iter().filter(|q| is_highway_lower(&q.u)) {
            for s in SIDES {
                if lr.exits(q, s) {
                    let g = seen.entry((q.j, side_bit(s), q.end(s).to_words())).or_insert(u64::MAX);
                    *g = (*g).min(q.group(s));
                }
            }
        }
        for ((j, sb, end), id) in seen {
            let mut w = vec![j as u64, id, f as u64, sb];
            w.push(end.len() as u64);
            w.extend(end);
            items.push((lr.root_vertex(f), w));
        }
    }
    let groups: Vec<Group> = global
        .broadcast(sim, &items, vbits, "shared paths")?
        .iter()
        .map(|w| {
            let mut at = 4;
            let side = if w[3] == 0 { Side::Low } else { Side::High };
            let frag = w[2] as usize;
            Group { j: w[0] as usize, id: w[1], frag, side, exit: lr.exit_vertex(frag, side).clone(), end: read_label(w, &mut at) }
        })
        .collect();
    let mut shared: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    for j in 0..jmax {
        let mine: Vec<&Group> = groups.iter().filter(|g| g.j == j).collect();
        if mine.is_empty() {
            continue;
        }
        let mut items = Vec::new();
        for v in 0..n {
            for e in h.incident(v).filter(|e| v == e.u.min(e.v)) {
                let (a, b) = (scheme.label(v), net.far(v, e.id));
                for g in &mine {
                    if !lr.crosses_highway(g.frag, a, b) {
                        continue;
                    }
                    let d = lr.bottom_label(g.frag);
                    let key = match g.side {
                        Side::High => {
                            let y = if d.is_ancestor_of(a) { b } else { a };
                            scheme.distance(&g.exit, &scheme.median(&g.exit, y, &g.end))
                        }
                        Side::Low => {
                            let x = if d.is_ancestor_of(a) { a } else { b };
                            scheme.lca(&g.end, x).depth() - d.depth()
                        }
                    };
                    items.push((v, 0, Message::new(vec![g.id, key as u64, e.id as u64], (wb + 1 + wb + idb) as u64)));
                }
            }
        }
        let best = primitives::kbest_upcast(sim, &global.overlay, k as usize, &items, "shared-path k-best")?;
        let items: Vec<_> = best.values().flatten().map(|m| (groot, m.fields.clone())).collect();
        for w in global.broadcast(sim, &items, vbits, "shared-path k-best")? {
            shared.entry((j, w[0])).or_default().push(w[1] as usize);
        }
    }
    let group_of = |q: &Query, s: Side| -> Option<&Group> {
        groups.iter().find(|g| g.j == q.j && g.frag == q.frag && g.side == s && g.end == *q.end(s))
    };

    // Owners assemble CutInfo(t, P_j).
    let mut infos: HashMap<(EdgeId, usize), CutInfo> = HashMap::new();
    for q in queries.iter().flatten() {
        let o = &oriented[&(q.t, q.j)];
        let mut keys: [Vec<usize>; 2] = Default::default();
        for s in SIDES {
            let ks = &mut keys[side_bit(s) as usize];
            ks.extend(local.get(&(q.j, q.group(s))).into_iter().flatten());
            if is_highway_lower(&q.u) {
                if lr.exits(q, s) {
                    let g = group_of(q, s).expect("shared path announced");
                    let off = lr.exit_offset(q, s);
                    ks.extend(shared.get(&(g.j, g.id)).into_iter().flatten().map(|&x| off + x));
                } else {
                    let v = match s {
                        Side::High => scheme.median(&q.pu, lr.root_label(q.frag), &q.ph),
                        Side::Low => scheme.lca(&q.pl, lr.bottom_label(q.frag)),
                    };
                    let c = crossing[q.frag].min(k) as usize;
                    ks.extend(std::iter::repeat_n(o.key(s, &v), c));
                }
            }
            ks.sort_unstable();
        }
        infos.insert((q.t, q.j), o.cutinfo_from_keys(&keys[0], &keys[1], cov.get(q.t), k as usize));
    }

    // Every fragment learns its tree edges with their cover values.
    let items: Vec<_> = (0..n)
        .filter_map(|x| {
            let t = tree.parent_edge[x]?;
            let f = net.decomp.fragment_of_edge(t)?;
            let mut w = vec![cov.get(t)];
            w.extend(scheme.label(x).to_words());
            Some((x, f, w))
        })
        .collect();
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "fragment view")?;
    let views: Vec<Vec<ViewEdge>> = (0..nf)
        .map(|f| got.get(&f).into_iter().flatten().map(|w| ViewEdge { cov: w[0], x: LcaLabel::from_words(&w[1..]) }).collect())
        .collect();

    // Highway minima, known everywhere.
    let items: Vec<_> = views
        .iter()
        .enumerate()
        .filter_map(|(f, view)| {
            let hw: Vec<&ViewEdge> = view.iter().filter(|e| is_highway_lower(&e.x)).collect();
            let c = hw.iter().map(|e| e.cov).min()?;
            let depths = hw.iter().filter(|e| e.cov == c).map(|e| e.x.depth() as u64);
            let (top, bottom) = (depths.clone().min().unwrap(), depths.max().unwrap());
            let nmin = hw.iter().filter(|e| e.cov == c).count() as u64;
            Some((lr.root_vertex(f), vec![f as u64, c, nmin, top, bottom]))
        })
        .collect();
    let mut hmin = vec![HighwayMin::default(); nf];
    for w in global.broadcast(sim, &items, vbits, "highway minima")? {
        hmin[w[0] as usize] = HighwayMin { c: w[1], n: w[2], top: w[3] as usize, bottom: w[4] as usize };
    }

    // One edge between the interiors of each pair of fragments.
    let id_bound = h.id_bound() as u64;
    let icc = primitives::convergecast(
        sim,
        &net.frag_overlay,
        nf,
        idb + 1,
        Combine::Max,
        |v, scope| {
            let lv = scheme.label(v);
            let mut acc = vec![0u64; nf];
            if lv.frag != Some(scope as u32) || !lr.internal(scope, lv) {
                return acc;
            }
            for e in h.incident(v) {
                let ly = net.far(v, e.id);
                if let Some(g) = ly.frag.map(|g| g as usize) {
                    if g != scope && lr.internal(g, ly) {
                        acc[g] = acc[g].max(id_bound - e.id as u64);
                    }
                }
            }
            acc
        },
        "internal edges",
    )?;
    let items: Vec<_> = (0..nf)
        .flat_map(|f| {
            let r = lr.root_vertex(f);
            icc.values[r][&f].iter().enumerate().filter(|(_, &x)| x > 0).map(move |(g, &x)| (r, f, vec![g as u64, id_bound - x])).collect::<Vec<_>>()
        })
        .collect();
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "internal edges")?;
    let neighbour: Vec<BTreeMap<usize, EdgeId>> =
        (0..nf).map(|f| got.get(&f).into_iter().flatten().map(|w| (w[0] as usize, w[1] as EdgeId)).collect()).collect();

    // Owners share CutInfo(t, P_j) inside their fragments.
    let items: Vec<_> = queries
        .iter()
        .flatten()
        .map(|q| {
            let mut w = vec![q.j as u64];
            w.extend(infos[&(q.t, q.j)].to_words());
            (q.owner, q.frag, w)
        })
        .collect();
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "cutinfo in fragment")?;
    let mut frag_infos: HashMap<(EdgeId, usize), CutInfo> = HashMap::new();
    for w in got.values().flatten() {
        let (info, _) = CutInfo::from_words(&w[1..]);
        frag_infos.insert((info.owner, w[0] as usize), info);
    }
    let known = |q: &Query| &frag_infos[&(q.t, q.j)];

    // Counting over a neighbouring fragment's interior edge.
    let mut sends: BTreeMap<(VertexId, EdgeId), Vec<u64>> = BTreeMap::new();
    for (f, qs) in queries.iter().enumerate() {
        for (&g, &e) in &neighbour[f] {
            let edge = h.edge(e);
            let x = if scheme.label(edge.u).frag == Some(f as u32) && lr.internal(f, scheme.label(edge.u)) { edge.u } else { edge.v };
            let mut w = Vec::new();
            for q in qs {
                let info = known(q);
                for s in SIDES {
                    let Some(&(_, pass)) = lr.visited(q, s).iter().find(|(ff, _)| *ff == g) else { continue };
                    if lr.route(q, info, s, g, pass, true)? == Route::Neighbour {
                        let iw = info.to_words();
                        w.extend([q.j as u64, iw.len() as u64]);
                        w.extend(iw);
                        break;
                    }
                }
            }
            if !w.is_empty() {
                sends.insert((x, e), w);
            }
        }
    }
    let sends_v: Vec<_> = sends.iter().map(|(&(x, e), w)| (x, e, w.clone())).collect();
    let got = primitives::exchange(sim, &sends_v, vbits, "cutinfo to neighbour")?;
    let mut replies = Vec::new();
    for (&(y, e), w) in &got {
        let g = scheme.label(y).frag.expect("receiver is internal") as usize;
        let mut at = 0;
        let mut r = Vec::new();
        while at < w.len() {
            let (j, len) = (w[at], w[at + 1] as usize);
            let (info, _) = CutInfo::from_words(&w[at + 2..at + 2 + len]);
            at += 2 + len;
            let (mut all, mut hw) = (0u64, 0u64);
            for ve in views[g].iter().filter(|ve| info.decode(&ve.x, ve.cov)) {
                all += 1;
                hw += u64::from(is_highway_lower(&ve.x));
            }
            r.extend([info.owner as u64, j, all, hw]);
        }
        replies.push((y, e, r));
    }
    let got = primitives::exchange(sim, &replies, vbits, "counts from neighbour")?;
    let mut items = Vec::new();
    for (&(x, e), w) in &got {
        let f = scheme.label(x).frag.expect("sender is internal") as usize;
        let g = net.far(x, e).frag.expect("receiver is internal") as u64;
        for c in w.chunks(4) {
            items.push((x, f, vec![c[0], c[1], g, c[2], c[3]]));
        }
    }
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, vbits, "counts from neighbour")?;
    let mut via_neighbour: HashMap<(EdgeId, usize, usize), (u64, u64)> = HashMap::new();
    for w in got.values().flatten() {
        via_neighbour.insert((w[0] as EdgeId, w[1] as usize, w[2] as usize), (w[3], w[4]));
    }

    // Edges covering both a non-highway edge and another fragment's highway.
    let pcc = primitives::convergecast(
        sim,
        &net.frag_overlay,
        nf,
        vbits,
        Combine::Sum,
        |v, scope| {
            let lv = scheme.label(v);
            let mut acc = vec![0u64; nf];
            if lv.frag != Some(scope as u32) {
                return acc;
            }
            for e in h.incident(v) {
                let ly = net.far(v, e.id);
                for (g, c) in acc.iter_mut().enumerate() {
                    let d = lr.bottom_label(g);
                    if g != scope && d.is_ancestor_of(lv) != d.is_ancestor_of(ly) {
                        *c += 1;
                    }
                }
            }
            acc
        },
        "pair cover per fragment",
    )?;

    // Pieces of shared paths inside fragments without an interior edge to
    // the owners' fragment.
    let mut items = Vec::new();
    for g in &groups {
        let bps: Vec<LcaLabel> =
            shared.get(&(g.j, g.id)).into_iter().flatten().map(|&d| scheme.walk(&g.exit, &g.end, d)).collect();
        let last = lr.last_fragment(&g.exit, &g.end);
        for f in (0..nf).filter(|&f| f != g.frag && !neighbour[f].contains_key(&g.frag)) {
            let on = lr.pass_through(f, &g.exit, &g.end) || last == Some(f);
            let special = last == Some(f) || bps.iter().any(|b| lr.internal(f, b));
            if g.exit == g.end || !on || !special {
                continue;
            }
            for p in pieces(lr, &views[f], f, g, &bps) {
                items.push((lr.root_vertex(f), vec![g.j as u64, g.id, f as u64, p.lo as u64, p.hi as u64, p.c, p.n, p.nh]));
            }
        }
    }
    let mut piece_map: HashMap<(usize, u64, usize), Vec<Piece>> = HashMap::new();
    for w in global.broadcast(sim, &items, vbits, "shared-path pieces")? {
        let p = Piece { lo: w[3] as usize, hi: w[4] as usize, c: w[5], n: w[6], nh: w[7] };
        piece_map.entry((w[0] as usize, w[1], w[2] as usize)).or_default().push(p);
    }

    // Owners count partners per fragment and keep the best path.
    for &t in &tree_edges {
        let f = net.decomp.fragment_of_edge(t).unwrap();
        let mut cands: Vec<(&Query, Vec<(u64, u64)>)> = Vec::new();
        for q in queries[f].iter().filter(|q| q.t == t) {
            let info = &infos[&(q.t, q.j)];
            let o = &oriented[&(q.t, q.j)];
            let mut counts = vec![(0u64, 0u64); nf];
            for ve in views[f].iter().filter(|ve| info.decode(&ve.x, ve.cov)) {
                counts[f].0 += 1;
                counts[f].1 += u64::from(is_highway_lower(&ve.x));
            }
            for s in SIDES {
                let segs = match s {
                    Side::Low => &info.low,
                    Side::High => &info.high,
                };
                for (g, pass) in lr.visited(q, s) {
                    let add = match lr.route(q, info, s, g, pass, neighbour[f].contains_key(&g))? {
                        Route::PassThrough => {
                            let hm = hmin[g];
                            let hit = segs.iter().any(|x| {
                                !x.is_empty()
                                    && x.c == hm.c
                                    && scheme.on_path(&x.a, &x.b, lr.root_label(g))
                                    && scheme.on_path(&x.a, &x.b, lr.bottom_label(g))
                            });
                            if hit {
                                (hm.n, hm.n)
                            } else {
                                (0, 0)
                            }
                        }
                        Route::Neighbour => *via_neighbour
                            .get(&(q.t, q.j, g))
                            .ok_or_else(|| Error::InvalidParams(format!("no count from fragment {g} for edge {t}")))?,
                        Route::NoEdgeLast => {
                            let pair = pcc.values[q.owner][&f][g];
                            let hm = hmin[g];
                            let want = (k + 2 * pair).checked_sub(cov.get(t));
                            let (a, b) = o.side_ends(s);
                            let d = lr.bottom_label(g);
                            let inside = |depth: usize| LabelScheme::edge_on_path(a, b, &scheme.ancestor_at(d, depth));
                            if hm.n > 0 && want == Some(hm.c) && inside(hm.top) && inside(hm.bottom) {
                                (hm.n, hm.n)
                            } else {
                                (0, 0)
                            }
                        }
                        Route::Shared => {
                            let grp = group_of(q, s).expect("shared path announced");
                            let off = lr.exit_offset(q, s);
                            let mut acc = (0, 0);
                            for p in piece_map.get(&(grp.j, grp.id, g)).into_iter().flatten() {
                                let (lo, hi) = (off + p.lo, off + p.hi);
                                let hit = segs.iter().any(|x| {
                                    !x.is_empty() && x.c == p.c && o.key(s, &x.a) <= lo && hi <= o.key(s, &x.b)
                                });
                                if hit {
                                    acc.0 += p.n;
                                    acc.1 += p.nh;
                                }
                            }
                            acc
                        }
                    };
                    counts[g].0 += add.0;
                    counts[g].1 += add.1;
                }
            }
            cands.push((q, counts));
        }
        cands.sort_by_key(|(q, _)| q.j);
        let best = cands
            .iter()
            .enumerate()
            .max_by_key(|(i, (_, c))| (c.iter().map(|x| x.0).sum::<u64>(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .expect("at least one candidate");
        let (q, counts) = &cands[best];
        out.info.insert(t, infos[&(t, q.j)].clone());
        out.path.insert(t, PathEnds { low: scheme.vertex(&q.pl), high: scheme.vertex(&q.ph) });
        out.frag_info.insert(t, counts.clone());
        out.candidates.insert(t, cands.iter().map(|(q, _)| infos[&(t, q.j)].clone()).collect());
    }
    out.links = neighbour;
    out.highway_min = hmin.iter().map(|m| (m.c, m.n)).collect();
    out.rounds = sim.trace().rounds - before;
    Ok(out)
}

/// Splits the part of a shared path inside fragment `f` at every break
/// point inside `f` and summarises each piece.
fn pieces(lr: &Learner, view: &[ViewEdge], f: usize, g: &Group, bps: &[LcaLabel]) -> Vec<Piece> {
    let s = lr.scheme();
    let mut cuts: Vec<usize> = bps.iter().filter(|b| lr.internal(f, b)).map(|b| s.distance(&g.exit, b)).collect();
    let ul = s.lca(&g.end, lr.bottom_label(f));
    if lr.internal(f, &ul) {
        cuts.push(s.distance(&g.exit, &ul));
    }
    cuts.sort_unstable();
    cuts.dedup();
    let mut by_piece: BTreeMap<usize, Piece> = BTreeMap::new();
    for e in view.iter().filter(|e| LabelScheme::edge_on_path(&g.exit, &g.end, &e.x)) {
        let d = s.distance(&g.exit, &e.x);
        let pos = if e.x.is_ancestor_of(&g.end) && !e.x.is_ancestor_of(&g.exit) { d - 1 } else { d };
        let idx = cuts.partition_point(|&c| c <= pos);
        let hw = u64::from(is_highway_lower(&e.x));
        let p = by_piece.entry(idx).or_insert(Piece { lo: pos, hi: pos + 1, c: e.cov, n: 0, nh: 0 });
        p.lo = p.lo.min(pos);
        p.hi = p.hi.max(pos + 1);
        if e.cov < p.c {
            *p = Piece { c: e.cov, n: 0, nh: 0, ..*p };
        }
        if e.cov == p.c {
            p.n += 1;
            p.nh += hw;
        }
    }
    by_piece.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::{Budget, SimConfig, Simulator};
    use crate::cutinfo::tests::kconnected_multigraph;
    use crate::cutinfo::{candidate_paths, compute_cutinfo_exact, frag_info_exact, PathProvider};
    use crate::respect::{build_packing, CoverTable, PackingMode};

    fn check(g: &WeightedMultigraph, target: usize, provider: PathProvider, words: u64) -> (usize, usize) {
        let k = crate::oracle::min_cut(g) as u64;
        let packing = build_packing(g, PackingMode::Faithful, 2, Some(1)).unwrap();
        let tree = &packing.trees[0];
        let table = CoverTable::new(g, tree);
        let paths = candidate_paths(provider, tree, &table, k).unwrap();
        let config = SimConfig { budget: Budget::Words(words), ..SimConfig::default() };
        let mut sim = Simulator::new(g, config, 9);
        let global = GlobalTree::build(&mut sim, 0).unwrap();
        let net = NetTree::setup(&mut sim, &global, g, tree, target).unwrap();
        let cov = net.cover_values(&mut sim, &global, g).unwrap();
        let learned = learn_cutinfo(&mut sim, &global, &net, g, &cov, k, &paths).unwrap();
        assert!(sim.trace().bandwidth_ok());
        let mut highway = 0;
        for &t in table.tree_edges() {
            let (exact, p) = compute_cutinfo_exact(g, tree, &net.scheme, &table, t, k).unwrap();
            let info = &learned.info[&t];
            for &t2 in table.tree_edges() {
                let x = net.scheme.label(tree.lower(t2).unwrap());
                assert_eq!(info.decode(x, table.cov(t2)), exact.decode(x, table.cov(t2)), "t={t} t'={t2}");
            }
            if provider == PathProvider::Oracle {
                assert_eq!(info, &exact);
                assert_eq!(learned.path[&t], p);
            }
            assert_eq!(learned.frag_info[&t], frag_info_exact(tree, &net.decomp, &table, t, k), "t={t}");
            // Every candidate reports only genuine partners.
            for c in &learned.candidates[&t] {
                for &t2 in table.tree_edges() {
                    let x = net.scheme.label(tree.lower(t2).unwrap());
                    if c.decode(x, table.cov(t2)) {
                        assert_eq!(table.cut(t, Some(t2)), k);
                    }
                }
            }
            highway += usize::from(net.decomp.is_highway(t));
        }
        (net.decomp.len(), highway)
    }

    #[test]
    fn tree_only_graph_is_empty() {
        let g = crate::respect::tests::random_multigraph(10, 0, 1);
        let (frags, _) = check(&g, 3, PathProvider::Oracle, 4);
        assert!(frags > 1);
    }

    #[test]
    fn cycle_single_fragment() {
        let g = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        check(&g, 4, PathProvider::Oracle, 8);
    }

    #[test]
    fn matches_exact_with_oracle_paths() {
        for seed in 0..6 {
            for k in [2, 3] {
                let g = kconnected_multigraph(30, k, 8, 70 + seed * 3 + k as u64);
                let (frags, hw) = check(&g, 3, PathProvider::Oracle, 4);
                assert!(frags > 3 && hw > 0);
            }
        }
    }

    #[test]
    fn matches_exact_with_padded_paths() {
        for seed in 0..4 {
            let g = kconnected_multigraph(24, 2, 4, 300 + seed);
            check(&g, 3, PathProvider::Padded { decoys: 3, seed }, 4);
        }
    }

    #[test]
    fn sparse_multi_fragment_instances() {
        for seed in 0..4 {
            let g = kconnected_multigraph(40, 2, 0, 900 + seed);
            check(&g, 4, PathProvider::Oracle, 4);
        }
    }
}
