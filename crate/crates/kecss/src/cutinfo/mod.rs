//! Succinct description of all minimum 2-respecting cuts through a tree edge,
//! its decoder, and the central reference computation.

mod audit;
mod learn;
mod provider;

use std::cmp::Ordering;

use serde::Serialize;

pub use audit::{audit_cutinfo, CutInfoAudit};
pub use learn::{learn_cutinfo, Learned};
pub use provider::{candidate_paths, CandidatePaths, PathProvider};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId, WeightedMultigraph};
use crate::respect::CoverTable;
use crate::tree::{FragmentDecomp, LabelScheme, LcaLabel, SpanTree};

/// Tree path through `t`, given by its end below `t` (`low`, possibly `t`'s
/// lower endpoint itself) and its end on the other side (`high`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathEnds {
    pub low: VertexId,
    pub high: VertexId,
}

/// Which part of the path: below `t` or beyond its upper endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Low,
    High,
}

/// Tree path `S` (between `a` and `b`) and the cover value `c` a partner on
/// it must have.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub a: LcaLabel,
    pub b: LcaLabel,
    pub c: u64,
}

impl Segment {
    pub fn is_empty(&self) -> bool {
        self.a == self.b
    }

    /// Whether the tree edge with lower endpoint `x` lies on the segment.
    pub fn contains(&self, x: &LcaLabel) -> bool {
        !self.is_empty() && LabelScheme::edge_on_path(&self.a, &self.b, x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutInfo {
    pub owner: EdgeId,
    pub low: Vec<Segment>,
    pub high: Vec<Segment>,
}

impl CutInfo {
    pub fn empty(owner: EdgeId) -> Self {
        CutInfo { owner, low: Vec::new(), high: Vec::new() }
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.low.iter().chain(&self.high)
    }

    pub fn len(&self) -> usize {
        self.low.len() + self.high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `{owner, t'}` is a minimum cut, for `t'` with lower endpoint
    /// `x` and cover value `cov`.
    pub fn decode(&self, x: &LcaLabel, cov: u64) -> bool {
        self.segments().any(|s| s.c == cov && s.contains(x))
    }

    /// Flat encoding: owner, segment counts, then `c`, label lengths and
    /// both labels per segment.
    pub fn to_words(&self) -> Vec<u64> {
        let mut w = vec![self.owner as u64, self.low.len() as u64, self.high.len() as u64];
        for s in self.segments() {
            let (a, b) = (s.a.to_words(), s.b.to_words());
            w.extend([s.c, a.len() as u64, b.len() as u64]);
            w.extend(a);
            w.extend(b);
        }
        w
    }

    /// Decodes one `CutInfo` from the front of `w`; returns it and the number
    /// of words consumed.
    pub fn from_words(w: &[u64]) -> (Self, usize) {
        let (nl, nh) = (w[1] as usize, w[2] as usize);
        let mut at = 3;
        let mut segs = Vec::with_capacity(nl + nh);
        for _ in 0..nl + nh {
            let (c, la, lb) = (w[at], w[at + 1] as usize, w[at + 2] as usize);
            at += 3;
            let a = LcaLabel::from_words(&w[at..at + la]);
            let b = LcaLabel::from_words(&w[at + la..at + la + lb]);
            at += la + lb;
            segs.push(Segment { a, b, c });
        }
        let high = segs.split_off(nl);
        (CutInfo { owner: w[0] as EdgeId, low: segs, high }, at)
    }

    /// Wire size in bits at `n` vertices: two labels and one value per tuple.
    pub fn bits(&self, n: usize) -> u64 {
        let wb = crate::congest::word_bits(n) as u64;
        3 * wb + self.segments().map(|s| s.a.bits(n) + s.b.bits(n) + 2 * wb).sum::<u64>()
    }
}

/// Decoder entry point.
pub fn decode_cutinfo(info: &CutInfo, t_prime_lower: &LcaLabel, cov_t_prime: u64) -> bool {
    info.decode(t_prime_lower, cov_t_prime)
}

/// Where a covering edge's coverage of the path ends on each side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualEndpoints {
    pub low: LcaLabel,
    pub high: LcaLabel,
}

/// A tree edge `t = (u, p(u))` together with a path through it, all given by
/// labels.
#[derive(Clone, Debug)]
pub struct Oriented<'s> {
    scheme: &'s LabelScheme,
    pub t: EdgeId,
    pub u: LcaLabel,
    pub pu: LcaLabel,
    pub pl: LcaLabel,
    pub ph: LcaLabel,
    /// Where the high side turns from going up to going down.
    pub turn: LcaLabel,
}

impl<'s> Oriented<'s> {
    pub fn new(scheme: &'s LabelScheme, t: EdgeId, u: LcaLabel, pu: LcaLabel, pl: LcaLabel, ph: LcaLabel) -> Result<Self> {
        if !u.is_ancestor_of(&pl) || u.is_ancestor_of(&ph) || pu.depth() + 1 != u.depth() {
            return Err(Error::InvalidParams(format!("path does not pass through tree edge {t}")));
        }
        let turn = scheme.lca(&pu, &ph);
        Ok(Oriented { scheme, t, u, pu, pl, ph, turn })
    }

    pub fn is_highway(&self) -> bool {
        self.u.anchor_depth as usize == self.u.depth()
    }

    /// Distance from `t` of a vertex on the given side of the path.
    pub fn key(&self, side: Side, v: &LcaLabel) -> usize {
        match side {
            Side::Low => v.depth() - self.u.depth(),
            Side::High if v.is_ancestor_of(&self.pu) => self.pu.depth() - v.depth(),
            Side::High => self.pu.depth() + v.depth() - 2 * self.turn.depth(),
        }
    }

    /// Length of one side of the path.
    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Low => self.key(Side::Low, &self.pl),
            Side::High => self.key(Side::High, &self.ph),
        }
    }

    /// The vertex at distance `key` on the given side.
    pub fn at_key(&self, side: Side, key: usize) -> LcaLabel {
        match side {
            Side::Low => self.scheme.walk(&self.u, &self.pl, key),
            Side::High => self.scheme.walk(&self.pu, &self.ph, key),
        }
    }

    /// Start and end of one side.
    pub fn side_ends(&self, side: Side) -> (&LcaLabel, &LcaLabel) {
        match side {
            Side::Low => (&self.u, &self.pl),
            Side::High => (&self.pu, &self.ph),
        }
    }

    /// Virtual endpoints of an edge with endpoint labels `ea`, `eb` that
    /// covers `t`.
    pub fn virtual_endpoints(&self, id: EdgeId, ea: &LcaLabel, eb: &LcaLabel) -> Result<VirtualEndpoints> {
        let (xl, xh) = match (self.u.is_ancestor_of(ea), self.u.is_ancestor_of(eb)) {
            (true, false) => (ea, eb),
            (false, true) => (eb, ea),
            _ => return Err(Error::DoesNotCover { edge: id, tree_edge: self.t }),
        };
        let low = self.scheme.lca(&self.pl, xl);
        let high = self.scheme.median(&self.pu, xh, &self.ph);
        Ok(VirtualEndpoints { low, high })
    }

    /// Orders two virtual endpoints on the same side by closeness to `t`,
    /// then by the id of the generating edge.
    pub fn compare_endpoints(&self, side: Side, v: (&LcaLabel, EdgeId), w: (&LcaLabel, EdgeId)) -> Ordering {
        (self.key(side, v.0), v.1).cmp(&(self.key(side, w.0), w.1))
    }

    /// Segments from the sorted distances of the closest covering edges on
    /// each side. Missing distances are padded with the side's end.
    pub fn cutinfo_from_keys(&self, low: &[usize], high: &[usize], cov_t: u64, k: usize) -> CutInfo {
        let build = |side: Side, keys: &[usize]| -> Vec<Segment> {
            if k < 2 {
                return Vec::new();
            }
            let end = self.side_len(side);
            let mut keys: Vec<usize> = keys.iter().copied().take(k).collect();
            debug_assert!(keys.windows(2).all(|w| w[0] <= w[1]));
            keys.resize(k, end);
            let verts: Vec<LcaLabel> = keys.iter().map(|&d| self.at_key(side, d.min(end))).collect();
            (1..k)
                .map(|i| Segment { a: verts[i - 1].clone(), b: verts[i].clone(), c: cov_t + k as u64 - 2 * i as u64 })
                .collect()
        };
        CutInfo { owner: self.t, low: build(Side::Low, low), high: build(Side::High, high) }
    }
}

/// Smallest path through `t` containing all its partners, found by scanning
/// the central cover table.
pub fn minimal_path(tree: &SpanTree, table: &CoverTable, t: EdgeId, k: u64) -> Result<PathEnds> {
    let u = tree.lower(t)?;
    let pu = tree.parent[u].unwrap();
    let mut low = u;
    let mut high = pu;
    let mut far = 0;
    for t2 in table.partners(t, k) {
        let x = tree.lower(t2)?;
        if tree.is_ancestor(u, x) {
            if tree.depth[x] > tree.depth[low] {
                low = x;
            }
        } else {
            let end = if tree.is_ancestor(x, pu) { tree.parent[x].unwrap() } else { x };
            let d = tree.path_edges(pu, end).len();
            if d > far {
                far = d;
                high = end;
            }
        }
    }
    Ok(PathEnds { low, high })
}

/// Central reference: the minimal path, the covering edges sorted by their
/// virtual endpoints, and the resulting segments.
pub fn compute_cutinfo_exact(
    h: &WeightedMultigraph,
    tree: &SpanTree,
    scheme: &LabelScheme,
    table: &CoverTable,
    t: EdgeId,
    k: u64,
) -> Result<(CutInfo, PathEnds)> {
    if !tree.is_tree_edge(t) {
        return Err(Error::NotTreeEdge(t));
    }
    let path = minimal_path(tree, table, t, k)?;
    let u = tree.lower(t)?;
    let l = |v: VertexId| scheme.label(v).clone();
    let o = Oriented::new(scheme, t, l(u), l(tree.parent[u].unwrap()), l(path.low), l(path.high))?;
    let mut low = Vec::new();
    let mut high = Vec::new();
    for e in h.edges().iter().filter(|e| tree.path_contains(e.u, e.v, t)) {
        let ve = o.virtual_endpoints(e.id, scheme.label(e.u), scheme.label(e.v))?;
        low.push((o.key(Side::Low, &ve.low), e.id));
        high.push((o.key(Side::High, &ve.high), e.id));
    }
    low.sort_unstable();
    high.sort_unstable();
    let keys = |v: Vec<(usize, EdgeId)>| v.into_iter().map(|(d, _)| d).collect::<Vec<_>>();
    Ok((o.cutinfo_from_keys(&keys(low), &keys(high), table.cov(t), k as usize), path))
}

/// Partners of `t` per fragment: `(all, on the fragment's highway)`.
pub fn frag_info_exact(
    tree: &SpanTree,
    decomp: &FragmentDecomp,
    table: &CoverTable,
    t: EdgeId,
    k: u64,
) -> Vec<(u64, u64)> {
    let mut out = vec![(0, 0); decomp.len()];
    for t2 in table.partners(t, k) {
        let _ = tree;
        let f = decomp.fragment_of_edge(t2).expect("tree edge has a fragment");
        out[f].0 += 1;
        if decomp.is_highway(t2) {
            out[f].1 += 1;
        }
    }
    out
}
