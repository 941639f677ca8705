//! Simulated communication primitives over tree overlays. Each call runs real
//! node programs on the simulator, so its rounds and words land in the trace.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::engine::{Action, Ctx, NodeProgram, Simulator, Status};
use super::message::Message;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId};

const NO_VIEW: u32 = u32::MAX;

/// A child-to-parent overlay edge inside scope `scope`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub scope: usize,
    pub child: VertexId,
    pub parent: VertexId,
    pub edge: EdgeId,
}

/// A node's role in one scope tree.
#[derive(Clone, Debug, Default)]
pub struct NodeView {
    pub scope: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A set of edge-disjoint rooted trees, one per scope, laid over graph edges.
/// Trees in different scopes may share vertices but not edges.
#[derive(Clone, Debug)]
pub struct Overlay {
    views: Vec<Vec<NodeView>>,
    port_view: Vec<Vec<u32>>,
    roots: BTreeMap<usize, VertexId>,
    heights: BTreeMap<usize, usize>,
}

impl Overlay {
    /// Builds the overlay from arcs; `roots` lists every scope's root so that
    /// single-vertex scopes are representable.
    pub fn new(sim: &Simulator, arcs: &[Arc], roots: &[(usize, VertexId)]) -> Result<Self> {
        let n = sim.graph().n();
        let mut views: Vec<Vec<NodeView>> = vec![Vec::new(); n];
        let mut port_view: Vec<Vec<u32>> = (0..n).map(|v| vec![NO_VIEW; sim.ports(v).len()]).collect();
        let mut index: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        let mut view_of = |views: &mut Vec<Vec<NodeView>>, v: VertexId, scope: usize| -> usize {
            *index[v].entry(scope).or_insert_with(|| {
                views[v].push(NodeView { scope, ..NodeView::default() });
                views[v].len() - 1
            })
        };
        let mut root_map = BTreeMap::new();
        for &(scope, r) in roots {
            if r >= n || root_map.insert(scope, r).is_some() {
                return Err(Error::NotATree(format!("bad root {r} for scope {scope}")));
            }
            view_of(&mut views, r, scope);
        }
        for a in arcs {
            let e = sim.graph().get(a.edge).ok_or(Error::NotATree(format!("unknown edge {}", a.edge)))?;
            if !((e.u == a.child && e.v == a.parent) || (e.v == a.child && e.u == a.parent)) {
                return Err(Error::NotATree(format!("edge {} does not join {} and {}", a.edge, a.child, a.parent)));
            }
            let pc = sim.port_of(a.child, a.edge).expect("endpoint");
            let pp = sim.port_of(a.parent, a.edge).expect("endpoint");
            if port_view[a.child][pc] != NO_VIEW {
                return Err(Error::NotATree(format!("edge {} used twice", a.edge)));
            }
            let vc = view_of(&mut views, a.child, a.scope);
            let vp = view_of(&mut views, a.parent, a.scope);
            if views[a.child][vc].parent.is_some() {
                return Err(Error::NotATree(format!("vertex {} has two parents in scope {}", a.child, a.scope)));
            }
            views[a.child][vc].parent = Some(pc);
            views[a.parent][vp].children.push(pp);
            port_view[a.child][pc] = vc as u32;
            port_view[a.parent][pp] = vp as u32;
        }
        // Every scope must be a single tree hanging from its declared root.
        let mut members: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for (v, vs) in views.iter().enumerate() {
            for view in vs {
                members.entry(view.scope).or_default().push(v);
            }
        }
        let mut heights = BTreeMap::new();
        for (&scope, mem) in &members {
            let Some(&root) = root_map.get(&scope) else {
                return Err(Error::NotATree(format!("scope {scope} has no root")));
            };
            let rv = index[root][&scope];
            if views[root][rv].parent.is_some() {
                return Err(Error::NotATree(format!("root {root} of scope {scope} has a parent")));
            }
            let mut seen = BTreeSet::from([root]);
            let mut queue = VecDeque::from([(root, 0usize)]);
            let mut height = 0;
            while let Some((x, d)) = queue.pop_front() {
                height = height.max(d);
                let xv = index[x][&scope];
                for &p in &views[x][xv].children {
                    let y = sim.ports(x)[p].neighbor;
                    if !seen.insert(y) {
                        return Err(Error::NotATree(format!("cycle through {y} in scope {scope}")));
                    }
                    queue.push_back((y, d + 1));
                }
            }
            if seen.len() != mem.len() {
                return Err(Error::NotATree(format!("scope {scope} is disconnected")));
            }
            heights.insert(scope, height);
        }
        Ok(Overlay { views, port_view, roots: root_map, heights })
    }

    /// A single tree given by parent edges (`None` at the root).
    pub fn from_parents(sim: &Simulator, scope: usize, root: VertexId, parent_edge: &[Option<EdgeId>]) -> Result<Self> {
        let g = sim.graph();
        let arcs: Vec<Arc> = parent_edge
            .iter()
            .enumerate()
            .filter_map(|(v, pe)| pe.map(|id| Arc { scope, child: v, parent: g.edge(id).other(v), edge: id }))
            .collect();
        Overlay::new(sim, &arcs, &[(scope, root)])
    }

    pub fn views(&self, v: VertexId) -> &[NodeView] {
        &self.views[v]
    }

    pub fn root(&self, scope: usize) -> Option<VertexId> {
        self.roots.get(&scope).copied()
    }

    pub fn scopes(&self) -> impl Iterator<Item = usize> + '_ {
        self.roots.keys().copied()
    }

    pub fn height(&self, scope: usize) -> usize {
        self.heights.get(&scope).copied().unwrap_or(0)
    }

    pub fn max_height(&self) -> usize {
        self.heights.values().copied().max().unwrap_or(0)
    }

    fn view_index(&self, v: VertexId, scope: usize) -> Option<usize> {
        self.views[v].iter().position(|w| w.scope == scope)
    }
}

fn check_width(sim: &Simulator, bits: u64) -> Result<()> {
    let budget_bits = sim.config().budget.bits(sim.word_bits());
    if bits > budget_bits {
        return Err(Error::ValueTooWide { bits, budget_bits });
    }
    Ok(())
}

/// Fields of width `field_bits` that fit into one message, at least one.
fn fields_per_message(sim: &Simulator, field_bits: u32) -> Result<usize> {
    check_width(sim, field_bits as u64)?;
    let budget_bits = sim.config().budget.bits(sim.word_bits());
    Ok(((budget_bits / field_bits.max(1) as u64).min(1 << 20) as usize).max(1))
}

// ---------------------------------------------------------------------------
// Scoped flooding broadcast

/// Items known at each node, per scope, after a broadcast.
#[derive(Clone, Debug)]
pub struct Broadcast {
    pub known: Vec<BTreeMap<usize, BTreeSet<Message>>>,
    pub rounds: u64,
}

impl Broadcast {
    pub fn at(&self, v: VertexId, scope: usize) -> Option<&BTreeSet<Message>> {
        self.known[v].get(&scope)
    }
}

struct FloodNode<'a> {
    views: &'a [NodeView],
    port_view: &'a [u32],
    known: Vec<BTreeSet<Message>>,
    pending: BTreeMap<usize, BTreeSet<Message>>,
}

impl FloodNode<'_> {
    fn learn(&mut self, vi: usize, msg: Message, from: Option<usize>) {
        if !self.known[vi].insert(msg.clone()) {
            return;
        }
        let view = &self.views[vi];
        for &p in view.parent.iter().chain(view.children.iter()) {
            if Some(p) != from {
                self.pending.entry(p).or_default().insert(msg.clone());
            }
        }
    }

    fn emit(&mut self) -> Action {
        let mut out = Vec::new();
        for (&p, set) in self.pending.iter_mut() {
            if let Some(m) = set.pop_first() {
                out.push((p, m));
            }
        }
        self.pending.retain(|_, s| !s.is_empty());
        let status = if self.pending.is_empty() { Status::Idle } else { Status::Active };
        Action::send(out, status)
    }
}

impl NodeProgram for FloodNode<'_> {
    fn init(&mut self, _ctx: &Ctx) -> Action {
        self.emit()
    }

    fn on_round(&mut self, _ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
        for (p, m) in inbox.iter().enumerate() {
            if let Some(m) = m {
                let vi = self.port_view[p];
                if vi != NO_VIEW {
                    self.learn(vi as usize, m.clone(), Some(p));
                }
            }
        }
        self.emit()
    }
}

/// Floods every item through its scope's tree. Each tree port forwards the
/// smallest item it has not yet carried in either direction.
pub fn broadcast(
    sim: &mut Simulator,
    overlay: &Overlay,
    items: &[(VertexId, usize, Message)],
    phase: &str,
) -> Result<Broadcast> {
    let n = sim.graph().n();
    for (_, _, m) in items {
        check_width(sim, m.bits)?;
    }
    let mut nodes: Vec<FloodNode> = (0..n)
        .map(|v| FloodNode {
            views: &overlay.views[v],
            port_view: &overlay.port_view[v],
            known: vec![BTreeSet::new(); overlay.views[v].len()],
            pending: BTreeMap::new(),
        })
        .collect();
    for (v, scope, m) in items {
        let vi = overlay
            .view_index(*v, *scope)
            .ok_or_else(|| Error::NotATree(format!("vertex {v} is not in scope {scope}")))?;
        nodes[*v].learn(vi, m.clone(), None);
    }
    let before = sim.trace().rounds;
    let nodes = sim.run(phase, nodes)?;
    let known = nodes
        .into_iter()
        .map(|nd| nd.views.iter().zip(nd.known).map(|(view, k)| (view.scope, k)).collect())
        .collect();
    Ok(Broadcast { known, rounds: sim.trace().rounds - before })
}

/// Broadcasts `items` over a single tree; returns the rounds used.
pub fn broadcast_pipeline(sim: &mut Simulator, overlay: &Overlay, items: &[(VertexId, Message)]) -> Result<u64> {
    let scope = overlay.scopes().next().ok_or_else(|| Error::NotATree("empty overlay".into()))?;
    let tagged: Vec<_> = items.iter().map(|(v, m)| (*v, scope, m.clone())).collect();
    Ok(broadcast(sim, overlay, &tagged, "broadcast")?.rounds)
}

// ---------------------------------------------------------------------------
// Pipelined elementwise convergecast

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Xor,
    Sum,
    Min,
    Max,
}

impl Combine {
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            Combine::Xor => a ^ b,
            Combine::Sum => a.wrapping_add(b),
            Combine::Min => a.min(b),
            Combine::Max => a.max(b),
        }
    }

    pub fn identity(self) -> u64 {
        match self {
            Combine::Xor | Combine::Sum | Combine::Max => 0,
            Combine::Min => u64::MAX,
        }
    }
}

/// Subtree aggregates: `values[v][scope]` is the fold over v's subtree.
#[derive(Clone, Debug)]
pub struct Convergecast {
    pub values: Vec<BTreeMap<usize, Vec<u64>>>,
    pub rounds: u64,
}

struct UpNode<'a> {
    views: &'a [NodeView],
    port_view: &'a [u32],
    op: Combine,
    per_msg: usize,
    field_bits: u32,
    acc: Vec<Vec<u64>>,
    received: Vec<BTreeMap<usize, usize>>,
    sent: Vec<usize>,
}

impl UpNode<'_> {
    fn emit(&mut self) -> Action {
        let mut out = Vec::new();
        let mut more = false;
        for (vi, view) in self.views.iter().enumerate() {
            let Some(p) = view.parent else { continue };
            let len = self.acc[vi].len();
            let ready = view.children.iter().map(|c| self.received[vi].get(c).copied().unwrap_or(0)).min().unwrap_or(len);
            let hi = ready.min(self.sent[vi] + self.per_msg);
            if hi > self.sent[vi] {
                let chunk = self.acc[vi][self.sent[vi]..hi].to_vec();
                out.push((p, Message::packed(chunk, self.field_bits)));
                self.sent[vi] = hi;
            }
            more |= ready > self.sent[vi];
        }
        Action::send(out, if more { Status::Active } else { Status::Idle })
    }
}

impl NodeProgram for UpNode<'_> {
    fn init(&mut self, _ctx: &Ctx) -> Action {
        self.emit()
    }

    fn on_round(&mut self, _ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
        for (p, m) in inbox.iter().enumerate() {
            let (Some(m), vi) = (m, self.port_view[p]) else { continue };
            if vi == NO_VIEW {
                continue;
            }
            let vi = vi as usize;
            let at = self.received[vi].entry(p).or_insert(0);
            for (j, &x) in m.fields.iter().enumerate() {
                let slot = &mut self.acc[vi][*at + j];
                *slot = self.op.apply(*slot, x);
            }
            *at += m.fields.len();
        }
        self.emit()
    }
}

/// Folds `len`-vectors up every scope tree, pipelining one chunk of fields
/// per round. `init(v, scope)` gives the node's own vector.
pub fn convergecast<F>(
    sim: &mut Simulator,
    overlay: &Overlay,
    len: usize,
    field_bits: u32,
    op: Combine,
    init: F,
    phase: &str,
) -> Result<Convergecast>
where
    F: Fn(VertexId, usize) -> Vec<u64>,
{
    let per_msg = fields_per_message(sim, field_bits)?;
    let n = sim.graph().n();
    let nodes: Vec<UpNode> = (0..n)
        .map(|v| {
            let views = &overlay.views[v];
            let acc: Vec<Vec<u64>> = views
                .iter()
                .map(|view| {
                    let mut x = init(v, view.scope);
                    x.resize(len, op.identity());
                    x
                })
                .collect();
            UpNode {
                views,
                port_view: &overlay.port_view[v],
                op,
                per_msg,
                field_bits,
                received: vec![BTreeMap::new(); views.len()],
                sent: vec![0; views.len()],
                acc,
            }
        })
        .collect();
    let before = sim.trace().rounds;
    let nodes = sim.run(phase, nodes)?;
    let values = nodes
        .into_iter()
        .map(|nd| nd.views.iter().zip(nd.acc).map(|(view, a)| (view.scope, a)).collect())
        .collect();
    Ok(Convergecast { values, rounds: sim.trace().rounds - before })
}

// ---------------------------------------------------------------------------
// Grouped k-best upcast

struct KBestNode<'a> {
    views: &'a [NodeView],
    port_view: &'a [u32],
    k: usize,
    /// Candidates not yet forwarded, in ascending order.
    heap: Vec<BTreeSet<Message>>,
    /// Per child port: largest item received so far, and whether it finished.
    last: Vec<BTreeMap<usize, (Option<Message>, bool)>>,
    emitted: Vec<BTreeMap<u64, usize>>,
    done: Vec<bool>,
    collected: Vec<Vec<Message>>,
}

const END: u64 = u64::MAX;

impl KBestNode<'_> {
    fn admissible(&self, vi: usize, m: &Message) -> bool {
        self.views[vi].children.iter().all(|c| match self.last[vi].get(c) {
            Some((_, true)) => true,
            Some((Some(l), false)) => l >= m,
            _ => false,
        })
    }

    fn children_done(&self, vi: usize) -> bool {
        self.views[vi].children.iter().all(|c| matches!(self.last[vi].get(c), Some((_, true))))
    }

    fn emit(&mut self) -> Action {
        let mut out = Vec::new();
        for vi in 0..self.views.len() {
            if self.done[vi] {
                continue;
            }
            // Drop items whose group already has k emitted.
            while let Some(first) = self.heap[vi].first() {
                let g = first.fields[0];
                if self.emitted[vi].get(&g).copied().unwrap_or(0) >= self.k {
                    self.heap[vi].pop_first();
                } else {
                    break;
                }
            }
            let next = self.heap[vi].first().cloned();
            match next {
                Some(m) if self.admissible(vi, &m) => {
                    self.heap[vi].pop_first();
                    *self.emitted[vi].entry(m.fields[0]).or_default() += 1;
                    match self.views[vi].parent {
                        Some(p) => out.push((p, m)),
                        None => self.collected[vi].push(m),
                    }
                }
                None if self.children_done(vi) => {
                    self.done[vi] = true;
                    if let Some(p) = self.views[vi].parent {
                        out.push((p, Message::new(vec![END], 1)));
                    }
                }
                _ => {}
            }
        }
        let status = if self.done.iter().all(|&d| d) { Status::Idle } else { Status::Active };
        Action::send(out, status)
    }
}

impl NodeProgram for KBestNode<'_> {
    fn init(&mut self, _ctx: &Ctx) -> Action {
        self.emit()
    }

    fn on_round(&mut self, _ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
        for (p, m) in inbox.iter().enumerate() {
            let (Some(m), vi) = (m, self.port_view[p]) else { continue };
            if vi == NO_VIEW {
                continue;
            }
            let vi = vi as usize;
            if m.fields == [END] {
                self.last[vi].entry(p).or_insert((None, false)).1 = true;
            } else {
                self.heap[vi].insert(m.clone());
                self.last[vi].insert(p, (Some(m.clone()), false));
            }
        }
        self.emit()
    }
}

/// For every scope, the root learns the `k` smallest items of each group
/// (group = first field) held anywhere in its tree. Items must be distinct
/// and the first field must not be `u64::MAX`.
pub fn kbest_upcast(
    sim: &mut Simulator,
    overlay: &Overlay,
    k: usize,
    items: &[(VertexId, usize, Message)],
    phase: &str,
) -> Result<BTreeMap<usize, Vec<Message>>> {
    for (_, _, m) in items {
        check_width(sim, m.bits)?;
    }
    let n = sim.graph().n();
    let mut nodes: Vec<KBestNode> = (0..n)
        .map(|v| {
            let nv = overlay.views[v].len();
            KBestNode {
                views: &overlay.views[v],
                port_view: &overlay.port_view[v],
                k,
                heap: vec![BTreeSet::new(); nv],
                last: vec![BTreeMap::new(); nv],
                emitted: vec![BTreeMap::new(); nv],
                done: vec![false; nv],
                collected: vec![Vec::new(); nv],
            }
        })
        .collect();
    for (v, scope, m) in items {
        let vi = overlay
            .view_index(*v, *scope)
            .ok_or_else(|| Error::NotATree(format!("vertex {v} is not in scope {scope}")))?;
        nodes[*v].heap[vi].insert(m.clone());
    }
    let nodes = sim.run(phase, nodes)?;
    let mut out = BTreeMap::new();
    for (&scope, &root) in &overlay.roots {
        let vi = overlay.view_index(root, scope).expect("root view");
        out.insert(scope, nodes[root].collected[vi].clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Neighbour exchange

struct ExchangeNode {
    queues: BTreeMap<usize, VecDeque<Message>>,
    got: BTreeMap<usize, Vec<u64>>,
}

impl ExchangeNode {
    fn emit(&mut self) -> Action {
        let mut out = Vec::new();
        for (&p, q) in self.queues.iter_mut() {
            if let Some(m) = q.pop_front() {
                out.push((p, m));
            }
        }
        self.queues.retain(|_, q| !q.is_empty());
        let status = if self.queues.is_empty() { Status::Idle } else { Status::Active };
        Action::send(out, status)
    }
}

impl NodeProgram for ExchangeNode {
    fn init(&mut self, _ctx: &Ctx) -> Action {
        self.emit()
    }

    fn on_round(&mut self, _ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
        for (p, m) in inbox.iter().enumerate() {
            if let Some(m) = m {
                self.got.entry(p).or_default().extend_from_slice(&m.fields);
            }
        }
        self.emit()
    }
}

/// Sends `fields` from `v` across edge `edge`, split into as many messages as
/// the budget requires. The result maps (receiver, edge) to the fields.
pub fn exchange(
    sim: &mut Simulator,
    sends: &[(VertexId, EdgeId, Vec<u64>)],
    field_bits: u32,
    phase: &str,
) -> Result<BTreeMap<(VertexId, EdgeId), Vec<u64>>> {
    let per_msg = fields_per_message(sim, field_bits)?;
    let n = sim.graph().n();
    let mut nodes: Vec<ExchangeNode> = (0..n).map(|_| ExchangeNode { queues: BTreeMap::new(), got: BTreeMap::new() }).collect();
    for (v, e, fields) in sends {
        let p = sim.port_of(*v, *e).ok_or(Error::BadPort { node: *v, port: usize::MAX })?;
        let q = nodes[*v].queues.entry(p).or_default();
        if fields.is_empty() {
            q.push_back(Message::new(Vec::new(), 0));
        }
        for chunk in fields.chunks(per_msg) {
            q.push_back(Message::packed(chunk.to_vec(), field_bits));
        }
    }
    let nodes = sim.run(phase, nodes)?;
    let mut out = BTreeMap::new();
    for (v, nd) in nodes.into_iter().enumerate() {
        for (p, fields) in nd.got {
            out.insert((v, sim.ports(v)[p].edge), fields);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// BFS tree

/// Parent edge and depth of every vertex in a BFS tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsTree {
    pub root: VertexId,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub depth: Vec<usize>,
}

impl BfsTree {
    pub fn height(&self) -> usize {
        self.depth.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0)
    }
}

struct BfsNode {
    root: bool,
    depth: Option<u64>,
    parent: Option<usize>,
    notify: bool,
}

impl NodeProgram for BfsNode {
    fn init(&mut self, ctx: &Ctx) -> Action {
        if !self.root {
            return Action::idle();
        }
        self.depth = Some(0);
        let out = (0..ctx.ports.len()).map(|p| (p, Message::new(vec![0], ctx.word_bits as u64))).collect();
        Action::send(out, Status::Idle)
    }

    fn on_round(&mut self, ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
        let mut out = Vec::new();
        if self.notify {
            self.notify = false;
            out.push((self.parent.expect("parent chosen"), Message::new(vec![], 1)));
        }
        if self.depth.is_none() {
            // Adopt the smallest-id neighbour among those that reached us first.
            let best = inbox
                .iter()
                .enumerate()
                .filter_map(|(p, m)| m.as_ref().filter(|m| !m.fields.is_empty()).map(|m| (ctx.ports[p].neighbor, p, m.fields[0])))
                .min();
            if let Some((_, p, d)) = best {
                self.depth = Some(d + 1);
                self.parent = Some(p);
                self.notify = true;
                for q in 0..ctx.ports.len() {
                    if q != p {
                        out.push((q, Message::new(vec![d + 1], ctx.word_bits as u64)));
                    }
                }
                let status = Status::Active;
                return Action::send(out, status);
            }
        }
        let status = if self.notify { Status::Active } else { Status::Idle };
        Action::send(out, status)
    }
}

/// Builds a BFS tree from `root` by flooding; ties between equally distant
/// parents go to the smallest neighbour id, then the smallest port.
pub fn bfs_tree(sim: &mut Simulator, root: VertexId, phase: &str) -> Result<BfsTree> {
    let n = sim.graph().n();
    let nodes: Vec<BfsNode> = (0..n).map(|v| BfsNode { root: v == root, depth: None, parent: None, notify: false }).collect();
    let nodes = sim.run(phase, nodes)?;
    let parent_edge = nodes.iter().enumerate().map(|(v, nd)| nd.parent.map(|p| sim.ports(v)[p].edge)).collect();
    let depth = nodes.iter().map(|nd| nd.depth.map_or(usize::MAX, |d| d as usize)).collect();
    Ok(BfsTree { root, parent_edge, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::{Budget, SimConfig};
    use crate::graph::WeightedMultigraph;

    fn path(n: usize) -> WeightedMultigraph {
        let t: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        WeightedMultigraph::from_triples(n, &t).unwrap()
    }

    fn sim(g: &WeightedMultigraph) -> Simulator<'_> {
        Simulator::new(g, SimConfig::default(), 1)
    }

    fn path_overlay(s: &Simulator, n: usize) -> Overlay {
        let pe: Vec<_> = (0..n).map(|v| if v == 0 { None } else { Some(v - 1) }).collect();
        Overlay::from_parents(s, 0, 0, &pe).unwrap()
    }

    #[test]
    fn single_item_on_a_path() {
        let g = path(5);
        let mut s = sim(&g);
        let ov = path_overlay(&s, 5);
        assert_eq!(ov.height(0), 4);
        let r = broadcast_pipeline(&mut s, &ov, &[(0, Message::new(vec![7], 3))]).unwrap();
        assert!(r <= 5, "{r}");
    }

    #[test]
    fn ten_items_height_six() {
        let g = path(7);
        let mut s = sim(&g);
        let ov = path_overlay(&s, 7);
        let items: Vec<_> = (0..10).map(|i| (0, Message::new(vec![i], 3))).collect();
        let r = broadcast_pipeline(&mut s, &ov, &items).unwrap();
        assert!(r <= 17, "{r}");
    }

    #[test]
    fn overlay_rejects_cycles_and_double_parents() {
        let g = WeightedMultigraph::from_triples(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        let s = sim(&g);
        let arcs = [
            Arc { scope: 0, child: 1, parent: 0, edge: 0 },
            Arc { scope: 0, child: 2, parent: 1, edge: 1 },
            Arc { scope: 0, child: 2, parent: 0, edge: 2 },
        ];
        assert!(matches!(Overlay::new(&s, &arcs, &[(0, 0)]), Err(Error::NotATree(_))));
        let arcs = [Arc { scope: 0, child: 1, parent: 0, edge: 0 }, Arc { scope: 0, child: 2, parent: 1, edge: 1 }];
        assert!(Overlay::new(&s, &arcs, &[(0, 0)]).is_ok());
        assert!(matches!(Overlay::new(&s, &arcs, &[(0, 1)]), Err(Error::NotATree(_))));
    }

    #[test]
    fn convergecast_sums_subtrees() {
        let g = path(6);
        let mut s = sim(&g);
        let ov = path_overlay(&s, 6);
        let out = convergecast(&mut s, &ov, 3, 8, Combine::Sum, |v, _| vec![1, v as u64, 2], "cc").unwrap();
        assert_eq!(out.values[0][&0], vec![6, 15, 12]);
        assert_eq!(out.values[4][&0], vec![2, 9, 4]);
        assert!(out.rounds <= 5 + 3);
    }

    #[test]
    fn too_wide_values_are_refused() {
        let g = path(4);
        let mut s = Simulator::new(&g, SimConfig { budget: Budget::Words(2), ..SimConfig::default() }, 0);
        let ov = path_overlay(&s, 4);
        let err = convergecast(&mut s, &ov, 1, 5, Combine::Xor, |_, _| vec![1], "cc").unwrap_err();
        assert!(matches!(err, Error::ValueTooWide { .. }));
    }

    #[test]
    fn kbest_collects_smallest_per_group() {
        let g = path(6);
        let mut s = sim(&g);
        let ov = path_overlay(&s, 6);
        let items: Vec<_> = (0..6u64)
            .flat_map(|v| [(v as usize, 0, Message::new(vec![v % 2, 10 - v], 8)), (v as usize, 0, Message::new(vec![2, v], 8))])
            .collect();
        let got = kbest_upcast(&mut s, &ov, 2, &items, "kb").unwrap();
        let fields: Vec<Vec<u64>> = got[&0].iter().map(|m| m.fields.clone()).collect();
        assert_eq!(fields, vec![vec![0, 6], vec![0, 8], vec![1, 5], vec![1, 7], vec![2, 0], vec![2, 1]]);
    }

    #[test]
    fn exchange_splits_long_payloads() {
        let g = path(2);
        let mut s = Simulator::new(&g, SimConfig { budget: Budget::Words(2), ..SimConfig::default() }, 0);
        let got = exchange(&mut s, &[(0, 0, vec![1, 0, 1, 1, 0])], 1, "x").unwrap();
        assert_eq!(got[&(1, 0)], vec![1, 0, 1, 1, 0]);
        assert_eq!(s.trace().rounds, 3);
    }

    #[test]
    fn bfs_matches_centralized_bfs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let n = 50;
        let mut t = Vec::new();
        for v in 1..n {
            t.push((rng.random_range(0..v), v, 1));
        }
        for _ in 0..60 {
            let u = rng.random_range(0..n);
            let v = (u + rng.random_range(1..n)) % n;
            t.push((u, v, 1));
        }
        let g = WeightedMultigraph::from_triples(n, &t).unwrap();
        let mut s = sim(&g);
        let bfs = bfs_tree(&mut s, 0, "bfs").unwrap();
        // Centralized BFS with the same tie-break.
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut q = VecDeque::from([0]);
        while let Some(x) = q.pop_front() {
            for e in g.incident(x) {
                let y = e.other(x);
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    q.push_back(y);
                }
            }
        }
        assert_eq!(bfs.depth, depth);
        for v in 1..n {
            let pe = g.edge(bfs.parent_edge[v].unwrap());
            let p = pe.other(v);
            let best = g.incident(v).map(|e| e.other(v)).filter(|&y| depth[y] + 1 == depth[v]).min().unwrap();
            assert_eq!(p, best);
        }
    }
}
