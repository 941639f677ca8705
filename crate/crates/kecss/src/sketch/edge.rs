//! `Sketch(t)`: the XOR of the sketches of all named cuts containing `t`,
//! aggregated inside `t`'s fragment.

use std::collections::BTreeMap;

use super::names::{NameAssignment, NameSpace};
use super::{Sketch, Sketcher};
use crate::congest::primitives::{self, Combine};
use crate::congest::Simulator;
use crate::cutinfo::Learned;
use crate::error::Result;
use crate::graph::EdgeId;
use crate::tree::dist::{scoped_broadcast, NetTree};

/// Sketches of the tree edges that take part in at least one cut; all other
/// tree edges have the zero sketch.
#[derive(Clone, Debug)]
pub struct EdgeSketches {
    pub sketches: BTreeMap<EdgeId, Sketch>,
    pub rounds: u64,
}

impl EdgeSketches {
    pub fn get(&self, t: EdgeId) -> Option<&Sketch> {
        self.sketches.get(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.sketches.is_empty()
    }
}

/// Aggregates `Sketch(t)` for every tree edge with a partner. Owners first
/// announce inside their fragment whether they have partners, then one XOR
/// convergecast per fragment folds the holders' relation sketches, and the
/// fragment root sends the results back down.
pub fn edge_sketches(
    sim: &mut Simulator,
    net: &NetTree,
    sketcher: &Sketcher,
    space: &NameSpace,
    names: &NameAssignment,
    learned: &Learned,
) -> Result<EdgeSketches> {
    let before = sim.trace().rounds;
    let params = sketcher.params();
    let wb = params.word_bits.max(sim.word_bits());
    let tree = net.tree;
    let nf = net.decomp.len();
    sketcher.check_shared_bits(tree.n())?;

    // Tree edges travel as their lower endpoints, which fit in one word.
    let mut items = Vec::new();
    for (&t, counts) in &learned.frag_info {
        if counts.iter().any(|c| c.0 > 0) {
            let f = net.decomp.fragment_of_edge(t).expect("tree edge in a fragment");
            let u = tree.lower(t)?;
            items.push((u, f, vec![u as u64]));
        }
    }
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, wb, "sketch: active edges")?;
    let active: Vec<Vec<EdgeId>> = (0..nf)
        .map(|f| {
            let mut ts: Vec<EdgeId> =
                got.get(&f).into_iter().flatten().map(|w| tree.parent_edge[w[0] as usize].expect("lower endpoint")).collect();
            ts.sort_unstable();
            ts
        })
        .collect();
    let width = active.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = EdgeSketches { sketches: BTreeMap::new(), rounds: 0 };
    if width == 0 {
        out.rounds = sim.trace().rounds - before;
        return Ok(out);
    }

    let s = params.len();
    let cc = primitives::convergecast(
        sim,
        &net.frag_overlay,
        width * s,
        params.word_bits,
        Combine::Xor,
        |v, f| {
            let mut acc = vec![0u64; width * s];
            for &(t, name) in names.held.get(&v).into_iter().flatten() {
                let Ok(slot) = active[f].binary_search(&t) else { continue };
                let r = sketcher.relation(space.encode(&name));
                for (a, b) in acc[slot * s..(slot + 1) * s].iter_mut().zip(r.fields()) {
                    *a ^= b;
                }
            }
            acc
        },
        "sketch: fragment xor",
    )?;

    let mut items = Vec::new();
    for (f, ts) in active.iter().enumerate() {
        let r = net.frag_overlay.root(f).expect("fragment overlay root");
        let acc = &cc.values[r][&f];
        for (slot, &t) in ts.iter().enumerate() {
            let mut w = vec![tree.lower(t)? as u64];
            w.extend_from_slice(&acc[slot * s..(slot + 1) * s]);
            items.push((r, f, w));
        }
    }
    let got = scoped_broadcast(sim, &net.frag_overlay, &items, wb, "sketch: fragment results")?;
    for w in got.values().flatten() {
        let t = tree.parent_edge[w[0] as usize].expect("lower endpoint");
        out.sketches.insert(t, Sketch::from_fields(params, w[1..].to_vec())?);
    }
    out.rounds = sim.trace().rounds - before;
    Ok(out)
}
