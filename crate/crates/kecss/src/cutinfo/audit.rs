use serde::Serialize;

use super::{candidate_paths, compute_cutinfo_exact, learn_cutinfo, PathProvider};
use crate::congest::{Budget, SimConfig, Simulator};
use crate::error::Result;
use crate::graph::{EdgeId, WeightedMultigraph};
use crate::respect::CoverTable;
use crate::tree::dist::{GlobalTree, NetTree};
use crate::tree::{default_target, SpanTree};

/// Decoder agreement with the brute-force partner sets `{t' : Cut(t, t') = k}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CutInfoAudit {
    pub tree_edges: usize,
    /// Ordered `(t, t')` pairs checked, `t != t'`.
    pub pairs: usize,
    /// Pairs where the central reference decodes wrongly.
    pub exact_mismatches: Vec<(EdgeId, EdgeId)>,
    /// Pairs where the distributed learner decodes wrongly.
    pub learned_mismatches: Vec<(EdgeId, EdgeId)>,
    pub rounds: u64,
    pub bandwidth_ok: bool,
}

impl CutInfoAudit {
    pub fn passed(&self) -> bool {
        self.exact_mismatches.is_empty() && self.learned_mismatches.is_empty() && self.bandwidth_ok
    }
}

/// Learns CutInfo for every edge of `tree` in a fresh simulation of `h` and
/// decodes it against every other tree edge.
pub fn audit_cutinfo(
    h: &WeightedMultigraph,
    tree: &SpanTree,
    k: u64,
    provider: PathProvider,
    budget: Budget,
    seed: u64,
) -> Result<CutInfoAudit> {
    let table = CoverTable::new(h, tree);
    let paths = candidate_paths(provider, tree, &table, k)?;
    let mut sim = Simulator::new(h, SimConfig { budget, ..SimConfig::default() }, seed);
    let global = GlobalTree::build(&mut sim, 0)?;
    let net = NetTree::setup(&mut sim, &global, h, tree, default_target(h.n()))?;
    let cov = net.cover_values(&mut sim, &global, h)?;
    let learned = learn_cutinfo(&mut sim, &global, &net, h, &cov, k, &paths)?;

    let mut audit = CutInfoAudit { tree_edges: table.tree_edges().len(), ..CutInfoAudit::default() };
    for &t in table.tree_edges() {
        let (exact, _) = compute_cutinfo_exact(h, tree, &net.scheme, &table, t, k)?;
        let info = &learned.info[&t];
        for &t2 in table.tree_edges().iter().filter(|&&t2| t2 != t) {
            let x = net.scheme.label(tree.lower(t2)?);
            let truth = table.cut(t, Some(t2)) == k;
            audit.pairs += 1;
            if exact.decode(x, table.cov(t2)) != truth {
                audit.exact_mismatches.push((t, t2));
            }
            if info.decode(x, table.cov(t2)) != truth {
                audit.learned_mismatches.push((t, t2));
            }
        }
    }
    audit.rounds = sim.trace().rounds;
    audit.bandwidth_ok = sim.trace().bandwidth_ok();
    Ok(audit)
}
