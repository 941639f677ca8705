//! Per-edge cost-effectiveness estimates: for every edge outside `h`, an
//! O(1)-approximation of the number of minimum cuts of `h` it covers.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::congest::primitives::Combine;
use crate::congest::{Budget, RoundTrace, SimConfig, Simulator};
use crate::cutinfo::{candidate_paths, learn_cutinfo, PathProvider};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSubset, WeightedMultigraph};
use crate::oracle;
use crate::par;
use crate::respect::{build_packing, CoverTable, PackingMode};
use crate::sketch::{assign_cut_names, edge_sketches, estimate_count, NameSpace, Sketch, SketchParams, Sketcher};
use crate::tree::dist::{GlobalTree, NetTree};
use crate::tree::default_target;
use crate::tree::SpanTree;

/// Default approximation factor of the estimates: 8 from the sketches times
/// 3 from the packing reduction.
pub const ALPHA: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhoConfig {
    pub packing: PackingMode,
    /// Number of packing trees; `None` uses the packing mode's default.
    pub trees: Option<usize>,
    pub paths: PathProvider,
    pub budget: Budget,
    /// Fragment size target; `None` uses about sqrt(n).
    pub fragment_target: Option<usize>,
}

impl Default for RhoConfig {
    fn default() -> Self {
        RhoConfig {
            packing: PackingMode::Oracle,
            trees: None,
            paths: PathProvider::Oracle,
            budget: Budget::Words(8),
            fragment_target: None,
        }
    }
}

/// Per-tree covered-cut counts for one edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    /// Exact count of covered 1-respecting minimum cuts, per tree.
    pub one_respecting: Vec<u64>,
    /// Sketch estimate of covered 2-respecting minimum cuts, per tree.
    pub two_respecting: Vec<u64>,
}

impl Breakdown {
    pub fn total(&self) -> u64 {
        self.one_respecting.iter().sum::<u64>() + self.two_respecting.iter().sum::<u64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub edge_id: EdgeId,
    /// Estimated covered count, `3 * breakdown.total() / trees`.
    pub est: f64,
    pub rho: f64,
    pub breakdown: Breakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub k: usize,
    pub trees: usize,
    pub edges: Vec<EdgeEstimate>,
    pub trace: RoundTrace,
}

impl RhoEstimate {
    pub fn get(&self, id: EdgeId) -> Option<&EdgeEstimate> {
        self.edges.binary_search_by_key(&id, |e| e.edge_id).ok().map(|i| &self.edges[i])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("estimate serializes")
    }
}

/// Estimates `|C_e|` and `rho(e) = |C_e| / w(e)` for every edge of `g`
/// outside `h`, where `h` must have minimum cut exactly `k`. Each packing tree
/// runs as its own simulator session on `g`; the traces are summed.
pub fn estimate_rho(g: &WeightedMultigraph, h: &EdgeSubset, k: usize, config: &RhoConfig, seed: u64) -> Result<RhoEstimate> {
    g.check_subset(h)?;
    let hg = g.restrict(h)?;
    let mut trace = RoundTrace::default();
    trace.record_oracle("min cut of subgraph");
    let lambda = oracle::min_cut(&hg);
    if lambda != k {
        return Err(Error::MinCutMismatch { expected: k, actual: lambda });
    }
    let outside = g.restrict(&g.full_subset().difference(h))?;
    let packing = build_packing(&hg, config.packing, seed, config.trees)?;
    if config.packing == PackingMode::Oracle {
        trace.record_oracle("tree packing");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<(usize, u64)> = (0..packing.len()).map(|i| (i, rng.random())).collect();
    let runs = par::map(&seeds, |&(i, s)| tree_counts(g, &hg, &outside, &packing.trees[i], k as u64, config, s));

    let ell = packing.len();
    let mut edges: Vec<EdgeEstimate> = outside
        .edges()
        .iter()
        .map(|e| EdgeEstimate {
            edge_id: e.id,
            est: 0.0,
            rho: 0.0,
            breakdown: Breakdown { one_respecting: Vec::with_capacity(ell), two_respecting: Vec::with_capacity(ell) },
        })
        .collect();
    for run in runs {
        let run = run?;
        trace.absorb(&run.trace);
        for (est, (one, two)) in edges.iter_mut().zip(run.counts) {
            est.breakdown.one_respecting.push(one);
            est.breakdown.two_respecting.push(two);
        }
    }
    for est in &mut edges {
        let totals: Vec<f64> = (0..ell)
            .map(|i| (est.breakdown.one_respecting[i] + est.breakdown.two_respecting[i]) as f64)
            .collect();
        est.est = crate::respect::reduce_counts(&totals)?;
        est.rho = est.est / g.edge(est.edge_id).w as f64;
    }
    Ok(RhoEstimate { k, trees: ell, edges, trace })
}

struct TreeRun {
    /// (1-respecting, 2-respecting) per edge of `outside`, in edge order.
    counts: Vec<(u64, u64)>,
    trace: RoundTrace,
}

fn tree_counts(
    g: &WeightedMultigraph,
    hg: &WeightedMultigraph,
    outside: &WeightedMultigraph,
    tree: &SpanTree,
    k: u64,
    config: &RhoConfig,
    seed: u64,
) -> Result<TreeRun> {
    let mut sim = Simulator::new(g, SimConfig { budget: config.budget, ..SimConfig::default() }, seed);
    let global = GlobalTree::build(&mut sim, 0)?;
    let target = config.fragment_target.unwrap_or_else(|| default_target(g.n()));
    let mut net = NetTree::setup(&mut sim, &global, hg, tree, target)?;
    let cov = net.cover_values(&mut sim, &global, hg)?;
    net.learn_far_labels(&mut sim, outside)?;
    let wb = sim.word_bits();

    let ones = net.path_aggregate(
        &mut sim,
        &global,
        outside,
        1,
        wb,
        Combine::Sum,
        |t| vec![u64::from(cov.get(t) == k)],
        "rho: one-respecting",
    )?;
    let mut counts: Vec<(u64, u64)> = ones.iter().map(|(_, v)| (v[0], 0)).collect();

    if k >= 2 && outside.m() > 0 {
        let table = CoverTable::new(hg, tree);
        let paths = candidate_paths(config.paths, tree, &table, k)?;
        let learned = learn_cutinfo(&mut sim, &global, &net, hg, &cov, k, &paths)?;
        let names = assign_cut_names(&mut sim, &global, &net, hg, &cov, &learned, k)?;
        let space = NameSpace::new(hg.id_bound(), net.decomp.len(), hg.n());
        let params = SketchParams::for_n(g.n());
        let sketcher = Sketcher::new(params, space.size() as u64, sim.shared())?;
        let es = edge_sketches(&mut sim, &net, &sketcher, &space, &names, &learned)?;

        // Fragment roots announce whether any of their edges holds a sketch;
        // the path XOR runs only if some fragment does.
        let frags: BTreeSet<usize> = es.sketches.keys().filter_map(|&t| net.decomp.fragment_of_edge(t)).collect();
        let items: Vec<(usize, Vec<u64>)> =
            frags.iter().map(|&f| (net.decomp.fragments[f].root, vec![f as u64])).collect();
        let any = global.broadcast(&mut sim, &items, wb, "rho: sketch presence")?;
        if !any.is_empty() {
            let xors = net.path_aggregate(
                &mut sim,
                &global,
                outside,
                params.len(),
                params.word_bits,
                Combine::Xor,
                |t| es.get(t).map(|s| s.fields().to_vec()).unwrap_or_default(),
                "rho: path xor",
            )?;
            for (c, (_, fields)) in counts.iter_mut().zip(xors) {
                c.1 = estimate_count(&Sketch::from_fields(params, fields)?);
            }
        }
    }
    Ok(TreeRun { counts, trace: sim.into_trace() })
}

/// Exact per-tree covered counts for edge `e`: (1-respecting, 2-respecting
/// with exactly one tree edge on the path of `e`).
pub fn exact_tree_counts(table: &CoverTable, tree: &SpanTree, e: (usize, usize), k: u64) -> (u64, u64) {
    let path: BTreeSet<EdgeId> = tree.path_edges(e.0, e.1).into_iter().collect();
    let one = path.iter().filter(|&&t| table.cov(t) == k).count() as u64;
    let ts = table.tree_edges();
    let mut two = 0;
    for (i, &a) in ts.iter().enumerate() {
        for &b in &ts[i + 1..] {
            if path.contains(&a) != path.contains(&b) && table.cut(a, Some(b)) == k {
                two += 1;
            }
        }
    }
    (one, two)
}

/// Trace of one estimate in the first augmentation step of `g`: `h` is the
/// MST and the packing is that single tree, so only the exact 1-respecting
/// pipeline runs. Used for round-scaling measurements.
pub fn first_step_trace(g: &WeightedMultigraph, budget: Budget, seed: u64) -> Result<RoundTrace> {
    let h = crate::graph::mst(g)?;
    let config = RhoConfig { packing: PackingMode::Faithful, trees: Some(1), budget, ..RhoConfig::default() };
    Ok(estimate_rho(g, &h, 1, &config, seed)?.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutinfo::tests::kconnected_multigraph;
    use crate::graph::mst;
    use crate::oracle::exact_covered_count;

    fn c4_with_chord() -> (WeightedMultigraph, EdgeSubset) {
        let g = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 3, 2)]).unwrap();
        let h = EdgeSubset::from_ids(g.id_bound(), [0, 1, 2, 3]);
        (g, h)
    }

    #[test]
    fn chord_of_c4_counts() {
        let (g, h) = c4_with_chord();
        let est = estimate_rho(&g, &h, 2, &RhoConfig::default(), 1).unwrap();
        assert_eq!(est.edges.len(), 1);
        let e = &est.edges[0];
        assert_eq!(e.edge_id, 4);
        assert_eq!(exact_covered_count(&g.restrict(&h).unwrap(), g.edge(4)).unwrap(), 3);
        assert!(e.est >= 3.0 && e.est <= 72.0, "{e:?}");
        assert!((e.rho - e.est / 2.0).abs() < 1e-12);
        assert!(est.trace.bandwidth_ok());
    }

    #[test]
    fn rejects_wrong_k() {
        let (g, h) = c4_with_chord();
        assert!(matches!(
            estimate_rho(&g, &h, 3, &RhoConfig::default(), 1),
            Err(Error::MinCutMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn tree_subgraph_counts_path_length() {
        let g = kconnected_multigraph(12, 2, 6, 4);
        let h = mst(&g).unwrap();
        let est = estimate_rho(&g, &h, 1, &RhoConfig::default(), 2).unwrap();
        let hg = g.restrict(&h).unwrap();
        for e in &est.edges {
            let edge = g.edge(e.edge_id);
            let truth = exact_covered_count(&hg, edge).unwrap() as f64;
            assert!(e.breakdown.two_respecting.iter().all(|&c| c == 0));
            assert!(e.est >= truth && e.est <= 3.0 * truth, "{e:?} truth {truth}");
        }
    }

    #[test]
    fn zero_cover_gives_zero() {
        // Two 3-cycles joined by a double edge; an edge inside one triangle
        // parallel to an existing edge covers only cuts of that triangle.
        let g = WeightedMultigraph::from_triples(
            6,
            &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1), (0, 3, 1), (1, 4, 1), (3, 4, 5), (0, 1, 5)],
        )
        .unwrap();
        let h = EdgeSubset::from_ids(g.id_bound(), 0..8);
        let hg = g.restrict(&h).unwrap();
        assert_eq!(oracle::min_cut(&hg), 2);
        let est = estimate_rho(&g, &h, 2, &RhoConfig::default(), 3).unwrap();
        for e in &est.edges {
            let truth = exact_covered_count(&hg, g.edge(e.edge_id)).unwrap();
            if truth == 0 {
                assert_eq!(e.est, 0.0, "{e:?}");
            } else {
                assert!(e.est >= truth as f64 && e.est <= ALPHA * truth as f64);
            }
        }
    }

    #[test]
    fn one_respecting_component_is_exact() {
        for seed in 0..3 {
            let g = kconnected_multigraph(30, 2, 20, seed);
            let h = sparse_two_connected(&g, seed);
            let hg = g.restrict(&h).unwrap();
            let cfg = RhoConfig::default();
            let est = estimate_rho(&g, &h, 2, &cfg, seed).unwrap();
            let packing = build_packing(&hg, cfg.packing, seed, cfg.trees).unwrap();
            assert_eq!(packing.len(), est.trees);
            let tables: Vec<CoverTable> = packing.trees.iter().map(|t| CoverTable::new(&hg, t)).collect();
            let mut inside = 0;
            let mut total = 0;
            for e in &est.edges {
                let edge = g.edge(e.edge_id);
                for (i, tree) in packing.trees.iter().enumerate() {
                    let (one, two) = exact_tree_counts(&tables[i], tree, (edge.u, edge.v), 2);
                    assert_eq!(e.breakdown.one_respecting[i], one);
                    total += 1;
                    if two == 0 {
                        assert_eq!(e.breakdown.two_respecting[i], 0);
                    }
                    if two <= e.breakdown.two_respecting[i] && e.breakdown.two_respecting[i] <= 8 * two {
                        inside += 1;
                    }
                }
            }
            assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total}");
            assert!(est.trace.bandwidth_ok());
        }
    }

    #[test]
    fn estimates_within_composed_window() {
        for seed in 10..14 {
            let g = kconnected_multigraph(30, 2, 25, seed);
            let h = sparse_two_connected(&g, seed);
            let hg = g.restrict(&h).unwrap();
            let est = estimate_rho(&g, &h, 2, &RhoConfig::default(), seed).unwrap();
            let mut ok = 0;
            for e in &est.edges {
                let truth = exact_covered_count(&hg, g.edge(e.edge_id)).unwrap() as f64;
                if e.est >= truth && e.est <= ALPHA * truth {
                    ok += 1;
                }
            }
            assert!(ok as f64 >= 0.95 * est.edges.len() as f64, "seed {seed}: {ok}/{}", est.edges.len());
        }
    }

    /// A spanning tree plus a few edges, pruned until its minimum cut is 2.
    pub(crate) fn sparse_two_connected(g: &WeightedMultigraph, seed: u64) -> EdgeSubset {
        let mut h = g.full_subset();
        let mut order: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for id in order {
            h.remove(id);
            if oracle::min_cut(&g.restrict(&h).unwrap()) < 2 {
                h.insert(id);
            }
        }
        h
    }
}
