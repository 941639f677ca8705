//! Greedy augmentation: raise a (k-1)-edge-connected subgraph to k-edge
//! connectivity by adding near-most-cost-effective edges in randomized
//! batches, plus the k-ECSS and bicriteria drivers built on it.

mod driver;

pub use driver::{bicriteria, kecss, BicriteriaRun, KecssConfig, KecssRun, RunSummary};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::congest::{RoundTrace, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSubset, WeightedMultigraph};
use crate::oracle::{self, MinCuts};
use crate::rho::{estimate_rho, RhoConfig, RhoEstimate, ALPHA};
use crate::tree::dist::GlobalTree;

/// Repetitions per phase are `C_REP * ceil(log2 n)`.
pub const C_REP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreedyParams {
    /// Ceiling on cost-effectiveness, `n^2`.
    pub ceiling: u64,
    pub w_max: u64,
    pub alpha: f64,
    pub c_rep: usize,
    pub m: usize,
    pub n: usize,
}

impl GreedyParams {
    pub fn for_instance(g: &WeightedMultigraph) -> Self {
        let n = g.n();
        GreedyParams {
            ceiling: (n * n) as u64,
            w_max: g.max_weight().max(1),
            alpha: ALPHA,
            c_rep: C_REP,
            m: g.m().max(1),
            n,
        }
    }

    pub fn epochs(&self) -> usize {
        ceil_log2(u128::from(self.ceiling) * u128::from(self.w_max)).max(1)
    }

    /// Phases `j = 0..phases()`; the last one samples with probability 1.
    pub fn phases(&self) -> usize {
        ceil_log2(self.m as u128) + 1
    }

    pub fn reps(&self) -> usize {
        (self.c_rep * ceil_log2(self.n as u128)).max(1)
    }

    pub fn probability(&self, j: usize) -> f64 {
        ((1u128 << j) as f64 / self.m as f64).min(1.0)
    }
}

fn ceil_log2(x: u128) -> usize {
    if x <= 1 {
        0
    } else {
        (u128::BITS - (x - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AugmentConfig {
    pub rho: RhoConfig,
    /// Overrides for the symbolic constants; `None` keeps the defaults.
    pub alpha: Option<f64>,
    pub c_rep: Option<usize>,
    /// Checks the epoch decay and keeps the cut cost ledger, using the oracle.
    pub instrument: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub candidates: usize,
    pub added: usize,
    pub estimates: usize,
    pub rounds: u64,
    /// Largest exact cost-effectiveness outside `H ∪ A` after the epoch.
    pub max_rho: Option<f64>,
    /// Whether every outside edge ended below `M / 2^epoch`.
    pub decay_holds: Option<bool>,
}

/// Cut cost ledger over the (k-1)-cuts of the initial subgraph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostLedger {
    pub cuts: MinCuts,
    /// Epoch in which each cut was first covered.
    pub first_cover: Vec<Option<usize>>,
}

impl CostLedger {
    /// Sum over cuts of `2^epoch / M`.
    pub fn total(&self, ceiling: u64) -> f64 {
        self.first_cover.iter().flatten().map(|&i| (1u128 << i) as f64 / ceiling as f64).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AugmentationRun {
    pub k: usize,
    pub params: GreedyParams,
    pub added: EdgeSubset,
    /// Added edges in order, with the epoch of addition (0 for free edges).
    pub additions: Vec<(EdgeId, usize)>,
    pub epochs: Vec<EpochRecord>,
    pub ledger: Option<CostLedger>,
    pub trace: RoundTrace,
}

impl AugmentationRun {
    pub fn cost(&self, g: &WeightedMultigraph) -> u64 {
        g.weight_of(&self.added)
    }
}

struct State<'a> {
    g: &'a WeightedMultigraph,
    h: &'a EdgeSubset,
    k: usize,
    added: EdgeSubset,
    additions: Vec<(EdgeId, usize)>,
    trace: RoundTrace,
    ledger: Option<CostLedger>,
}

impl State<'_> {
    fn current(&self) -> EdgeSubset {
        self.h.union(&self.added)
    }

    fn done(&mut self) -> Result<bool> {
        self.trace.record_oracle("termination check");
        Ok(oracle::min_cut(&self.g.restrict(&self.current())?) >= self.k)
    }

    fn add(&mut self, id: EdgeId, epoch: usize) {
        self.added.insert(id);
        self.additions.push((id, epoch));
        if let Some(ledger) = &mut self.ledger {
            let e = self.g.edge(id);
            for (c, first) in ledger.cuts.cuts.iter().zip(&mut ledger.first_cover) {
                if first.is_none() && c.separates(e.u, e.v) {
                    *first = Some(epoch);
                }
            }
        }
    }
}

/// `rho'(e) >= M / (alpha 2^i)`, where `rho' = est / ALPHA` so that
/// `rho / ALPHA <= rho' <= rho` whenever the estimate is in its window.
fn is_candidate(est: &RhoEstimate, id: EdgeId, w: u64, params: &GreedyParams, epoch: usize) -> bool {
    let Some(e) = est.get(id) else { return false };
    let total = e.breakdown.total();
    if total == 0 {
        return false;
    }
    let lhs = 3.0 * total as f64 * params.alpha * (epoch as f64).exp2();
    lhs >= ALPHA * params.ceiling as f64 * w as f64 * est.trees as f64
}

/// Runs the greedy augmentation of `h` to `k`-edge-connectivity in `g`.
/// Cost-effectiveness estimates come from simulated sessions; termination
/// checks use the min-cut oracle and are counted as oracle calls.
pub fn augment(g: &WeightedMultigraph, h: &EdgeSubset, k: usize, config: &AugmentConfig, seed: u64) -> Result<AugmentationRun> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    g.check_subset(h)?;
    let mut trace = RoundTrace::default();
    trace.record_oracle("input connectivity");
    if oracle::min_cut(g) < k {
        return Err(Error::NotKConnected(k));
    }
    trace.record_oracle("subgraph connectivity");
    if oracle::min_cut(&g.restrict(h)?) < k - 1 {
        return Err(Error::NotKConnected(k - 1));
    }
    let mut params = GreedyParams::for_instance(g);
    if let Some(a) = config.alpha {
        if a < 1.0 {
            return Err(Error::InvalidParams(format!("alpha must be at least 1, got {a}")));
        }
        params.alpha = a;
    }
    if let Some(c) = config.c_rep {
        params.c_rep = c;
    }
    let ledger = if config.instrument {
        trace.record_oracle("cost ledger");
        let cuts = oracle::enumerate_min_cuts(&g.restrict(h)?)?;
        let cuts = if cuts.value + 1 == k { cuts } else { MinCuts { value: cuts.value, cuts: Vec::new() } };
        Some(CostLedger { first_cover: vec![None; cuts.cuts.len()], cuts })
    } else {
        None
    };
    let mut st = State { g, h, k, added: EdgeSubset::new(g.id_bound()), additions: Vec::new(), trace, ledger };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Zero-weight edges cost nothing and are taken up front.
    for e in g.edges() {
        if e.w == 0 && !h.contains(e.id) {
            st.add(e.id, 0);
        }
    }

    // Nodes learn whether A changed through a global OR on a control session.
    let mut control = Simulator::new(g, SimConfig { budget: config.rho.budget, ..SimConfig::default() }, seed);
    let global = GlobalTree::build(&mut control, 0)?;

    let mut epochs = Vec::new();
    let mut cached: Option<RhoEstimate> = None;
    let estimate = |st: &mut State, cached: &mut Option<RhoEstimate>, rng: &mut ChaCha8Rng, count: &mut usize| -> Result<()> {
        if cached.is_none() {
            let est = estimate_rho(g, &st.current(), k - 1, &config.rho, rng.random())?;
            st.trace.absorb(&est.trace);
            *count += 1;
            *cached = Some(est);
        }
        Ok(())
    };

    'epochs: for i in 1..=params.epochs() {
        let rounds_before = st.trace.rounds + control.trace().rounds;
        let mut rec = EpochRecord {
            epoch: i,
            candidates: 0,
            added: 0,
            estimates: 0,
            rounds: 0,
            max_rho: None,
            decay_holds: None,
        };
        if st.done()? {
            break;
        }
        estimate(&mut st, &mut cached, &mut rng, &mut rec.estimates)?;
        let est = cached.as_ref().expect("estimate present");
        let mut cands: Vec<EdgeId> = est
            .edges
            .iter()
            .map(|e| e.edge_id)
            .filter(|&id| is_candidate(est, id, g.edge(id).w, &params, i))
            .collect();
        rec.candidates = cands.len();
        let mut finished = false;
        'phases: for j in 0..params.phases() {
            let p = params.probability(j);
            for _ in 0..params.reps() {
                if cands.is_empty() {
                    break 'phases;
                }
                if st.done()? {
                    finished = true;
                    break 'phases;
                }
                estimate(&mut st, &mut cached, &mut rng, &mut rec.estimates)?;
                let est = cached.as_ref().expect("estimate present");
                cands.retain(|&id| !st.added.contains(id) && is_candidate(est, id, g.edge(id).w, &params, i));
                let mut picked = Vec::new();
                for &id in &cands {
                    if rng.random::<f64>() < p {
                        picked.push(id);
                    }
                }
                let lower: Vec<usize> = picked.iter().map(|&id| g.edge(id).u.min(g.edge(id).v)).collect();
                if global.any(&mut control, |v| lower.contains(&v), "augment: change flag")? {
                    cached = None;
                }
                for id in picked {
                    st.add(id, i);
                    rec.added += 1;
                }
            }
        }
        if config.instrument {
            let (max_rho, holds) = decay_check(&mut st, params.ceiling, i)?;
            rec.max_rho = Some(max_rho);
            rec.decay_holds = Some(holds);
        }
        rec.rounds = st.trace.rounds + control.trace().rounds - rounds_before;
        epochs.push(rec);
        if finished {
            break 'epochs;
        }
    }
    if !st.done()? {
        return Err(Error::AugmentationIncomplete(k));
    }
    let mut trace = st.trace;
    trace.absorb(control.trace());
    Ok(AugmentationRun { k, params, added: st.added, additions: st.additions, epochs, ledger: st.ledger, trace })
}

/// Largest exact cost-effectiveness outside `H ∪ A`, and whether all edges
/// are below `M / 2^epoch`.
fn decay_check(st: &mut State, ceiling: u64, epoch: usize) -> Result<(f64, bool)> {
    let cur = st.current();
    let hg = st.g.restrict(&cur)?;
    st.trace.record_oracle("epoch decay check");
    if oracle::min_cut(&hg) >= st.k {
        return Ok((0.0, true));
    }
    let cuts = oracle::enumerate_min_cuts(&hg)?;
    let mut max_rho: f64 = 0.0;
    let mut holds = true;
    for e in st.g.edges().iter().filter(|e| !cur.contains(e.id)) {
        let covered = cuts.covered_by(e) as u128;
        let rho = oracle::Rho { covered: covered as usize, weight: e.w };
        max_rho = max_rho.max(rho.value());
        if covered << epoch >= u128::from(ceiling) * u128::from(e.w) && covered > 0 {
            holds = false;
        }
    }
    Ok((max_rho, holds))
}
