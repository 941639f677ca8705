use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{augment, AugmentConfig, AugmentationRun};
use crate::congest::RoundTrace;
use crate::error::{Error, Result};
use crate::graph::{mst, EdgeSubset, WeightedMultigraph};
use crate::oracle;
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct KecssConfig {
    pub augment: AugmentConfig,
    /// Independent runs; the cheapest result is kept.
    pub restarts: usize,
}

impl Default for KecssConfig {
    fn default() -> Self {
        KecssConfig { augment: AugmentConfig::default(), restarts: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KecssRun {
    pub k: usize,
    pub subset: EdgeSubset,
    pub cost: u64,
    /// Cost of each restart, `None` where the run did not finish.
    pub restart_costs: Vec<Option<u64>>,
    /// Augmentation steps of the kept run, for connectivity 2..=k.
    pub augmentations: Vec<AugmentationRun>,
    /// Totals over all restarts.
    pub trace: RoundTrace,
}

/// Summary emitted by the command line runner.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub k: usize,
    pub cost: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_cost: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub rounds: u64,
    pub oracle_calls: u64,
    pub epochs: usize,
}

impl KecssRun {
    pub fn summary(&self, opt_cost: Option<u64>) -> RunSummary {
        RunSummary {
            k: self.k,
            cost: self.cost,
            opt_cost,
            ratio: opt_cost.map(|o| if o == 0 { 1.0 } else { self.cost as f64 / o as f64 }),
            rounds: self.trace.rounds,
            oracle_calls: self.trace.oracle_calls,
            epochs: self.augmentations.iter().map(|a| a.epochs.len()).sum(),
        }
    }
}

struct Attempt {
    subset: EdgeSubset,
    augmentations: Vec<AugmentationRun>,
    trace: RoundTrace,
    finished: bool,
}

fn attempt(g: &WeightedMultigraph, k: usize, config: &AugmentConfig, seed: u64) -> Result<Attempt> {
    let mut trace = RoundTrace::default();
    let mut h = mst(g)?;
    trace.record_oracle("minimum spanning tree");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut augmentations = Vec::new();
    for i in 2..=k {
        match augment(g, &h, i, config, rng.random()) {
            Ok(run) => {
                h = h.union(&run.added);
                trace.absorb(&run.trace);
                augmentations.push(run);
            }
            Err(Error::AugmentationIncomplete(_)) => {
                return Ok(Attempt { subset: h, augmentations, trace, finished: false });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Attempt { subset: h, augmentations, trace, finished: true })
}

/// k-ECSS: an MST raised one connectivity level at a time by augmentation,
/// repeated `restarts` times keeping the cheapest solution.
pub fn kecss(g: &WeightedMultigraph, k: usize, config: &KecssConfig, seed: u64) -> Result<KecssRun> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let mut trace = RoundTrace::default();
    trace.record_oracle("input connectivity");
    if oracle::min_cut(g) < k {
        return Err(Error::NotKConnected(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..config.restarts.max(1)).map(|_| rng.random()).collect();
    let attempts = par::map(&seeds, |&s| attempt(g, k, &config.augment, s));
    let mut best: Option<Attempt> = None;
    let mut restart_costs = Vec::with_capacity(seeds.len());
    for a in attempts {
        let a = a?;
        trace.absorb(&a.trace);
        if !a.finished {
            restart_costs.push(None);
            continue;
        }
        let cost = g.weight_of(&a.subset);
        restart_costs.push(Some(cost));
        if best.as_ref().is_none_or(|b| cost < g.weight_of(&b.subset)) {
            best = Some(a);
        }
    }
    let best = best.ok_or(Error::AugmentationIncomplete(k))?;
    Ok(KecssRun {
        k,
        cost: g.weight_of(&best.subset),
        subset: best.subset,
        restart_costs,
        augmentations: best.augmentations,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BicriteriaRun {
    pub subset: EdgeSubset,
    pub cost: u64,
    /// Per-part connectivity scale.
    pub rho: usize,
    pub parts: usize,
    /// Connectivity each part was solved to.
    pub part_targets: Vec<usize>,
    pub union_connectivity: usize,
    /// True when `k < rho` and the plain k-ECSS result was returned.
    pub fallback: bool,
    pub trace: RoundTrace,
}

/// Partition attempts before settling for the best partition seen.
const PARTITION_TRIES: usize = 16;

/// Bicriteria variant: edges are split at random into `k / rho` parts, each
/// solved to connectivity `ceil(rho (1 - epsilon))`; the union is returned.
/// `rho` defaults to `ceil(log2 n / epsilon^2)`.
pub fn bicriteria(
    g: &WeightedMultigraph,
    k: usize,
    epsilon: f64,
    rho: Option<usize>,
    config: &KecssConfig,
    seed: u64,
) -> Result<BicriteriaRun> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let rho = rho.unwrap_or_else(|| ((g.n().max(2) as f64).log2() / (epsilon * epsilon)).ceil() as usize);
    if rho == 0 {
        return Err(Error::InvalidParams("rho must be positive".into()));
    }
    if k < rho {
        let run = kecss(g, k, config, seed)?;
        return Ok(BicriteriaRun {
            cost: run.cost,
            union_connectivity: oracle::min_cut(&g.restrict(&run.subset)?),
            subset: run.subset,
            rho,
            parts: 1,
            part_targets: vec![k],
            fallback: true,
            trace: run.trace,
        });
    }
    let mut trace = RoundTrace::default();
    trace.record_oracle("input connectivity");
    if oracle::min_cut(g) < k {
        return Err(Error::NotKConnected(k));
    }
    let parts = k / rho;
    let target = ((rho as f64) * (1.0 - epsilon)).ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(usize, Vec<EdgeSubset>, Vec<usize>)> = None;
    for _ in 0..PARTITION_TRIES {
        let mut split = vec![EdgeSubset::new(g.id_bound()); parts];
        for e in g.edges() {
            split[rng.random_range(0..parts)].insert(e.id);
        }
        let mut lambdas = Vec::with_capacity(parts);
        for s in &split {
            trace.record_oracle("part connectivity");
            lambdas.push(oracle::min_cut(&g.restrict(s)?));
        }
        let worst = lambdas.iter().copied().min().unwrap_or(0);
        if best.as_ref().is_none_or(|b| worst > b.0) {
            best = Some((worst, split, lambdas));
        }
        if worst >= target {
            break;
        }
    }
    let (worst, split, lambdas) = best.expect("at least one partition");
    if worst == 0 {
        return Err(Error::Disconnected);
    }
    let part_targets: Vec<usize> = lambdas.iter().map(|&l| l.min(target)).collect();
    let mut subset = EdgeSubset::new(g.id_bound());
    for (i, s) in split.iter().enumerate() {
        let pg = g.restrict(s)?;
        let run = kecss(&pg, part_targets[i], config, rng.random())?;
        trace.absorb(&run.trace);
        subset = subset.union(&EdgeSubset::from_ids(g.id_bound(), run.subset.iter()));
    }
    trace.record_oracle("union connectivity");
    let union_connectivity = oracle::min_cut(&g.restrict(&subset)?);
    let floor = parts * part_targets.iter().copied().min().unwrap_or(0);
    if union_connectivity < floor {
        return Err(Error::NotKConnected(floor));
    }
    Ok(BicriteriaRun {
        cost: g.weight_of(&subset),
        subset,
        rho,
        parts,
        part_targets,
        union_connectivity,
        fallback: false,
        trace,
    })
}
