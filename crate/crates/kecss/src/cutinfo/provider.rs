use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{minimal_path, PathEnds};
use crate::error::Result;
use crate::graph::EdgeId;
use crate::respect::CoverTable;
use crate::tree::SpanTree;

/// Source of the candidate paths each tree edge tries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathProvider {
    /// Exactly the minimal path, computed centrally.
    Oracle,
    /// The minimal path hidden among `decoys` random paths through the edge.
    Padded { decoys: usize, seed: u64 },
}

/// Candidate paths per tree edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidatePaths {
    pub paths: BTreeMap<EdgeId, Vec<PathEnds>>,
}

impl CandidatePaths {
    pub fn of(&self, t: EdgeId) -> &[PathEnds] {
        self.paths.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest number of candidates of any edge.
    pub fn max_len(&self) -> usize {
        self.paths.values().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn candidate_paths(provider: PathProvider, tree: &SpanTree, table: &CoverTable, k: u64) -> Result<CandidatePaths> {
    let mut paths = BTreeMap::new();
    for &t in table.tree_edges() {
        let truth = minimal_path(tree, table, t, k)?;
        let list = match provider {
            PathProvider::Oracle => vec![truth],
            PathProvider::Padded { decoys, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
                let u = tree.lower(t)?;
                let below = tree.subtree(u);
                let above: Vec<_> = (0..tree.n()).filter(|&v| !tree.is_ancestor(u, v)).collect();
                let mut list: Vec<PathEnds> = (0..decoys)
                    .map(|_| PathEnds {
                        low: below[rng.random_range(0..below.len())],
                        high: above[rng.random_range(0..above.len())],
                    })
                    .collect();
                list.insert(rng.random_range(0..=decoys), truth);
                list
            }
        };
        paths.insert(t, list);
    }
    Ok(CandidatePaths { paths })
}
