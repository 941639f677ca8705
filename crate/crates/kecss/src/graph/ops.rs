use petgraph::unionfind::UnionFind;

use super::{EdgeSubset, VertexId, WeightedMultigraph};
use crate::error::{Error, Result};
use crate::oracle;

/// Component label per vertex of the sub-multigraph, and the component count.
pub fn components(g: &WeightedMultigraph, sub: &EdgeSubset) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::<usize>::new(g.n());
    for id in sub.iter() {
        if let Some(e) = g.get(id) {
            uf.union(e.u, e.v);
        }
    }
    let labels = uf.into_labeling();
    let mut remap = vec![usize::MAX; g.n()];
    let mut count = 0;
    let mut out = vec![0; g.n()];
    for (v, &root) in labels.iter().enumerate() {
        if remap[root] == usize::MAX {
            remap[root] = count;
            count += 1;
        }
        out[v] = remap[root];
    }
    (count, out)
}

pub fn is_connected(g: &WeightedMultigraph, sub: &EdgeSubset) -> bool {
    g.n() <= 1 || components(g, sub).0 == 1
}

/// True iff the spanning sub-multigraph stays connected after removing any
/// `k - 1` edges.
pub fn is_k_edge_connected(g: &WeightedMultigraph, sub: &EdgeSubset, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    g.check_subset(sub)?;
    if !is_connected(g, sub) {
        return Ok(false);
    }
    Ok(oracle::edge_connectivity_at_least(g.n(), &g.endpoint_pairs(sub), k))
}

/// Minimum spanning tree by Kruskal, ties broken by ascending edge id.
pub fn mst(g: &WeightedMultigraph) -> Result<EdgeSubset> {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by_key(|&i| (g.edges()[i].w, g.edges()[i].id));
    let mut uf = UnionFind::<VertexId>::new(g.n());
    let mut out = g.empty_subset();
    let mut taken = 0;
    for i in order {
        let e = &g.edges()[i];
        if uf.union(e.u, e.v) {
            out.insert(e.id);
            taken += 1;
        }
    }
    if taken + 1 < g.n() {
        return Err(Error::Disconnected);
    }
    Ok(out)
}

/// Global unweighted min cut of the sub-multigraph; 0 when it is disconnected.
pub fn min_cut_value(g: &WeightedMultigraph, sub: &EdgeSubset) -> Result<usize> {
    g.check_subset(sub)?;
    if !is_connected(g, sub) {
        return Ok(0);
    }
    Ok(oracle::min_cut_of(g.n(), &g.endpoint_pairs(sub)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> WeightedMultigraph {
        let t: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        WeightedMultigraph::from_triples(n, &t).unwrap()
    }

    #[test]
    fn triangle_is_two_connected() {
        let g = cycle(3);
        assert!(is_k_edge_connected(&g, &g.full_subset(), 2).unwrap());
    }

    #[test]
    fn path_has_a_bridge() {
        let g = WeightedMultigraph::from_triples(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        assert!(!is_k_edge_connected(&g, &g.full_subset(), 2).unwrap());
    }

    #[test]
    fn c4_with_chord_is_not_three_connected() {
        let g = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (1, 3, 1)]).unwrap();
        assert!(!is_k_edge_connected(&g, &g.full_subset(), 3).unwrap());
        assert_eq!(min_cut_value(&g, &g.full_subset()).unwrap(), 2);
    }

    #[test]
    fn invalid_subset_is_an_error() {
        let g = cycle(3);
        let bad = EdgeSubset::from_ids(10, [9]);
        assert_eq!(is_k_edge_connected(&g, &bad, 1), Err(Error::InvalidSubset(9)));
    }

    #[test]
    fn mst_of_weighted_triangle() {
        let g = WeightedMultigraph::from_triples(3, &[(0, 1, 1), (1, 2, 2), (0, 2, 3)]).unwrap();
        assert_eq!(mst(&g).unwrap().to_vec(), vec![0, 1]);
    }

    #[test]
    fn mst_ties_prefer_low_ids() {
        assert_eq!(mst(&cycle(4)).unwrap().to_vec(), vec![0, 1, 2]);
    }

    #[test]
    fn mst_of_disconnected_graph_fails() {
        let g = WeightedMultigraph::from_triples(3, &[(0, 1, 1)]).unwrap();
        assert_eq!(mst(&g), Err(Error::Disconnected));
    }

    #[test]
    fn min_cut_examples() {
        let c4 = cycle(4);
        assert_eq!(min_cut_value(&c4, &c4.full_subset()).unwrap(), 2);
        let tree = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (1, 3, 1)]).unwrap();
        assert_eq!(min_cut_value(&tree, &tree.full_subset()).unwrap(), 1);
        let k4 = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)])
            .unwrap();
        assert_eq!(min_cut_value(&k4, &k4.full_subset()).unwrap(), 3);
        let split = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        assert_eq!(min_cut_value(&split, &split.full_subset()).unwrap(), 0);
    }

    #[test]
    fn doubled_tree_has_min_cut_two() {
        let g = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (0, 1, 1), (1, 2, 1), (1, 2, 1), (1, 3, 1), (1, 3, 1)])
            .unwrap();
        assert_eq!(min_cut_value(&g, &g.full_subset()).unwrap(), 2);
    }
}
