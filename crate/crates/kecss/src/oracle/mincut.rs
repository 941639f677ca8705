use std::collections::VecDeque;

use crate::graph::VertexId;

/// Global min cut of an unweighted multigraph given as endpoint pairs
/// (Stoer–Wagner on edge multiplicities). Returns 0 when `n < 2` or when the
/// graph is disconnected.
pub fn min_cut_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> usize {
    if n < 2 {
        return 0;
    }
    let mut w = vec![vec![0usize; n]; n];
    for &(u, v) in pairs {
        w[u][v] += 1;
        w[v][u] += 1;
    }
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    while alive.len() > 1 {
        let k = alive.len();
        let mut used = vec![false; k];
        let mut key = vec![0usize; k];
        let mut prev = 0;
        let mut last = 0;
        for step in 0..k {
            let mut sel = usize::MAX;
            for i in 0..k {
                if !used[i] && (sel == usize::MAX || key[i] > key[sel]) {
                    sel = i;
                }
            }
            used[sel] = true;
            if step == k - 1 {
                best = best.min(key[sel]);
                last = sel;
            } else {
                prev = sel;
                let a = alive[sel];
                for i in 0..k {
                    if !used[i] {
                        key[i] += w[a][alive[i]];
                    }
                }
            }
        }
        let (s, t) = (alive[prev], alive[last]);
        for &x in &alive {
            w[s][x] += w[t][x];
            w[x][s] = w[s][x];
        }
        w[s][s] = 0;
        alive.swap_remove(last);
    }
    best
}

/// Unit-capacity undirected flow network.
struct FlowNet {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<i32>,
}

impl FlowNet {
    fn new(n: usize, pairs: &[(VertexId, VertexId)]) -> Self {
        let mut net = FlowNet { head: vec![usize::MAX; n], next: Vec::new(), to: Vec::new(), cap: Vec::new() };
        for &(u, v) in pairs {
            net.arc(u, v);
            net.arc(v, u);
        }
        net
    }

    fn arc(&mut self, u: usize, v: usize) {
        self.to.push(v);
        self.cap.push(1);
        self.next.push(self.head[u]);
        self.head[u] = self.to.len() - 1;
    }

    fn reset(&mut self) {
        self.cap.iter_mut().for_each(|c| *c = 1);
    }

    /// Max flow from `s` to `t`, stopping once `limit` is reached.
    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.head.len();
        let mut flow = 0;
        let mut via = vec![usize::MAX; n];
        while flow < limit {
            via.iter_mut().for_each(|x| *x = usize::MAX);
            let mut queue = VecDeque::from([s]);
            via[s] = usize::MAX - 1;
            while let Some(x) = queue.pop_front() {
                if x == t {
                    break;
                }
                let mut a = self.head[x];
                while a != usize::MAX {
                    let y = self.to[a];
                    if self.cap[a] > 0 && via[y] == usize::MAX {
                        via[y] = a;
                        queue.push_back(y);
                    }
                    a = self.next[a];
                }
            }
            if via[t] == usize::MAX {
                break;
            }
            let mut x = t;
            while x != s {
                let a = via[x];
                self.cap[a] -= 1;
                self.cap[a ^ 1] += 1;
                x = self.to[a ^ 1];
            }
            flow += 1;
        }
        flow
    }
}

/// Global min cut via `n - 1` max-flow computations from vertex 0; an
/// implementation independent of [`min_cut_pairs`].
pub fn min_cut_flow(n: usize, pairs: &[(VertexId, VertexId)]) -> usize {
    if n < 2 {
        return 0;
    }
    let mut degree = vec![0usize; n];
    for &(u, v) in pairs {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut net = FlowNet::new(n, pairs);
    let mut best = degree.into_iter().min().unwrap_or(0);
    for t in 1..n {
        net.reset();
        best = best.min(net.max_flow(0, t, best));
        if best == 0 {
            break;
        }
    }
    best
}

/// True iff the multigraph has edge connectivity at least `k`.
pub fn edge_connectivity_at_least(n: usize, pairs: &[(VertexId, VertexId)], k: usize) -> bool {
    if n < 2 || k == 0 {
        return true;
    }
    let mut deg = vec![0usize; n];
    for &(u, v) in pairs {
        deg[u] += 1;
        deg[v] += 1;
    }
    if deg.iter().any(|&d| d < k) {
        return false;
    }
    let mut net = FlowNet::new(n, pairs);
    (1..n).all(|t| {
        net.reset();
        net.max_flow(0, t, k) >= k
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_cases() {
        assert_eq!(min_cut_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), 2);
        assert_eq!(min_cut_flow(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), 2);
        assert_eq!(min_cut_pairs(3, &[(0, 1)]), 0);
        assert_eq!(min_cut_flow(3, &[(0, 1)]), 0);
        assert!(edge_connectivity_at_least(2, &[(0, 1), (0, 1), (1, 0)], 3));
        assert!(!edge_connectivity_at_least(2, &[(0, 1), (0, 1)], 3));
    }

    #[test]
    fn stoer_wagner_matches_flow_on_random_multigraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.random_range(2..40);
            let m = rng.random_range(n..4 * n);
            let pairs: Vec<_> = (0..m)
                .map(|_| {
                    let u = rng.random_range(0..n);
                    let mut v = rng.random_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u, v)
                })
                .collect();
            let a = min_cut_pairs(n, &pairs);
            assert_eq!(a, min_cut_flow(n, &pairs));
            assert!(edge_connectivity_at_least(n, &pairs, a));
            assert!(!edge_connectivity_at_least(n, &pairs, a + 1));
        }
    }
}
