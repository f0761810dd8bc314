use std::collections::VecDeque;

use log::warn;

use crate::graph::{modularity_louvain, TransitionGraph};

/// Mean over nodes of `(in-degree + out-degree) / 2`, counting distinct arcs.
/// Isolated nodes count toward the mean.
pub fn avg_degree(g: &TransitionGraph) -> f64 {
    let q = g.node_count();
    if q == 0 {
        return 0.0;
    }
    // every arc adds one to an out-degree and one to an in-degree
    g.arc_count() as f64 / q as f64
}

/// PageRank by power iteration on the row-stochastic matrix.
///
/// Mass on nodes without outgoing arcs is spread uniformly. Stops once the L1
/// change between iterates drops below `tol`.
pub fn pagerank(g: &TransitionGraph, damping: f64, tol: f64) -> Vec<f64> {
    let q = g.node_count();
    if q == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / q as f64;
    let out_sums: Vec<f64> = (0..q).map(|i| g.row(i).iter().sum()).collect();
    let mut rank = vec![uniform; q];
    let mut next = vec![0.0; q];
    for _ in 0..10_000 {
        let dangling: f64 = rank
            .iter()
            .zip(&out_sums)
            .filter(|(_, &s)| s == 0.0)
            .map(|(r, _)| r)
            .sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        next.fill(base);
        for i in 0..q {
            if out_sums[i] == 0.0 {
                continue;
            }
            let share = damping * rank[i] / out_sums[i];
            for (n, &w) in next.iter_mut().zip(g.row(i)) {
                *n += share * w;
            }
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < tol {
            break;
        }
    }
    rank
}

/// Mean path length and whether any pair was reachable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLength {
    pub mean: f64,
    pub reachable_pairs: usize,
}

impl PathLength {
    /// True when no ordered pair was connected and `mean` is a placeholder 0.
    pub fn is_degenerate(&self) -> bool {
        self.reachable_pairs == 0
    }
}

/// Mean unweighted shortest-path length over ordered reachable pairs `i ≠ j`.
pub fn avg_path_length(g: &TransitionGraph) -> PathLength {
    let q = g.node_count();
    let succ = g.successors();
    let mut total = 0usize;
    let mut pairs = 0usize;
    let mut dist = vec![usize::MAX; q];
    let mut queue = VecDeque::new();
    for s in 0..q {
        dist.fill(usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &succ[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v];
                    pairs += 1;
                    queue.push_back(v);
                }
            }
        }
    }
    if pairs == 0 {
        warn!("no reachable node pairs; average path length reported as 0");
        return PathLength {
            mean: 0.0,
            reachable_pairs: 0,
        };
    }
    PathLength {
        mean: total as f64 / pairs as f64,
        reachable_pairs: pairs,
    }
}

/// The four per-graph summary statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub avg_degree: f64,
    pub modularity: f64,
    pub pagerank_max: f64,
    pub avg_path_length: f64,
}

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;

pub fn graph_stats(g: &TransitionGraph) -> GraphStats {
    let pr = pagerank(g, PAGERANK_DAMPING, PAGERANK_TOL);
    GraphStats {
        avg_degree: avg_degree(g),
        modularity: modularity_louvain(g).1,
        pagerank_max: pr.iter().copied().fold(0.0, f64::max),
        avg_path_length: avg_path_length(g).mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(q: usize) -> TransitionGraph {
        let arcs: Vec<_> = (0..q)
            .flat_map(|i| (0..q).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        TransitionGraph::from_arcs(q, &arcs).unwrap()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(avg_degree(&complete(3)), 2.0);
        assert_eq!(avg_degree(&TransitionGraph::from_arcs(4, &[]).unwrap()), 0.0);
        let loop_only = TransitionGraph::from_arcs(2, &[(0, 0)]).unwrap();
        assert_eq!(avg_degree(&loop_only), 0.5);
    }

    #[test]
    fn pagerank_examples() {
        let cycle = TransitionGraph::from_arcs(2, &[(0, 1), (1, 0)]).unwrap();
        let pr = pagerank(&cycle, 0.85, 1e-12);
        assert!((pr[0] - 0.5).abs() < 1e-12 && (pr[1] - 0.5).abs() < 1e-12);

        let star = TransitionGraph::from_arcs(6, &[(1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]).unwrap();
        let pr = pagerank(&star, 0.85, 1e-12);
        assert!((1..6).all(|i| pr[0] > pr[i]));
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_length_examples() {
        let tri = TransitionGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(avg_path_length(&tri).mean, 1.5);
        assert_eq!(avg_path_length(&complete(4)).mean, 1.0);
        let empty = avg_path_length(&TransitionGraph::from_arcs(3, &[(1, 1)]).unwrap());
        assert!(empty.is_degenerate());
        assert_eq!(empty.mean, 0.0);
    }
}
