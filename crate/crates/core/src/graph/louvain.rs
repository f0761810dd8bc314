//! Louvain community detection on the symmetrized transition graph.

use crate::graph::TransitionGraph;

/// Dense symmetric adjacency in the convention where a self-loop of weight
/// `w` contributes `2w` to the diagonal (and so `2w` to its node's degree).
#[derive(Debug, Clone)]
struct Adjacency {
    n: usize,
    a: Vec<f64>,
}

impl Adjacency {
    fn symmetrized(g: &TransitionGraph) -> Self {
        let n = g.node_count();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = if i == j {
                    2.0 * g.weight(i, i)
                } else {
                    0.5 * (g.weight(i, j) + g.weight(j, i))
                };
            }
        }
        Adjacency { n, a }
    }

    fn degrees(&self) -> Vec<f64> {
        self.a.chunks_exact(self.n).map(|r| r.iter().sum()).collect()
    }

    /// Collapses communities into nodes, keeping total weight.
    fn aggregate(&self, community: &[usize], k: usize) -> Adjacency {
        let mut a = vec![0.0; k * k];
        for i in 0..self.n {
            for j in 0..self.n {
                a[community[i] * k + community[j]] += self.a[i * self.n + j];
            }
        }
        Adjacency { n: k, a }
    }
}

fn modularity_of(adj: &Adjacency, community: &[usize]) -> f64 {
    let k = adj.degrees();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..adj.n {
        for j in 0..adj.n {
            if community[i] == community[j] {
                q += adj.a[i * adj.n + j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Relabels communities `0..k` in order of first appearance.
fn compact(community: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Local moving phase; returns whether any node changed community.
fn move_nodes(adj: &Adjacency, community: &mut [usize]) -> bool {
    let n = adj.n;
    let k = adj.degrees();
    let two_m: f64 = k.iter().sum();
    let mut tot = vec![0.0; n];
    for i in 0..n {
        tot[community[i]] += k[i];
    }
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut improved = false;
    loop {
        let mut moved = false;
        for i in 0..n {
            let own = community[i];
            tot[own] -= k[i];
            for j in 0..n {
                let w = adj.a[i * n + j];
                if j != i && w > 0.0 {
                    let c = community[j];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += w;
                }
            }
            // gain of joining c, up to a positive factor: links_c - k_i·tot_c / 2m
            let gain = |c: usize, links: &[f64]| links[c] - k[i] * tot[c] / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &links);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, &links);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
            community[i] = best;
            tot[best] += k[i];
            if best != own {
                moved = true;
                improved = true;
            }
        }
        if !moved {
            break;
        }
    }
    improved
}

/// Louvain partition (community id per node) and its Newman modularity.
///
/// The directed graph is symmetrized by averaging `w_ij` and `w_ji`; nodes are
/// visited in index order so the result is deterministic.
pub fn modularity_louvain(g: &TransitionGraph) -> (Vec<usize>, f64) {
    let base = Adjacency::symmetrized(g);
    let n = base.n;
    let mut partition: Vec<usize> = (0..n).collect();
    if base.degrees().iter().sum::<f64>() == 0.0 {
        return (partition, 0.0);
    }
    let mut adj = base.clone();
    loop {
        let mut community: Vec<usize> = (0..adj.n).collect();
        let improved = move_nodes(&adj, &mut community);
        let k = compact(&mut community);
        if !improved || k == adj.n {
            break;
        }
        for p in partition.iter_mut() {
            *p = community[*p];
        }
        adj = adj.aggregate(&community, k);
    }
    compact(&mut partition);
    let q = modularity_of(&base, &partition);
    (partition, q)
}

/// Modularity of a given partition on the symmetrized graph.
pub fn modularity(g: &TransitionGraph, partition: &[usize]) -> f64 {
    modularity_of(&Adjacency::symmetrized(g), partition)
}
