use crate::error::{Error, Result};

/// Weighted digraph on `Q` bins whose arc `i → j` carries the empirical
/// probability that bin `i` is followed by bin `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    q: usize,
    /// Row-major `Q × Q` weights.
    weights: Vec<f64>,
}

impl TransitionGraph {
    /// Builds a graph from a row-major square matrix with entries in `[0, 1]`.
    pub fn from_matrix(q: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != q * q {
            return Err(Error::dim(format!(
                "{q} nodes need {} weights, got {}",
                q * q,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::arg("transition weights must lie in [0, 1]"));
        }
        Ok(TransitionGraph { q, weights })
    }

    /// Unit-weight digraph from an arc list; handy for fixtures.
    pub fn from_arcs(q: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut w = vec![0.0; q * q];
        for &(i, j) in arcs {
            if i >= q || j >= q {
                return Err(Error::arg(format!("arc ({i}, {j}) outside {q} nodes")));
            }
            w[i * q + j] = 1.0;
        }
        Self::from_matrix(q, w)
    }

    pub fn node_count(&self) -> usize {
        self.q
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.q + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.q..(i + 1) * self.q]
    }

    /// Arcs with positive weight, ordered by (source, target).
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(k, &w)| (k / self.q, k % self.q, w))
    }

    pub fn arc_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Successor lists, ascending.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.q)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }
}

/// First-order Markov matrix of a bin sequence, as a graph.
///
/// Rows of bins never followed by anything stay all-zero.
pub fn transition_matrix(bins: &[usize], q: usize) -> Result<TransitionGraph> {
    if bins.len() < 2 {
        return Err(Error::arg("need at least two symbols for a transition"));
    }
    if let Some(&b) = bins.iter().find(|&&b| b >= q) {
        return Err(Error::arg(format!("bin {b} outside 0..{q}")));
    }
    let mut counts = vec![0u64; q * q];
    for pair in bins.windows(2) {
        counts[pair[0] * q + pair[1]] += 1;
    }
    let mut weights = vec![0.0; q * q];
    for i in 0..q {
        let row = &counts[i * q..(i + 1) * q];
        let total: u64 = row.iter().sum();
        if total > 0 {
            for (w, &c) in weights[i * q..(i + 1) * q].iter_mut().zip(row) {
                *w = c as f64 / total as f64;
            }
        }
    }
    TransitionGraph::from_matrix(q, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_consecutive_pairs() {
        let g = transition_matrix(&[0, 0, 1, 0], 2).unwrap();
        assert_eq!(g.matrix(), &[0.5, 0.5, 1.0, 0.0]);
    }

    #[test]
    fn unvisited_rows_stay_zero() {
        let g = transition_matrix(&[0, 1], 3).unwrap();
        assert!(g.row(2).iter().all(|&w| w == 0.0));
        assert!(g.row(1).iter().all(|&w| w == 0.0));
        assert_eq!(g.row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn out_of_range_bin_rejected() {
        assert!(transition_matrix(&[0, 3], 3).is_err());
        assert!(transition_matrix(&[0], 3).is_err());
    }

    #[test]
    fn arcs_in_order() {
        let g = transition_matrix(&[1, 0, 1, 1], 2).unwrap();
        let arcs: Vec<_> = g.arcs().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(arcs, vec![(0, 1), (1, 0), (1, 1)]);
        assert_eq!(g.arc_count(), 3);
    }
}
