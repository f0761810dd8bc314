//! Markov transition networks built from quantized sequences, and their
//! summary statistics.

mod export;
mod louvain;
mod quantize;
mod significance;
mod stats;
mod transition;

pub use export::{export_graph, to_dot, to_graphml, GraphFormat};
pub use louvain::{modularity, modularity_louvain};
pub use quantize::{discretize, QuantizerConfig, QuantizerMode};
pub use significance::significance;
pub use stats::{
    avg_degree, avg_path_length, graph_stats, pagerank, GraphStats, PathLength, PAGERANK_DAMPING,
    PAGERANK_TOL,
};
pub use transition::{transition_matrix, TransitionGraph};

use crate::error::Result;

/// Quantize `x` and build its transition graph in one go.
pub fn sequence_graph(x: &[f64], cfg: &QuantizerConfig) -> Result<TransitionGraph> {
    transition_matrix(&discretize(x, cfg)?, cfg.bins)
}
