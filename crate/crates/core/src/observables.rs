//! Order parameter, +1 density, consensus test and opinion-cluster census.

use crate::dynamics::OpinionState;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::unionfind::UnionFind;

/// Connected components of the subgraph that keeps only edges joining
/// agents of equal opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCensus {
    pub cluster_count: usize,
    /// Sorted largest first.
    pub cluster_sizes: Vec<usize>,
    pub largest_fraction: f64,
}

impl ClusterCensus {
    pub fn largest(&self) -> usize {
        self.cluster_sizes.first().copied().unwrap_or(0)
    }
}

/// η = |Σσᵢ| / N.
pub fn order_parameter(state: &OpinionState) -> f64 {
    eta_from_plus(state.plus_count(), state.len())
}

/// Fraction of agents holding `+1`.
pub fn rho_plus(state: &OpinionState) -> f64 {
    state.plus_count() as f64 / state.len() as f64
}

pub fn is_consensus(state: &OpinionState) -> bool {
    match state.opinions.first() {
        Some(&first) => state.opinions.iter().all(|&o| o == first),
        None => true,
    }
}

pub fn opinion_clusters(state: &OpinionState, g: &Graph) -> Result<ClusterCensus> {
    let n = g.node_count();
    if state.len() != n {
        return Err(Error::LengthMismatch { state: state.len(), graph: n });
    }
    let ops = &state.opinions;
    let mut uf = UnionFind::new(n);
    for (u, v) in g.edges() {
        if ops[u] == ops[v] {
            uf.union(u, v);
        }
    }
    let mut cluster_sizes = uf.set_sizes();
    cluster_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ClusterCensus {
        cluster_count: cluster_sizes.len(),
        largest_fraction: cluster_sizes[0] as f64 / n as f64,
        cluster_sizes,
    })
}

/// η from a `+1` count, for callers that track it incrementally.
pub(crate) fn eta_from_plus(plus: usize, n: usize) -> f64 {
    (2 * plus as i64 - n as i64).unsigned_abs() as f64 / n as f64
}
