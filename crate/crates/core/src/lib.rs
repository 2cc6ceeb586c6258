//! Monte Carlo engine for the nonlinear voter model.
//!
//! Agents sit on the nodes of an undirected graph and hold one of two
//! opinions. At every synchronous step each agent adopts `+1` with
//! probability `n₊^α / (n₊^α + n₋^α)`, where the counts run over the agent
//! and its neighbours. The crate provides the network substrates, the
//! update rule, the observables (order parameter, cluster census), the
//! mean-field rate equation and seeded ensemble experiments.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod meanfield;
pub mod observables;
pub mod unionfind;

pub use dynamics::{Alpha, NeighborhoodCount, Opinion, OpinionState, SyncStepper};
pub use error::{Error, Result};
pub use graph::{DegreeStats, Graph, TopologyKind, TopologySpec};
pub use observables::ClusterCensus;
