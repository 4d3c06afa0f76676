//! Mutex watershed: greedy partitioning of graphs with attractive and
//! repulsive weighted edges.
//!
//! The crate provides the solvers themselves (`mws`), the signed-graph data
//! model and reference consistency predicates (`graph`, `active`), a seeded
//! watershed special case with a maximum-spanning-forest cross-check
//! (`seeded`), brute-force oracles that make the optimality guarantees
//! testable (`oracle`), grid-graph construction from affinity volumes
//! (`grid`), segmentation comparison metrics (`metrics`), and an empirical
//! runtime-scaling harness (`bench`).

pub mod active;
pub mod bench;
pub mod error;
pub mod format;
pub mod gen;
pub mod graph;
pub mod grid;
pub mod metrics;
pub mod mws;
pub mod oracle;
pub mod seeded;
pub mod verify;
pub mod volume_io;

pub use active::{
    clustering_of, connected, has_violating_cycle, is_forest, mutex_related, ActiveSet, Clustering,
};
pub use error::{Error, Result};
pub use format::{graph_from_str, graph_to_string, read_graph, write_graph};
pub use graph::{Edge, EdgeRef, Polarity, SignedGraph};
pub use mws::{
    greedy_edge, solve_efficient, solve_naive, sort_edges, MutexUnionFind, SolveOptions,
    SolveResult, SolveStats,
};
pub use oracle::{
    brute_force_multicut, brute_force_mws, cycle_inequalities_hold, minimal_dominant_power,
    signed_costs_from_mws_graph, DominantPower, EnergyReport, MulticutSolution,
};
pub use seeded::{seeded_msf_reference, seeded_mws, SeedSet};
