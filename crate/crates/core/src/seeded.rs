//! Seeded watershed as a mutex problem, plus the classical
//! maximum-spanning-forest construction it must agree with.
//!
//! Seeds are turned into pairwise mutex constraints at an infinite priority
//! tier (a separate phase processed before all finite edges, not a float
//! sentinel). The reference route instead attaches every seed to an
//! auxiliary vertex with infinitely attractive edges, runs Kruskal, and
//! drops the auxiliary edges.

use crate::active::{Clustering, SimpleUnionFind};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::mws::{sort_edges, MutexUnionFind};

/// A nonempty set of distinct seed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    seeds: Vec<usize>,
}

impl SeedSet {
    /// Sorts the ids; rejects empty input and duplicates.
    pub fn new(mut seeds: Vec<usize>) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::Input("seed set is empty".into()));
        }
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("duplicate seed vertex".into()));
        }
        Ok(SeedSet { seeds })
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_seeded_input(graph: &SignedGraph, seeds: &SeedSet) -> Result<()> {
    if graph.num_repulsive() > 0 {
        return Err(Error::Input(
            "seeded watershed takes a purely attractive graph; repulsive edges present".into(),
        ));
    }
    for &s in seeds.seeds() {
        graph.check_vertex(s)?;
    }
    Ok(())
}

/// Seeded watershed via mutex constraints: every unordered seed pair gets a
/// mutex at infinite priority, then the ordinary sweep runs over the
/// attractive edges. Each seed ends up in its own cluster; components not
/// reachable from any seed form their own spanning-forest clusters.
pub fn seeded_mws(graph: &SignedGraph, seeds: &SeedSet) -> Result<Clustering> {
    check_seeded_input(graph, seeds)?;
    let mut uf = MutexUnionFind::new(graph.num_vertices());
    // Infinite tier, seed pairs in lexicographic order. No merges have
    // happened yet, so every pair is addable.
    let mut pair_id = 0;
    for (i, &a) in seeds.seeds().iter().enumerate() {
        for &b in &seeds.seeds()[i + 1..] {
            uf.add_mutex(a, b, pair_id);
            pair_id += 1;
        }
    }
    for e in sort_edges(graph) {
        let edge = graph.edge(e);
        if !uf.connected(edge.u, edge.v) && !uf.check_mutex(edge.u, edge.v) {
            uf.merge(edge.u, edge.v);
        }
    }
    Ok(uf.into_clustering())
}

/// Classical construction: augment with an auxiliary vertex joined to every
/// seed at infinite attraction, take a maximum spanning tree (Kruskal, ties
/// by edge id), delete the auxiliary edges, and read off the forest's
/// components.
pub fn seeded_msf_reference(graph: &SignedGraph, seeds: &SeedSet) -> Result<Clustering> {
    check_seeded_input(graph, seeds)?;
    let n = graph.num_vertices();
    let aux = n;
    let mut uf = SimpleUnionFind::new(n + 1);
    for &s in seeds.seeds() {
        uf.union(aux, s);
    }
    let mut forest = Vec::new();
    for e in sort_edges(graph) {
        let edge = graph.edge(e);
        if uf.union(edge.u, edge.v) {
            forest.push((edge.u, edge.v));
        }
    }
    // Deleting the auxiliary edges leaves the recorded original edges.
    let mut components = SimpleUnionFind::new(n);
    for (u, v) in forest {
        components.union(u, v);
    }
    Ok(components.into_clustering())
}
