//! Deterministic random-instance generators for property checks and the
//! `verify` command. All functions are pure in the RNG: the same seeded
//! generator yields the same instance.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::active::{self, ActiveSet};
use crate::graph::{Polarity, SignedGraph};
use crate::seeded::SeedSet;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for trial `index` of a run seeded with
/// `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_pair(rng: &mut impl Rng, n: usize) -> (usize, usize) {
    loop {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            return (u, v);
        }
    }
}

/// Distinct (unordered pair, polarity) slots, at most `target` of them.
fn random_slots(
    rng: &mut impl Rng,
    n: usize,
    target: usize,
    repulsive_fraction: f64,
) -> Vec<(usize, usize, Polarity)> {
    let mut used = HashSet::new();
    let mut slots = Vec::new();
    for _ in 0..target {
        for _attempt in 0..16 {
            let (u, v) = random_pair(rng, n);
            let polarity = if rng.random_bool(repulsive_fraction) {
                Polarity::Repulsive
            } else {
                Polarity::Attractive
            };
            if used.insert((u.min(v), u.max(v), polarity)) {
                slots.push((u, v, polarity));
                break;
            }
        }
    }
    slots
}

/// Arbitrary signed graph; weights are drawn from a coarse grid so exact
/// ties are common, exercising the deterministic tie-break.
pub fn random_signed_graph(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
) -> SignedGraph {
    let n = rng.random_range(2..=max_vertices.max(2));
    let target = rng.random_range(0..=max_edges);
    let slots = random_slots(rng, n, target, 0.4);
    let edges: Vec<_> = slots
        .into_iter()
        .map(|(u, v, p)| {
            let weight = if rng.random_bool(0.5) {
                rng.random_range(0..8) as f64 * 0.5
            } else {
                rng.random_range(0..64) as f64 / 8.0
            };
            (u, v, weight, p)
        })
        .collect();
    SignedGraph::new(n, edges).expect("generated edges are valid")
}

/// Signed graph with strictly positive, pairwise distinct integer weights;
/// integers keep the exact-arithmetic dominant-power search cheap.
pub fn random_unique_weight_graph(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
) -> SignedGraph {
    let n = rng.random_range(2..=max_vertices.max(2));
    let target = rng.random_range(0..=max_edges);
    let slots = random_slots(rng, n, target, 0.4);
    let weights = distinct_positive_integers(rng, slots.len(), 3 * max_edges.max(1));
    let edges: Vec<_> = slots
        .into_iter()
        .zip(weights)
        .map(|((u, v, p), w)| (u, v, w, p))
        .collect();
    SignedGraph::new(n, edges).expect("generated edges are valid")
}

fn distinct_positive_integers(rng: &mut impl Rng, count: usize, cap: usize) -> Vec<f64> {
    let mut pool: Vec<usize> = (1..=cap.max(count)).collect();
    pool.shuffle(rng);
    pool.truncate(count);
    pool.into_iter().map(|k| k as f64).collect()
}

/// Connected, purely attractive graph with unique weights, for the seeded
/// watershed equivalence check.
pub fn random_connected_attractive_graph(rng: &mut impl Rng, max_vertices: usize) -> SignedGraph {
    let n = rng.random_range(2..=max_vertices.max(2));
    let mut used = HashSet::new();
    let mut slots = Vec::new();
    // Random spanning tree first, then extra edges.
    for v in 1..n {
        let u = rng.random_range(0..v);
        used.insert((u, v));
        slots.push((u, v));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        for _attempt in 0..16 {
            let (u, v) = random_pair(rng, n);
            if used.insert((u.min(v), u.max(v))) {
                slots.push((u, v));
                break;
            }
        }
    }
    let weights = distinct_positive_integers(rng, slots.len(), 4 * slots.len().max(1));
    let edges: Vec<_> = slots
        .into_iter()
        .zip(weights)
        .map(|((u, v), w)| (u, v, w, Polarity::Attractive))
        .collect();
    SignedGraph::new(n, edges).expect("generated edges are valid")
}

/// Signed graph whose weights are distinct powers of two, so that every
/// weight exceeds the sum of all smaller ones already at exponent one.
/// Exponents stay small enough for cost sums to be exact in f64.
pub fn random_power_of_two_graph(rng: &mut impl Rng, max_vertices: usize) -> SignedGraph {
    let n = rng.random_range(2..=max_vertices.max(2));
    let max_slots = n * (n - 1); // both polarities per pair
    let target = rng.random_range(1..=max_slots.min(24));
    let slots = random_slots(rng, n, target, 0.4);
    let mut exponents: Vec<u32> = (0..slots.len() as u32).collect();
    exponents.shuffle(rng);
    let edges: Vec<_> = slots
        .into_iter()
        .zip(exponents)
        .map(|((u, v, p), k)| (u, v, (2.0f64).powi(k as i32), p))
        .collect();
    SignedGraph::new(n, edges).expect("generated edges are valid")
}

/// Random consistent active set, built by attempting random feasible
/// activations; may be complete or incomplete.
pub fn random_consistent_active_set(rng: &mut impl Rng, graph: &SignedGraph) -> ActiveSet {
    let mut refs: Vec<_> = graph.edge_refs().collect();
    refs.shuffle(rng);
    let mut set = ActiveSet::new();
    for e in refs {
        if !rng.random_bool(0.5) {
            continue;
        }
        let edge = graph.edge(e);
        let feasible = match edge.polarity {
            Polarity::Attractive => {
                !active::connected(graph, &set, edge.u, edge.v).unwrap()
                    && !active::mutex_related(graph, &set, edge.u, edge.v).unwrap()
            }
            Polarity::Repulsive => !active::connected(graph, &set, edge.u, edge.v).unwrap(),
        };
        if feasible {
            set.insert(e);
        }
    }
    set
}

/// Arbitrary (not necessarily consistent) subset of the edges.
pub fn random_edge_subset(rng: &mut impl Rng, graph: &SignedGraph, density: f64) -> ActiveSet {
    graph.edge_refs().filter(|_| rng.random_bool(density)).collect()
}

/// `count` distinct random seed vertices.
pub fn random_seeds(rng: &mut impl Rng, num_vertices: usize, count: usize) -> SeedSet {
    let mut pool: Vec<usize> = (0..num_vertices).collect();
    pool.shuffle(rng);
    pool.truncate(count.clamp(1, num_vertices));
    SeedSet::new(pool).expect("distinct nonempty seeds")
}
