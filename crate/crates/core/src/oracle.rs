//! Brute-force ground truth.
//!
//! Everything here trades time for certainty: dominant powers are certified
//! with exact rational arithmetic on the binary values of the weights,
//! the greedy solvers are checked against exhaustive subset enumeration, and
//! the multicut relation is checked against exhaustive partition
//! enumeration. All operations carry hard size bounds.

use std::collections::BTreeSet;

use num::{BigRational, ToPrimitive, Zero};

use crate::active::{self, ActiveSet, Clustering, SimpleUnionFind};
use crate::error::{Error, Result};
use crate::graph::{EdgeRef, Polarity, SignedGraph};

/// Largest exponent the dominant-power search will certify. Weights whose
/// ratios are extremely close to 1 need exponents beyond any practical
/// exact-arithmetic check and are rejected instead.
pub const MAX_DOMINANT_EXPONENT: u32 = 512;

const BRUTE_FORCE_MAX_EDGES: usize = 25;
const MULTICUT_MAX_VERTICES: usize = 10;
const CYCLE_ENUM_MAX_EDGES: usize = 20;

/// An exponent `p` such that every weight to the `p` exceeds the sum of all
/// strictly smaller weights to the `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominantPower {
    pub p: u32,
    /// True when the inequality was certified with exact arithmetic.
    pub certified: bool,
}

fn exact(w: f64) -> BigRational {
    BigRational::from_float(w).expect("weights are validated finite")
}

fn rational_to_f64(r: &BigRational) -> Result<f64> {
    match r.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Numeric(format!("energy {r} does not fit in an f64"))),
    }
}

/// Smallest positive integer exponent that makes every weight dominate the
/// sum of all strictly smaller ones, certified in exact rational arithmetic.
///
/// Duplicate weights admit no dominant power (a weight can never exceed a sum
/// containing its own equal), and neither does a zero weight (0^p never
/// exceeds the empty sum, which is 0).
pub fn minimal_dominant_power(weights: &[f64]) -> Result<DominantPower> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Input("weights must be finite and non-negative".into()));
    }
    if weights.is_empty() {
        return Ok(DominantPower { p: 1, certified: true });
    }
    let mut sorted: Vec<BigRational> = weights.iter().map(|&w| exact(w)).collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NoDominantPower("duplicate weights".into()));
    }
    if sorted[0].is_zero() {
        return Err(Error::NoDominantPower(
            "a zero weight can never exceed the (empty) sum of smaller weights".into(),
        ));
    }
    for p in 1..=MAX_DOMINANT_EXPONENT {
        let powers: Vec<BigRational> =
            sorted.iter().map(|w| num::pow::pow(w.clone(), p as usize)).collect();
        let mut prefix = BigRational::zero();
        let mut ok = true;
        for pw in &powers {
            if *pw <= prefix {
                ok = false;
                break;
            }
            prefix += pw;
        }
        if ok {
            return Ok(DominantPower { p, certified: true });
        }
    }
    Err(Error::NoDominantPower(format!(
        "no exponent up to {MAX_DOMINANT_EXPONENT} dominates; weights are too close together"
    )))
}

/// A minimizer of the exponentiated active-set energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// The optimal activation, excluding the initial set it was computed on
    /// top of.
    pub active: ActiveSet,
    /// -(sum of w^p over the active edges), converted from the exact value.
    pub energy: f64,
    pub p: u32,
}

/// `-(sum of w^p over active edges)`, computed exactly and converted at the
/// boundary.
pub fn mws_energy(graph: &SignedGraph, active: &ActiveSet, p: u32) -> Result<f64> {
    active.validate_for(graph)?;
    let mut sum = BigRational::zero();
    for e in active.edge_refs() {
        sum += num::pow::pow(exact(graph.edge(e).weight), p as usize);
    }
    rational_to_f64(&(-sum))
}

/// Exhaustive minimization of the active-set energy over all consistent
/// supersets of `initial`, by enumerating every subset of the remaining
/// edges. Exact arithmetic throughout; a tie for the minimum is an error
/// because the callers' preconditions (unique weights, dominant power)
/// guarantee a unique optimum.
pub fn brute_force_mws(graph: &SignedGraph, initial: &ActiveSet, p: u32) -> Result<EnergyReport> {
    if graph.num_edges() > BRUTE_FORCE_MAX_EDGES {
        return Err(Error::SizeBound(format!(
            "{} edges exceeds the brute-force limit of {BRUTE_FORCE_MAX_EDGES}",
            graph.num_edges()
        )));
    }
    if p == 0 {
        return Err(Error::Input("exponent must be positive".into()));
    }
    active::check_consistent(graph, initial)?;

    let free: Vec<EdgeRef> = graph.edge_refs().filter(|e| !initial.contains(*e)).collect();
    let powers: Vec<BigRational> =
        free.iter().map(|e| num::pow::pow(exact(graph.edge(*e).weight), p as usize)).collect();

    let mut best_sum: Option<BigRational> = None;
    let mut best_mask: u32 = 0;
    let mut tie = false;
    for mask in 0..(1u32 << free.len()) {
        let mut candidate = initial.clone();
        for (i, e) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                candidate.insert(*e);
            }
        }
        if !active::is_forest(graph, &candidate) || active::has_violating_cycle(graph, &candidate)
        {
            continue;
        }
        let mut sum = BigRational::zero();
        for (i, pw) in powers.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum += pw;
            }
        }
        match &best_sum {
            None => {
                best_sum = Some(sum);
                best_mask = mask;
            }
            Some(best) => {
                if sum > *best {
                    best_sum = Some(sum);
                    best_mask = mask;
                    tie = false;
                } else if sum == *best {
                    tie = true;
                }
            }
        }
    }
    let best_sum = best_sum.expect("the empty subset is always consistent");
    if tie {
        return Err(Error::EnergyTie(
            "multiple consistent active sets reach the minimal energy".into(),
        ));
    }
    let chosen: ActiveSet = free
        .iter()
        .enumerate()
        .filter(|(i, _)| best_mask >> i & 1 == 1)
        .map(|(_, e)| *e)
        .collect();
    Ok(EnergyReport { active: chosen, energy: rational_to_f64(&(-best_sum))?, p })
}

/// Signed multicut costs for every edge (indexed in construction order):
/// cutting an attractive edge of weight `w` costs `+w^p`, cutting a repulsive
/// one gains `-w^p`.
pub fn signed_costs_from_mws_graph(graph: &SignedGraph, p: u32) -> Vec<f64> {
    graph
        .edges()
        .map(|e| {
            let magnitude = e.weight.powi(p as i32);
            match e.polarity {
                Polarity::Attractive => magnitude,
                Polarity::Repulsive => -magnitude,
            }
        })
        .collect()
}

/// Result of exhaustive multicut minimization.
///
/// Minimizers are canonicalized to the partition induced by the components
/// of the un-cut edges (each cluster connected), then deduplicated; ties in
/// energy across genuinely different cuts are all reported.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticutSolution {
    pub minimizers: Vec<Clustering>,
    pub energy: f64,
}

impl MulticutSolution {
    pub fn is_unique(&self) -> bool {
        self.minimizers.len() == 1
    }

    pub fn clustering(&self) -> &Clustering {
        &self.minimizers[0]
    }
}

/// Enumerates every partition of the vertices (restricted growth strings)
/// and sums `costs` over the edges each partition cuts.
pub fn brute_force_multicut(graph: &SignedGraph, costs: &[f64]) -> Result<MulticutSolution> {
    let n = graph.num_vertices();
    if n > MULTICUT_MAX_VERTICES {
        return Err(Error::SizeBound(format!(
            "{n} vertices exceeds the partition-enumeration limit of {MULTICUT_MAX_VERTICES}"
        )));
    }
    if costs.len() != graph.num_edges() {
        return Err(Error::Input(format!(
            "got {} costs for {} edges",
            costs.len(),
            graph.num_edges()
        )));
    }
    if n == 0 {
        return Ok(MulticutSolution {
            minimizers: vec![Clustering::from_labels(&[])],
            energy: 0.0,
        });
    }

    let edges: Vec<(usize, usize)> = graph.edges().map(|e| (e.u, e.v)).collect();
    let mut best_energy = f64::INFINITY;
    let mut best_cuts: Vec<Vec<usize>> = Vec::new();

    let mut labels = vec![0usize; n];
    loop {
        let mut energy = 0.0;
        for (g, &(u, v)) in edges.iter().enumerate() {
            if labels[u] != labels[v] {
                energy += costs[g];
            }
        }
        if energy < best_energy {
            best_energy = energy;
            best_cuts.clear();
            best_cuts.push(labels.clone());
        } else if energy == best_energy {
            best_cuts.push(labels.clone());
        }
        if !next_restricted_growth(&mut labels) {
            break;
        }
    }

    // Canonicalize: components of the edges each minimizer leaves un-cut.
    // This preserves the cut set and collapses partitions that only differ
    // by grouping disconnected pieces.
    let mut canonical: BTreeSet<Vec<usize>> = BTreeSet::new();
    for labels in &best_cuts {
        let mut uf = SimpleUnionFind::new(n);
        for &(u, v) in edges.iter().filter(|&&(u, v)| labels[u] == labels[v]) {
            uf.union(u, v);
        }
        canonical.insert(uf.into_clustering().labels().to_vec());
    }
    let minimizers = canonical.into_iter().map(|l| Clustering::from_labels(&l)).collect();
    Ok(MulticutSolution { minimizers, energy: best_energy })
}

/// Advances a restricted growth string to the next set partition.
/// Returns false after the last one.
fn next_restricted_growth(labels: &mut [usize]) -> bool {
    let n = labels.len();
    // max label allowed at position i is max(labels[..i]) + 1
    for i in (1..n).rev() {
        let cap = labels[..i].iter().copied().max().unwrap_or(0) + 1;
        if labels[i] < cap {
            labels[i] += 1;
            for l in labels[i + 1..].iter_mut() {
                *l = 0;
            }
            return true;
        }
    }
    false
}

/// Checks the cycle inequalities over every simple cycle of the graph that
/// contains exactly one repulsive edge.
///
/// With `y_e = 1` meaning "edge e is active" for repulsive edges and
/// "edge e is inactive" for attractive edges, each such cycle with repulsive
/// edge `r` must satisfy `sum of y over the attractive part >= y_r`.
pub fn cycle_inequalities_hold(graph: &SignedGraph, active_set: &ActiveSet) -> Result<bool> {
    if graph.num_edges() > CYCLE_ENUM_MAX_EDGES {
        return Err(Error::SizeBound(format!(
            "{} edges exceeds the cycle-enumeration limit of {CYCLE_ENUM_MAX_EDGES}",
            graph.num_edges()
        )));
    }
    active_set.validate_for(graph)?;

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph.num_vertices()];
    for (id, e) in graph.attractive_edges() {
        adj[e.u].push((e.v, id));
        adj[e.v].push((e.u, id));
    }

    for (rep_id, e) in graph.repulsive_edges() {
        let y_rep = i64::from(active_set.contains_repulsive(rep_id));
        let mut visited = vec![false; graph.num_vertices()];
        visited[e.u] = true;
        if !all_paths_satisfy(&adj, active_set, e.u, e.v, &mut visited, 0, y_rep) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn all_paths_satisfy(
    adj: &[Vec<(usize, usize)>],
    active_set: &ActiveSet,
    current: usize,
    target: usize,
    visited: &mut [bool],
    slack: i64,
    y_rep: i64,
) -> bool {
    if current == target {
        return slack >= y_rep;
    }
    for &(next, attr_id) in &adj[current] {
        if visited[next] {
            continue;
        }
        let step = 1 - i64::from(active_set.contains_attractive(attr_id));
        visited[next] = true;
        let ok = all_paths_satisfy(adj, active_set, next, target, visited, slack + step, y_rep);
        visited[next] = false;
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Polarity::{Attractive as A, Repulsive as R};
    use crate::mws::{solve_naive, SolveOptions};

    #[test]
    fn dominant_power_examples() {
        // 4 > 2 + 1 already at p = 1.
        assert_eq!(minimal_dominant_power(&[1.0, 2.0, 4.0]).unwrap().p, 1);
        // 3 = 2 + 1 fails at p = 1; 9 > 4 + 1 works at p = 2.
        assert_eq!(minimal_dominant_power(&[1.0, 2.0, 3.0]).unwrap().p, 2);
        // Singleton and empty lists are trivially dominated.
        assert_eq!(minimal_dominant_power(&[5.0]).unwrap().p, 1);
        assert_eq!(minimal_dominant_power(&[]).unwrap().p, 1);
        assert!(minimal_dominant_power(&[1.0, 2.0, 4.0]).unwrap().certified);
    }

    #[test]
    fn dominant_power_rejects_duplicates_and_zero() {
        assert!(matches!(
            minimal_dominant_power(&[1.0, 2.0, 2.0]),
            Err(Error::NoDominantPower(_))
        ));
        assert!(matches!(
            minimal_dominant_power(&[0.0, 1.0]),
            Err(Error::NoDominantPower(_))
        ));
    }

    fn t2_triangle() -> SignedGraph {
        SignedGraph::new(3, [(0, 2, 3.0, R), (0, 1, 2.0, A), (1, 2, 1.0, A)]).unwrap()
    }

    #[test]
    fn brute_force_on_the_blocking_triangle() {
        // All 8 subsets of the 3 edges; the consistent minimizer activates
        // the mutex (9) and the strong merge (4): energy -13 at p = 2.
        let report = brute_force_mws(&t2_triangle(), &ActiveSet::new(), 2).unwrap();
        assert_eq!(report.energy, -13.0);
        let expected: ActiveSet =
            [EdgeRef::repulsive(0), EdgeRef::attractive(0)].into_iter().collect();
        assert_eq!(report.active, expected);
    }

    #[test]
    fn brute_force_trivial_cases() {
        let g = SignedGraph::new(2, [(0, 1, 5.0, A)]).unwrap();
        let report = brute_force_mws(&g, &ActiveSet::new(), 1).unwrap();
        assert_eq!(report.energy, -5.0);
        assert_eq!(report.active.num_attractive(), 1);

        let g = SignedGraph::new(3, []).unwrap();
        let report = brute_force_mws(&g, &ActiveSet::new(), 1).unwrap();
        assert_eq!(report.energy, 0.0);
        assert!(report.active.is_empty());
    }

    #[test]
    fn brute_force_flags_ties() {
        // Two equal-weight attractive edges and nothing else: the optimum
        // activates both, but swapping which is "first" does not matter;
        // a genuine tie needs equal total energies of different sets, e.g.
        // two disjoint edges of equal weight cannot tie (both are taken), so
        // force a tie with a parallel pair where either polarity gives the
        // same magnitude: an attractive and repulsive edge between the same
        // vertices, equal weight. Activating exactly one of them is optimal
        // either way.
        let g = SignedGraph::new(2, [(0, 1, 2.0, A), (0, 1, 2.0, R)]).unwrap();
        assert!(matches!(
            brute_force_mws(&g, &ActiveSet::new(), 1),
            Err(Error::EnergyTie(_))
        ));
    }

    #[test]
    fn brute_force_respects_initial_sets() {
        let g = t2_triangle();
        let p = 2;
        let full = brute_force_mws(&g, &ActiveSet::new(), p).unwrap();
        // Fix the mutex, optimize the rest.
        let initial: ActiveSet = [EdgeRef::repulsive(0)].into_iter().collect();
        let rest = brute_force_mws(&g, &initial, p).unwrap();
        let combined = rest.active.union(&initial);
        assert_eq!(combined, full.active.union(&initial));
        assert!(!rest.active.contains(EdgeRef::repulsive(0)));
    }

    #[test]
    fn naive_solver_matches_brute_force_on_the_triangle() {
        let g = t2_triangle();
        let p = minimal_dominant_power(g.weights()).unwrap().p;
        let greedy = solve_naive(&g, &SolveOptions::default()).unwrap();
        let oracle = brute_force_mws(&g, &ActiveSet::new(), p).unwrap();
        assert_eq!(greedy.active, oracle.active);
    }

    #[test]
    fn energy_is_recomputable() {
        let g = t2_triangle();
        let report = brute_force_mws(&g, &ActiveSet::new(), 2).unwrap();
        assert_eq!(mws_energy(&g, &report.active, 2).unwrap(), report.energy);
    }

    #[test]
    fn signed_costs_follow_polarity() {
        let g = SignedGraph::new(3, [(0, 1, 2.0, A), (1, 2, 3.0, R), (0, 2, 0.0, A)]).unwrap();
        assert_eq!(signed_costs_from_mws_graph(&g, 1), vec![2.0, -3.0, 0.0]);
        assert_eq!(signed_costs_from_mws_graph(&g, 2), vec![4.0, -9.0, 0.0]);
    }

    #[test]
    fn multicut_triangle_example() {
        // Costs +2, +1, -3: cutting {0,1}|{2} pays 1 - 3 = -2, the minimum
        // over the 5 partitions (energies 0, -2, -1, 3, 0).
        let g = SignedGraph::new(3, [(0, 1, 2.0, A), (1, 2, 1.0, A), (0, 2, 3.0, R)]).unwrap();
        let costs = signed_costs_from_mws_graph(&g, 1);
        let sol = brute_force_multicut(&g, &costs).unwrap();
        assert_eq!(sol.energy, -2.0);
        assert!(sol.is_unique());
        assert_eq!(sol.clustering().labels(), &[0, 0, 1]);
    }

    #[test]
    fn multicut_all_positive_and_all_negative() {
        let g = SignedGraph::new(3, [(0, 1, 1.0, A), (1, 2, 2.0, A), (0, 2, 4.0, A)]).unwrap();
        let sol = brute_force_multicut(&g, &signed_costs_from_mws_graph(&g, 1)).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert_eq!(sol.clustering().num_clusters(), 1);

        let g = SignedGraph::new(3, [(0, 1, 1.0, R), (1, 2, 2.0, R), (0, 2, 4.0, R)]).unwrap();
        let sol = brute_force_multicut(&g, &signed_costs_from_mws_graph(&g, 1)).unwrap();
        assert_eq!(sol.energy, -7.0);
        assert_eq!(sol.clustering().labels(), &[0, 1, 2]);
    }

    #[test]
    fn partition_enumeration_counts_bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let mut labels = vec![0usize; n];
            let mut count = 1;
            while next_restricted_growth(&mut labels) {
                count += 1;
            }
            assert_eq!(count, bell, "bell({n})");
        }
    }

    #[test]
    fn cycle_inequalities_flag_frustrated_triangles() {
        let g = SignedGraph::new(3, [(0, 1, 1.0, A), (1, 2, 2.0, A), (0, 2, 3.0, R)]).unwrap();
        // Fully active: merge(0,1), merge(1,2), mutex(0,2) is frustrated.
        let bad: ActiveSet = [
            EdgeRef::attractive(0),
            EdgeRef::attractive(1),
            EdgeRef::repulsive(0),
        ]
        .into_iter()
        .collect();
        assert!(!cycle_inequalities_hold(&g, &bad).unwrap());
        // Empty set holds trivially.
        assert!(cycle_inequalities_hold(&g, &ActiveSet::new()).unwrap());
        // Solver outputs hold.
        let res = solve_naive(&g, &SolveOptions::default()).unwrap();
        assert!(cycle_inequalities_hold(&g, &res.active).unwrap());
    }
}
