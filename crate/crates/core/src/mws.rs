//! The mutex watershed solvers.
//!
//! `solve_naive` is the transparent form: it walks the pooled edge order and
//! re-evaluates the cycle constraints with the reference predicates at every
//! step. `solve_efficient` is the union-find implementation with per-cluster
//! mutex tables; it must produce bit-identical results on every input, which
//! is enforced by tests and by the `verify` module.

use std::collections::{HashMap, HashSet};

use crate::active::{self, ActiveSet, Clustering};
use crate::error::Result;
use crate::graph::{Edge, EdgeRef, Polarity, SignedGraph};

/// Options shared by both solvers.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// When false, the forest constraint on attractive edges is dropped:
    /// within-cluster attractive edges are activated (they are unconstrained
    /// in the relaxed objective) but never change connectivity. Clusterings
    /// are unaffected; active sets grow.
    pub relax_c0: bool,
    /// Collect operation counters and mutex-table-size samples.
    pub record_stats: bool,
    /// Consistent set of pre-activated edges. The sweep runs over the
    /// remaining edges and the returned active set excludes these.
    pub initial_active: Option<ActiveSet>,
}

impl SolveOptions {
    pub fn enforce_c0(&self) -> bool {
        !self.relax_c0
    }
}

/// Counters collected during a solve when `record_stats` is set.
///
/// Mutex-table sizes are sampled both at every `check_mutex` and at every
/// table merge; both means are reported since each event costs
/// O(min of the two table sizes).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub edge_visits: u64,
    pub merges: u64,
    pub mutexes_added: u64,
    pub mutex_checks: u64,
    pub min_table_sum_at_check: u64,
    pub min_table_sum_at_merge: u64,
}

impl SolveStats {
    pub fn mean_min_table_at_check(&self) -> f64 {
        if self.mutex_checks == 0 {
            0.0
        } else {
            self.min_table_sum_at_check as f64 / self.mutex_checks as f64
        }
    }

    pub fn mean_min_table_at_merge(&self) -> f64 {
        if self.merges == 0 {
            0.0
        } else {
            self.min_table_sum_at_merge as f64 / self.merges as f64
        }
    }

    /// Mean of the smaller table size over all sampled events
    /// (checks and merges pooled).
    pub fn mean_min_table(&self) -> f64 {
        let events = self.mutex_checks + self.merges;
        if events == 0 {
            0.0
        } else {
            (self.min_table_sum_at_check + self.min_table_sum_at_merge) as f64 / events as f64
        }
    }
}

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Activated edges, excluding any initial active set.
    pub active: ActiveSet,
    /// Clustering induced by the attractive part of the full active state
    /// (initial set included when one was given).
    pub clustering: Clustering,
    /// Sum of plain weights over the returned active edges; a diagnostic,
    /// not the optimized energy.
    pub energy_exponent_free: f64,
    pub stats: Option<SolveStats>,
}

/// Total deterministic processing order: strictly descending weight, ties
/// broken by polarity (repulsive first) and then by ascending per-polarity
/// id. The tie-break is a fixed convention of this crate; the optimality
/// guarantees assume unique weights and say nothing about ties.
pub fn sort_edges(graph: &SignedGraph) -> Vec<EdgeRef> {
    let mut order: Vec<EdgeRef> = graph.edge_refs().collect();
    sort_edge_refs(graph, &mut order);
    order
}

fn sort_edge_refs(graph: &SignedGraph, refs: &mut [EdgeRef]) {
    refs.sort_unstable_by(|a, b| {
        let wa = graph.edge(*a).weight;
        let wb = graph.edge(*b).weight;
        wb.total_cmp(&wa)
            .then_with(|| polarity_rank(a.polarity).cmp(&polarity_rank(b.polarity)))
            .then_with(|| a.id.cmp(&b.id))
    });
}

fn polarity_rank(p: Polarity) -> u8 {
    match p {
        Polarity::Repulsive => 0,
        Polarity::Attractive => 1,
    }
}

fn check_initial(graph: &SignedGraph, initial: &ActiveSet) -> Result<()> {
    active::check_consistent(graph, initial)
}

/// Reference solver: greedy sweep with the cycle constraints evaluated from
/// scratch via the reference predicates.
pub fn solve_naive(graph: &SignedGraph, opts: &SolveOptions) -> Result<SolveResult> {
    let empty = ActiveSet::new();
    let initial = opts.initial_active.as_ref().unwrap_or(&empty);
    check_initial(graph, initial)?;

    let mut state = initial.clone();
    let mut chosen = ActiveSet::new();
    let mut energy = 0.0;
    for e in sort_edges(graph) {
        if initial.contains(e) {
            continue;
        }
        let Edge { u, v, weight, polarity } = graph.edge(e);
        let feasible = match polarity {
            Polarity::Attractive => {
                // Adding an attractive edge closes a zero-repulsive cycle iff
                // the endpoints are already connected, and a one-repulsive
                // cycle iff they are mutex related.
                let conn = active::connected(graph, &state, u, v)?;
                let mux = active::mutex_related(graph, &state, u, v)?;
                if opts.enforce_c0() {
                    !conn && !mux
                } else {
                    !mux
                }
            }
            // A repulsive edge closes a one-repulsive cycle iff the endpoints
            // are connected; it can never close a zero-repulsive cycle.
            Polarity::Repulsive => !active::connected(graph, &state, u, v)?,
        };
        if feasible {
            state.insert(e);
            chosen.insert(e);
            energy += weight;
        }
    }

    let clustering = active::clustering_of(graph, &state)?;
    Ok(SolveResult { active: chosen, clustering, energy_exponent_free: energy, stats: None })
}

/// How a merge combines the two mutex tables. The direction never affects
/// results; `SmallerIntoLarger` is the cost-optimal default and `Seeded`
/// exists so tests can randomize the direction.
#[derive(Debug, Clone, Copy)]
pub enum AbsorbPolicy {
    SmallerIntoLarger,
    Seeded(u64),
}

/// Union-find with path compression, union by rank, and per-root hash tables
/// of incident active mutex edges.
#[derive(Debug)]
pub struct MutexUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    tables: HashMap<usize, HashSet<usize>>,
    stats: Option<SolveStats>,
    absorb_rng: Option<u64>,
}

impl MutexUnionFind {
    pub fn new(n: usize) -> Self {
        Self::with_policy(n, AbsorbPolicy::SmallerIntoLarger)
    }

    pub fn with_policy(n: usize, policy: AbsorbPolicy) -> Self {
        MutexUnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            tables: HashMap::new(),
            stats: None,
            absorb_rng: match policy {
                AbsorbPolicy::SmallerIntoLarger => None,
                // xorshift state; must be nonzero
                AbsorbPolicy::Seeded(s) => Some(s | 1),
            },
        }
    }

    pub fn enable_stats(&mut self) {
        self.stats = Some(SolveStats::default());
    }

    pub fn stats(&self) -> Option<&SolveStats> {
        self.stats.as_ref()
    }

    pub fn stats_mut(&mut self) -> Option<&mut SolveStats> {
        self.stats.as_mut()
    }

    /// Iterative two-pass find with full path compression.
    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            x = std::mem::replace(&mut self.parent[x], root);
        }
        root
    }

    pub fn connected(&mut self, i: usize, j: usize) -> bool {
        self.find(i) == self.find(j)
    }

    fn table_len(&self, root: usize) -> usize {
        self.tables.get(&root).map_or(0, |t| t.len())
    }

    /// True iff the clusters of `i` and `j` share an active mutex edge.
    /// Probes every element of the smaller table against the larger one.
    pub fn check_mutex(&mut self, i: usize, j: usize) -> bool {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri == rj {
            // Same cluster: no path can cross exactly one repulsive edge
            // while the state is consistent.
            return false;
        }
        let (small, large) = if self.table_len(ri) <= self.table_len(rj) { (ri, rj) } else { (rj, ri) };
        if let Some(s) = self.stats.as_mut() {
            s.mutex_checks += 1;
            s.min_table_sum_at_check += self.tables.get(&small).map_or(0, |t| t.len()) as u64;
        }
        match (self.tables.get(&small), self.tables.get(&large)) {
            (Some(ts), Some(tl)) => ts.iter().any(|e| tl.contains(e)),
            _ => false,
        }
    }

    /// Unifies the clusters of `i` and `j` and inherits mutex constraints by
    /// merging the two tables. Callers must have established that the
    /// clusters are distinct and not mutex related.
    pub fn merge(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        assert_ne!(ri, rj, "merge called on vertices of the same cluster");
        debug_assert!(!self.mutex_between_roots(ri, rj), "merge called on mutex-related clusters");

        let new_root = match self.rank[ri].cmp(&self.rank[rj]) {
            std::cmp::Ordering::Less => {
                self.parent[ri] = rj;
                rj
            }
            std::cmp::Ordering::Greater => {
                self.parent[rj] = ri;
                ri
            }
            std::cmp::Ordering::Equal => {
                self.parent[rj] = ri;
                self.rank[ri] += 1;
                ri
            }
        };

        let ti = self.tables.remove(&ri);
        let tj = self.tables.remove(&rj);
        if let Some(s) = self.stats.as_mut() {
            s.merges += 1;
            s.min_table_sum_at_merge +=
                ti.as_ref().map_or(0, |t| t.len()).min(tj.as_ref().map_or(0, |t| t.len())) as u64;
        }
        let merged = match (ti, tj) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t),
            (Some(a), Some(b)) => {
                let larger_absorbs = self.larger_table_absorbs();
                let a_is_dst = (a.len() >= b.len()) == larger_absorbs;
                let (mut dst, src) = if a_is_dst { (a, b) } else { (b, a) };
                dst.extend(src);
                Some(dst)
            }
        };
        if let Some(t) = merged {
            self.tables.insert(new_root, t);
        }
    }

    fn larger_table_absorbs(&mut self) -> bool {
        match self.absorb_rng.as_mut() {
            None => true,
            Some(state) => {
                // xorshift64
                *state ^= *state << 13;
                *state ^= *state >> 7;
                *state ^= *state << 17;
                *state & 1 == 0
            }
        }
    }

    fn mutex_between_roots(&self, ri: usize, rj: usize) -> bool {
        match (self.tables.get(&ri), self.tables.get(&rj)) {
            (Some(a), Some(b)) => {
                let (s, l) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                s.iter().any(|e| l.contains(e))
            }
            _ => false,
        }
    }

    /// Records the repulsive edge `edge_id` as a mutex constraint between the
    /// clusters of `i` and `j`, which must be distinct.
    pub fn add_mutex(&mut self, i: usize, j: usize, edge_id: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        assert_ne!(ri, rj, "add_mutex called on vertices of the same cluster");
        self.tables.entry(ri).or_default().insert(edge_id);
        self.tables.entry(rj).or_default().insert(edge_id);
        if let Some(s) = self.stats.as_mut() {
            s.mutexes_added += 1;
        }
    }

    pub fn into_clustering(mut self) -> Clustering {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|v| self.find(v)).collect();
        Clustering::from_labels(&roots)
    }
}

/// Union-find solver. Produces the same active set and clustering as
/// `solve_naive` on every input.
pub fn solve_efficient(graph: &SignedGraph, opts: &SolveOptions) -> Result<SolveResult> {
    let order = sort_edges(graph);
    solve_efficient_presorted(graph, &order, opts)
}

/// As `solve_efficient` but with the sorted order supplied by the caller, so
/// benchmarks can time the sweep separately from the sort.
pub fn solve_efficient_presorted(
    graph: &SignedGraph,
    order: &[EdgeRef],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    solve_efficient_with_policy(graph, order, opts, AbsorbPolicy::SmallerIntoLarger)
}

/// Testing entry point that additionally fixes the mutex-table absorb policy.
pub fn solve_efficient_with_policy(
    graph: &SignedGraph,
    order: &[EdgeRef],
    opts: &SolveOptions,
    policy: AbsorbPolicy,
) -> Result<SolveResult> {
    let empty = ActiveSet::new();
    let initial = opts.initial_active.as_ref().unwrap_or(&empty);
    check_initial(graph, initial)?;

    let mut uf = MutexUnionFind::with_policy(graph.num_vertices(), policy);
    if opts.record_stats {
        uf.enable_stats();
    }
    // Seed the union-find with the initial state: merges first (a forest, so
    // all unions are valid), then the mutex edges (no endpoint pair of which
    // is connected, or the initial set would have been inconsistent).
    for id in initial.attractive_ids() {
        let e = graph.edge(EdgeRef::attractive(id));
        uf.merge(e.u, e.v);
    }
    for id in initial.repulsive_ids() {
        let e = graph.edge(EdgeRef::repulsive(id));
        uf.add_mutex(e.u, e.v, id);
    }
    if let Some(s) = uf.stats_mut() {
        // Seeding is setup, not solving.
        *s = SolveStats::default();
    }

    let mut chosen = ActiveSet::new();
    let mut energy = 0.0;
    for &e in order {
        if initial.contains(e) {
            continue;
        }
        if let Some(s) = uf.stats_mut() {
            s.edge_visits += 1;
        }
        let Edge { u, v, weight, polarity } = graph.edge(e);
        match polarity {
            Polarity::Attractive => {
                if opts.enforce_c0() {
                    if !uf.connected(u, v) && !uf.check_mutex(u, v) {
                        uf.merge(u, v);
                        chosen.insert(e);
                        energy += weight;
                    }
                } else {
                    let conn = uf.connected(u, v);
                    if !uf.check_mutex(u, v) {
                        chosen.insert(e);
                        energy += weight;
                        if !conn {
                            uf.merge(u, v);
                        }
                    }
                }
            }
            Polarity::Repulsive => {
                if !uf.connected(u, v) {
                    uf.add_mutex(u, v, e.id);
                    chosen.insert(e);
                    energy += weight;
                }
            }
        }
    }

    let stats = uf.stats().copied();
    let clustering = uf.into_clustering();
    Ok(SolveResult { active: chosen, clustering, energy_exponent_free: energy, stats })
}

/// The highest-weight edge outside `initial` whose activation keeps the
/// active set consistent, under the same total order as the solvers.
/// `None` means `initial` is complete.
pub fn greedy_edge(graph: &SignedGraph, initial: &ActiveSet) -> Result<Option<EdgeRef>> {
    check_initial(graph, initial)?;
    for e in sort_edges(graph) {
        if initial.contains(e) {
            continue;
        }
        let Edge { u, v, polarity, .. } = graph.edge(e);
        let feasible = match polarity {
            Polarity::Attractive => {
                !active::connected(graph, initial, u, v)?
                    && !active::mutex_related(graph, initial, u, v)?
            }
            Polarity::Repulsive => !active::connected(graph, initial, u, v)?,
        };
        if feasible {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::Polarity::{Attractive as A, Repulsive as R};

    // Triangle where the repulsive edge loses: both endpoints get connected
    // by the stronger attractive edges first.
    fn triangle_attractive_wins() -> SignedGraph {
        SignedGraph::new(3, [(0, 1, 3.0, A), (1, 2, 2.0, A), (0, 2, 1.0, R)]).unwrap()
    }

    // Triangle where the repulsive edge wins and blocks the weaker
    // attractive edge.
    fn triangle_repulsive_wins() -> SignedGraph {
        SignedGraph::new(3, [(0, 2, 3.0, R), (0, 1, 2.0, A), (1, 2, 1.0, A)]).unwrap()
    }

    #[test]
    fn sort_order_is_descending_with_documented_tie_break() {
        let g = SignedGraph::new(
            4,
            [(0, 1, 3.0, A), (1, 2, 5.0, R), (2, 3, 1.0, A)],
        )
        .unwrap();
        let order = sort_edges(&g);
        assert_eq!(order, vec![EdgeRef::repulsive(0), EdgeRef::attractive(0), EdgeRef::attractive(1)]);

        // Equal weights between different pairs: lower id first.
        let g = SignedGraph::new(4, [(0, 1, 2.0, A), (2, 3, 2.0, A)]).unwrap();
        assert_eq!(sort_edges(&g), vec![EdgeRef::attractive(0), EdgeRef::attractive(1)]);
        assert_eq!(sort_edges(&g), sort_edges(&g));

        // Equal weights across polarity: repulsive first.
        let g = SignedGraph::new(4, [(0, 1, 2.0, A), (2, 3, 2.0, R)]).unwrap();
        assert_eq!(sort_edges(&g), vec![EdgeRef::repulsive(0), EdgeRef::attractive(0)]);
    }

    #[test]
    fn naive_merges_through_when_attractive_wins() {
        let res = solve_naive(&triangle_attractive_wins(), &SolveOptions::default()).unwrap();
        assert_eq!(res.clustering.labels(), &[0, 0, 0]);
        assert_eq!(res.active.num_repulsive(), 0);
        assert_eq!(res.active.num_attractive(), 2);
    }

    #[test]
    fn naive_blocks_weak_attractive_edge_behind_mutex() {
        let res = solve_naive(&triangle_repulsive_wins(), &SolveOptions::default()).unwrap();
        assert_eq!(res.clustering.labels(), &[0, 0, 1]);
        let expected: ActiveSet =
            [EdgeRef::repulsive(0), EdgeRef::attractive(0)].into_iter().collect();
        assert_eq!(res.active, expected);
    }

    #[test]
    fn empty_graph_yields_singletons() {
        let g = SignedGraph::new(4, []).unwrap();
        let res = solve_naive(&g, &SolveOptions::default()).unwrap();
        assert_eq!(res.clustering.labels(), &[0, 1, 2, 3]);
        assert!(res.active.is_empty());
        let res = solve_efficient(&g, &SolveOptions::default()).unwrap();
        assert_eq!(res.clustering.labels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn efficient_matches_naive_on_the_triangles() {
        for g in [triangle_attractive_wins(), triangle_repulsive_wins()] {
            let a = solve_naive(&g, &SolveOptions::default()).unwrap();
            let b = solve_efficient(&g, &SolveOptions::default()).unwrap();
            assert_eq!(a.active, b.active);
            assert_eq!(a.clustering, b.clustering);
            assert_eq!(a.energy_exponent_free, b.energy_exponent_free);
        }
    }

    #[test]
    fn mutex_table_inheritance_blocks_merges_transitively() {
        let mut uf = MutexUnionFind::new(4);
        uf.add_mutex(0, 2, 0);
        assert!(uf.check_mutex(0, 2));
        uf.merge(0, 1);
        assert!(uf.check_mutex(1, 2));
        assert!(!uf.check_mutex(1, 3));
    }

    #[test]
    fn fresh_union_find_has_no_mutexes() {
        let mut uf = MutexUnionFind::new(5);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(!uf.check_mutex(i, j));
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "merge called on vertices of the same cluster")]
    fn merge_of_same_cluster_panics() {
        let mut uf = MutexUnionFind::new(3);
        uf.merge(0, 1);
        uf.merge(1, 0);
    }

    #[test]
    fn relaxed_mode_adds_within_cluster_attractive_edges() {
        // Attractive triangle: with the forest constraint one edge is
        // rejected; relaxed, all three are activated but the clustering is
        // the same.
        let g = SignedGraph::new(3, [(0, 1, 3.0, A), (1, 2, 2.0, A), (0, 2, 1.0, A)]).unwrap();
        let strict = solve_naive(&g, &SolveOptions::default()).unwrap();
        let relaxed_opts = SolveOptions { relax_c0: true, ..Default::default() };
        let relaxed = solve_naive(&g, &relaxed_opts).unwrap();
        assert_eq!(strict.active.num_attractive(), 2);
        assert_eq!(relaxed.active.num_attractive(), 3);
        assert_eq!(strict.clustering, relaxed.clustering);

        let eff = solve_efficient(&g, &relaxed_opts).unwrap();
        assert_eq!(eff.active, relaxed.active);
        assert_eq!(eff.clustering, relaxed.clustering);
    }

    #[test]
    fn initial_active_set_is_honored_and_excluded_from_result() {
        let g = triangle_repulsive_wins();
        let full = solve_naive(&g, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { initial_active: Some(full.active.clone()), ..Default::default() };
        let res = solve_naive(&g, &opts).unwrap();
        assert!(res.active.is_empty());
        assert_eq!(res.clustering, full.clustering);
        let res = solve_efficient(&g, &opts).unwrap();
        assert!(res.active.is_empty());
        assert_eq!(res.clustering, full.clustering);
    }

    #[test]
    fn inconsistent_initial_set_is_rejected() {
        let g = SignedGraph::new(2, [(0, 1, 1.0, A), (0, 1, 2.0, R)]).unwrap();
        let bad: ActiveSet = [EdgeRef::attractive(0), EdgeRef::repulsive(0)].into_iter().collect();
        let opts = SolveOptions { initial_active: Some(bad), ..Default::default() };
        assert!(matches!(solve_naive(&g, &opts), Err(Error::Inconsistent(_))));
        assert!(matches!(solve_efficient(&g, &opts), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn greedy_edge_picks_highest_feasible_and_detects_completeness() {
        let g = triangle_repulsive_wins();
        assert_eq!(greedy_edge(&g, &ActiveSet::new()).unwrap(), Some(EdgeRef::repulsive(0)));
        let full = solve_naive(&g, &SolveOptions::default()).unwrap();
        assert_eq!(greedy_edge(&g, &full.active).unwrap(), None);

        let g = SignedGraph::new(2, [(0, 1, 0.5, A)]).unwrap();
        assert_eq!(greedy_edge(&g, &ActiveSet::new()).unwrap(), Some(EdgeRef::attractive(0)));
    }

    #[test]
    fn solver_output_satisfies_consistency_invariants() {
        for g in [triangle_attractive_wins(), triangle_repulsive_wins()] {
            let res = solve_efficient(&g, &SolveOptions::default()).unwrap();
            assert!(active::is_forest(&g, &res.active));
            assert!(!active::has_violating_cycle(&g, &res.active));
        }
    }

    #[test]
    fn stats_count_operations() {
        let g = triangle_repulsive_wins();
        let opts = SolveOptions { record_stats: true, ..Default::default() };
        let res = solve_efficient(&g, &opts).unwrap();
        let stats = res.stats.unwrap();
        assert_eq!(stats.edge_visits, 3);
        assert_eq!(stats.mutexes_added, 1);
        assert_eq!(stats.merges, 1);
        // Stats must not change results.
        let plain = solve_efficient(&g, &SolveOptions::default()).unwrap();
        assert_eq!(plain.active, res.active);
        assert_eq!(plain.clustering, res.clustering);
    }
}
