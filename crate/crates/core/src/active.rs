//! Active sets, clusterings, and the reference consistency predicates.
//!
//! The predicates here are deliberately plain graph traversals with no
//! amortized state. They define what "connected", "mutex related", "forest"
//! and "violating cycle" mean; the solvers are checked against them.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, Polarity, SignedGraph};

/// A set of activated edges: merges (attractive) and mutex constraints
/// (repulsive), stored as per-polarity ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSet {
    attractive: BTreeSet<usize>,
    repulsive: BTreeSet<usize>,
}

impl ActiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_refs(refs: impl IntoIterator<Item = EdgeRef>) -> Self {
        let mut set = Self::new();
        for r in refs {
            set.insert(r);
        }
        set
    }

    /// Returns false if the edge was already present.
    pub fn insert(&mut self, e: EdgeRef) -> bool {
        match e.polarity {
            Polarity::Attractive => self.attractive.insert(e.id),
            Polarity::Repulsive => self.repulsive.insert(e.id),
        }
    }

    pub fn remove(&mut self, e: EdgeRef) -> bool {
        match e.polarity {
            Polarity::Attractive => self.attractive.remove(&e.id),
            Polarity::Repulsive => self.repulsive.remove(&e.id),
        }
    }

    pub fn contains(&self, e: EdgeRef) -> bool {
        match e.polarity {
            Polarity::Attractive => self.attractive.contains(&e.id),
            Polarity::Repulsive => self.repulsive.contains(&e.id),
        }
    }

    pub fn len(&self) -> usize {
        self.attractive.len() + self.repulsive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attractive.is_empty() && self.repulsive.is_empty()
    }

    pub fn num_attractive(&self) -> usize {
        self.attractive.len()
    }

    pub fn num_repulsive(&self) -> usize {
        self.repulsive.len()
    }

    pub fn attractive_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.attractive.iter().copied()
    }

    pub fn repulsive_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.repulsive.iter().copied()
    }

    pub fn contains_attractive(&self, id: usize) -> bool {
        self.attractive.contains(&id)
    }

    pub fn contains_repulsive(&self, id: usize) -> bool {
        self.repulsive.contains(&id)
    }

    /// All members, attractive first, ids ascending.
    pub fn edge_refs(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.attractive
            .iter()
            .map(|&id| EdgeRef::attractive(id))
            .chain(self.repulsive.iter().map(|&id| EdgeRef::repulsive(id)))
    }

    pub fn union(&self, other: &ActiveSet) -> ActiveSet {
        let mut out = self.clone();
        for r in other.edge_refs() {
            out.insert(r);
        }
        out
    }

    /// Checks that every id points at an edge of `graph`.
    pub fn validate_for(&self, graph: &SignedGraph) -> Result<()> {
        if let Some(&id) = self.attractive.iter().next_back() {
            if id >= graph.num_attractive() {
                return Err(Error::Input(format!(
                    "attractive edge id {id} out of range ({} attractive edges)",
                    graph.num_attractive()
                )));
            }
        }
        if let Some(&id) = self.repulsive.iter().next_back() {
            if id >= graph.num_repulsive() {
                return Err(Error::Input(format!(
                    "repulsive edge id {id} out of range ({} repulsive edges)",
                    graph.num_repulsive()
                )));
            }
        }
        Ok(())
    }
}

impl FromIterator<EdgeRef> for ActiveSet {
    fn from_iter<T: IntoIterator<Item = EdgeRef>>(iter: T) -> Self {
        Self::from_refs(iter)
    }
}

/// A vertex-to-cluster-label map with canonical labels: label k is the k-th
/// cluster encountered when scanning vertices in ascending order, so labels
/// are ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl Clustering {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut lookup = std::collections::HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut next = 0;
        for &r in raw {
            let l = *lookup.entry(r).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            labels.push(l);
        }
        Clustering { labels, num_clusters: next }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn label_of(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

/// Adjacency over the active attractive edges only.
fn attractive_adjacency(graph: &SignedGraph, active: &ActiveSet) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.num_vertices()];
    for id in active.attractive_ids() {
        let e = graph.edge(EdgeRef::attractive(id));
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    adj
}

fn bfs_reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// True iff a path of active attractive edges joins `i` and `j`
/// (`i == j` counts as connected).
pub fn connected(graph: &SignedGraph, active: &ActiveSet, i: usize, j: usize) -> Result<bool> {
    graph.check_vertex(i)?;
    graph.check_vertex(j)?;
    if i == j {
        return Ok(true);
    }
    let adj = attractive_adjacency(graph, active);
    Ok(bfs_reachable(&adj, i)[j])
}

/// True iff some path within the active set from `i` to `j` crosses exactly
/// one active repulsive edge. Equivalently: some active repulsive edge has
/// one endpoint connected to `i` and the other connected to `j`.
pub fn mutex_related(graph: &SignedGraph, active: &ActiveSet, i: usize, j: usize) -> Result<bool> {
    graph.check_vertex(i)?;
    graph.check_vertex(j)?;
    let adj = attractive_adjacency(graph, active);
    let from_i = bfs_reachable(&adj, i);
    let from_j = bfs_reachable(&adj, j);
    for id in active.repulsive_ids() {
        let e = graph.edge(EdgeRef::repulsive(id));
        if (from_i[e.u] && from_j[e.v]) || (from_i[e.v] && from_j[e.u]) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff the active attractive subgraph is acyclic, i.e. no cycle in the
/// active set avoids repulsive edges entirely.
pub fn is_forest(graph: &SignedGraph, active: &ActiveSet) -> bool {
    let mut uf = SimpleUnionFind::new(graph.num_vertices());
    for id in active.attractive_ids() {
        let e = graph.edge(EdgeRef::attractive(id));
        if !uf.union(e.u, e.v) {
            return false;
        }
    }
    true
}

/// True iff some active repulsive edge has its endpoints joined by active
/// attractive edges: the repulsive edge plus that path is a cycle with
/// exactly one repulsive member.
pub fn has_violating_cycle(graph: &SignedGraph, active: &ActiveSet) -> bool {
    let mut uf = SimpleUnionFind::new(graph.num_vertices());
    for id in active.attractive_ids() {
        let e = graph.edge(EdgeRef::attractive(id));
        uf.union(e.u, e.v);
    }
    active.repulsive_ids().any(|id| {
        let e = graph.edge(EdgeRef::repulsive(id));
        uf.find(e.u) == uf.find(e.v)
    })
}

/// Errors unless the active set is a forest with no violating cycle and all
/// ids are in range.
pub fn check_consistent(graph: &SignedGraph, active: &ActiveSet) -> Result<()> {
    active.validate_for(graph)?;
    if !is_forest(graph, active) {
        return Err(Error::Inconsistent("active set has a cycle of attractive edges".into()));
    }
    if has_violating_cycle(graph, active) {
        return Err(Error::Inconsistent(
            "active set has a cycle with exactly one repulsive edge".into(),
        ));
    }
    Ok(())
}

/// Connected components of the active attractive subgraph, canonically
/// labeled. Errors if the active set is inconsistent.
pub fn clustering_of(graph: &SignedGraph, active: &ActiveSet) -> Result<Clustering> {
    if has_violating_cycle(graph, active) {
        return Err(Error::Inconsistent(
            "active set contains a cycle with exactly one repulsive edge".into(),
        ));
    }
    let mut uf = SimpleUnionFind::new(graph.num_vertices());
    for id in active.attractive_ids() {
        let e = graph.edge(EdgeRef::attractive(id));
        uf.union(e.u, e.v);
    }
    Ok(uf.into_clustering())
}

/// Minimal union-find used by the reference predicates and by Kruskal-style
/// helpers elsewhere in the crate. The solver's own union-find (which carries
/// mutex tables) lives in the `mws` module.
pub(crate) struct SimpleUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl SimpleUnionFind {
    pub fn new(n: usize) -> Self {
        SimpleUnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

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

    /// Returns false if both vertices were already in one set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub fn into_clustering(mut self) -> Clustering {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|v| self.find(v)).collect();
        Clustering::from_labels(&roots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Polarity::{Attractive as A, Repulsive as R};

    fn path3() -> SignedGraph {
        SignedGraph::new(3, [(0, 1, 1.0, A), (1, 2, 2.0, A)]).unwrap()
    }

    #[test]
    fn connected_follows_active_attractive_paths() {
        let g = path3();
        let mut act = ActiveSet::new();
        act.insert(EdgeRef::attractive(0));
        assert!(connected(&g, &act, 0, 1).unwrap());
        assert!(!connected(&g, &act, 0, 2).unwrap());
        act.insert(EdgeRef::attractive(1));
        assert!(connected(&g, &act, 0, 2).unwrap());
        assert!(connected(&g, &act, 2, 2).unwrap());
    }

    #[test]
    fn connected_rejects_out_of_range_vertices() {
        let g = path3();
        assert!(connected(&g, &ActiveSet::new(), 0, 3).is_err());
        assert!(mutex_related(&g, &ActiveSet::new(), 5, 0).is_err());
    }

    #[test]
    fn mutex_related_crosses_exactly_one_repulsive_edge() {
        // 0 -[rep]- 2 -[att]- 3
        let g = SignedGraph::new(4, [(0, 2, 1.0, R), (2, 3, 1.0, A)]).unwrap();
        let mut act = ActiveSet::new();
        act.insert(EdgeRef::repulsive(0));
        assert!(mutex_related(&g, &act, 0, 2).unwrap());
        assert!(!mutex_related(&g, &act, 0, 3).unwrap());
        act.insert(EdgeRef::attractive(0));
        assert!(mutex_related(&g, &act, 0, 3).unwrap());
        assert!(mutex_related(&g, &act, 3, 0).unwrap());
    }

    #[test]
    fn mutex_related_false_on_empty_active_set() {
        let g = path3();
        assert!(!mutex_related(&g, &ActiveSet::new(), 0, 2).unwrap());
    }

    #[test]
    fn forest_check_spots_triangles() {
        let g = SignedGraph::new(3, [(0, 1, 1.0, A), (1, 2, 2.0, A), (0, 2, 3.0, A)]).unwrap();
        let mut act = ActiveSet::new();
        assert!(is_forest(&g, &act));
        act.insert(EdgeRef::attractive(0));
        act.insert(EdgeRef::attractive(1));
        assert!(is_forest(&g, &act));
        act.insert(EdgeRef::attractive(2));
        assert!(!is_forest(&g, &act));
    }

    #[test]
    fn violating_cycle_through_parallel_pair() {
        let g = SignedGraph::new(2, [(0, 1, 1.0, A), (0, 1, 2.0, R)]).unwrap();
        let mut act = ActiveSet::new();
        act.insert(EdgeRef::attractive(0));
        act.insert(EdgeRef::repulsive(0));
        assert!(has_violating_cycle(&g, &act));
    }

    #[test]
    fn violating_cycle_through_attractive_path() {
        let g = SignedGraph::new(3, [(0, 1, 1.0, A), (1, 2, 2.0, A), (0, 2, 3.0, R)]).unwrap();
        let act: ActiveSet = [
            EdgeRef::attractive(0),
            EdgeRef::attractive(1),
            EdgeRef::repulsive(0),
        ]
        .into_iter()
        .collect();
        assert!(has_violating_cycle(&g, &act));
    }

    #[test]
    fn disjoint_components_do_not_violate() {
        let g = SignedGraph::new(4, [(0, 1, 1.0, A), (2, 3, 2.0, R)]).unwrap();
        let act: ActiveSet = [EdgeRef::attractive(0), EdgeRef::repulsive(0)].into_iter().collect();
        assert!(!has_violating_cycle(&g, &act));
    }

    #[test]
    fn clustering_labels_are_canonical() {
        let g = path3();
        let mut act = ActiveSet::new();
        act.insert(EdgeRef::attractive(0));
        let c = clustering_of(&g, &act).unwrap();
        assert_eq!(c.labels(), &[0, 0, 1]);
        assert_eq!(c.num_clusters(), 2);

        let c = clustering_of(&g, &ActiveSet::new()).unwrap();
        assert_eq!(c.labels(), &[0, 1, 2]);

        let g = SignedGraph::new(4, [(0, 1, 1.0, A), (2, 3, 2.0, A)]).unwrap();
        let act: ActiveSet = [EdgeRef::attractive(0), EdgeRef::attractive(1)].into_iter().collect();
        let c = clustering_of(&g, &act).unwrap();
        assert_eq!(c.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn clustering_of_rejects_inconsistent_sets() {
        let g = SignedGraph::new(2, [(0, 1, 1.0, A), (0, 1, 2.0, R)]).unwrap();
        let act: ActiveSet = [EdgeRef::attractive(0), EdgeRef::repulsive(0)].into_iter().collect();
        assert!(matches!(clustering_of(&g, &act), Err(Error::Inconsistent(_))));
    }
}
