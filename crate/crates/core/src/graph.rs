//! Signed graph data model: vertices plus attractive and repulsive weighted
//! edges.
//!
//! Edges are identified positionally. Every edge has a global index (its
//! position in construction order) and a per-polarity id (its position among
//! the edges of the same polarity). Active sets and file formats always speak
//! in per-polarity ids, so a parallel attractive/repulsive pair between the
//! same two vertices stays unambiguous.

use crate::error::{Error, Result};

/// Whether an edge pulls its endpoints together or pushes them apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Attractive,
    Repulsive,
}

impl Polarity {
    pub fn symbol(self) -> char {
        match self {
            Polarity::Attractive => '+',
            Polarity::Repulsive => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Polarity::Attractive),
            '-' => Some(Polarity::Repulsive),
            _ => None,
        }
    }
}

/// Reference to one edge: polarity class plus the id within that class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub polarity: Polarity,
    pub id: usize,
}

impl EdgeRef {
    pub fn attractive(id: usize) -> Self {
        EdgeRef { polarity: Polarity::Attractive, id }
    }

    pub fn repulsive(id: usize) -> Self {
        EdgeRef { polarity: Polarity::Repulsive, id }
    }
}

/// One edge as seen by callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub polarity: Polarity,
}

/// Immutable signed graph. Construction validates all invariants; afterwards
/// the graph is plain shared data.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    num_vertices: usize,
    // Struct-of-arrays storage in construction order; kept compact because
    // grid graphs reach tens of millions of edges.
    us: Vec<u32>,
    vs: Vec<u32>,
    weights: Vec<f64>,
    polarities: Vec<Polarity>,
    /// Global indices of attractive edges, in per-polarity id order.
    attractive: Vec<usize>,
    /// Global indices of repulsive edges, in per-polarity id order.
    repulsive: Vec<usize>,
    unique_weights: bool,
}

impl SignedGraph {
    /// Builds a graph from `(u, v, weight, polarity)` tuples in order.
    ///
    /// Rejects self-loops, out-of-range endpoints, negative or non-finite
    /// weights, and parallel edges of the same polarity. Parallel edges of
    /// opposite polarity are allowed.
    pub fn new(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64, Polarity)>,
    ) -> Result<Self> {
        if num_vertices > u32::MAX as usize {
            return Err(Error::Input(format!(
                "vertex count {num_vertices} exceeds supported maximum"
            )));
        }
        let mut g = SignedGraph {
            num_vertices,
            us: Vec::new(),
            vs: Vec::new(),
            weights: Vec::new(),
            polarities: Vec::new(),
            attractive: Vec::new(),
            repulsive: Vec::new(),
            unique_weights: false,
        };
        for (u, v, weight, polarity) in edges {
            if u == v {
                return Err(Error::Input(format!("self-loop on vertex {u}")));
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) out of range for {num_vertices} vertices"
                )));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) has invalid weight {weight}; weights must be finite and >= 0"
                )));
            }
            let global = g.us.len();
            g.us.push(u as u32);
            g.vs.push(v as u32);
            g.weights.push(weight);
            g.polarities.push(polarity);
            match polarity {
                Polarity::Attractive => g.attractive.push(global),
                Polarity::Repulsive => g.repulsive.push(global),
            }
        }
        g.check_no_parallel_same_polarity()?;
        g.unique_weights = compute_unique_weights(&g.weights);
        Ok(g)
    }

    // Sort-based duplicate detection; hashing every pair would double the
    // memory footprint on grid-sized graphs.
    fn check_no_parallel_same_polarity(&self) -> Result<()> {
        for globals in [&self.attractive, &self.repulsive] {
            let mut keys: Vec<u64> = globals
                .iter()
                .map(|&g| {
                    let (a, b) = (self.us[g].min(self.vs[g]), self.us[g].max(self.vs[g]));
                    (a as u64) << 32 | b as u64
                })
                .collect();
            keys.sort_unstable();
            if keys.windows(2).any(|w| w[0] == w[1]) {
                let dup = keys
                    .windows(2)
                    .find(|w| w[0] == w[1])
                    .map(|w| ((w[0] >> 32) as u32, w[0] as u32))
                    .unwrap();
                return Err(Error::Input(format!(
                    "parallel edges of the same polarity between vertices {} and {}",
                    dup.0, dup.1
                )));
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.us.len()
    }

    pub fn num_attractive(&self) -> usize {
        self.attractive.len()
    }

    pub fn num_repulsive(&self) -> usize {
        self.repulsive.len()
    }

    /// True iff no two edges (across both polarities) share a weight, by
    /// exact representation equality.
    pub fn unique_weights(&self) -> bool {
        self.unique_weights
    }

    pub fn edge(&self, e: EdgeRef) -> Edge {
        let global = self.global_index(e);
        self.edge_at(global)
    }

    /// Edge by global (construction-order) index.
    pub fn edge_at(&self, global: usize) -> Edge {
        Edge {
            u: self.us[global] as usize,
            v: self.vs[global] as usize,
            weight: self.weights[global],
            polarity: self.polarities[global],
        }
    }

    pub fn global_index(&self, e: EdgeRef) -> usize {
        match e.polarity {
            Polarity::Attractive => self.attractive[e.id],
            Polarity::Repulsive => self.repulsive[e.id],
        }
    }

    /// Per-polarity id of the edge at a global index.
    pub fn edge_ref_at(&self, global: usize) -> EdgeRef {
        let (class, polarity) = match self.polarities[global] {
            Polarity::Attractive => (&self.attractive, Polarity::Attractive),
            Polarity::Repulsive => (&self.repulsive, Polarity::Repulsive),
        };
        // `class` is sorted (ids are assigned in construction order).
        let id = class.binary_search(&global).expect("global index of wrong polarity");
        EdgeRef { polarity, id }
    }

    /// All edges in construction order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_edges()).map(|g| self.edge_at(g))
    }

    /// All edge refs in construction order.
    pub fn edge_refs(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        (0..self.num_edges()).map(|g| self.edge_ref_at(g))
    }

    pub fn attractive_edges(&self) -> impl Iterator<Item = (usize, Edge)> + '_ {
        self.attractive.iter().enumerate().map(|(id, &g)| (id, self.edge_at(g)))
    }

    pub fn repulsive_edges(&self) -> impl Iterator<Item = (usize, Edge)> + '_ {
        self.repulsive.iter().enumerate().map(|(id, &g)| (id, self.edge_at(g)))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.num_vertices {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "vertex {v} out of range for {} vertices",
                self.num_vertices
            )))
        }
    }
}

fn compute_unique_weights(weights: &[f64]) -> bool {
    let mut bits: Vec<u64> = weights.iter().map(|w| w.to_bits()).collect();
    bits.sort_unstable();
    !bits.windows(2).any(|w| w[0] == w[1])
}
