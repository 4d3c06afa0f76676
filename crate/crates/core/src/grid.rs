//! Grid graphs from affinity volumes.
//!
//! A volume stores one channel per offset-pattern entry; each entry defines
//! edges of one polarity at one spatial offset, instantiated at every voxel
//! on the entry's stride lattice whose partner falls inside the volume.
//! Vertices are voxels in row-major order.

use crate::active::SimpleUnionFind;
use crate::error::{Error, Result};
use crate::graph::{Polarity, SignedGraph};
use crate::mws::{solve_efficient, SolveOptions};

/// One edge family: spatial offset (dz, dy, dx), polarity, and the stride
/// lattice it is instantiated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetEntry {
    pub offset: [i64; 3],
    pub polarity: Polarity,
    pub stride: [usize; 3],
}

impl OffsetEntry {
    pub fn attractive(offset: [i64; 3]) -> Self {
        OffsetEntry { offset, polarity: Polarity::Attractive, stride: [1, 1, 1] }
    }

    pub fn repulsive(offset: [i64; 3]) -> Self {
        OffsetEntry { offset, polarity: Polarity::Repulsive, stride: [1, 1, 1] }
    }

    pub fn with_stride(mut self, stride: [usize; 3]) -> Self {
        self.stride = stride;
        self
    }
}

/// Ordered list of offset entries; the channel order of every aligned
/// affinity volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetPattern {
    entries: Vec<OffsetEntry>,
}

impl OffsetPattern {
    pub fn new(entries: Vec<OffsetEntry>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if e.offset == [0, 0, 0] {
                return Err(Error::Input("zero offset in pattern".into()));
            }
            if e.stride.iter().any(|&s| s == 0) {
                return Err(Error::Input(format!("stride must be >= 1, got {:?}", e.stride)));
            }
            if !seen.insert((e.offset, e.polarity)) {
                return Err(Error::Input(format!(
                    "duplicate (offset, polarity) entry {:?} {:?}",
                    e.offset, e.polarity
                )));
            }
        }
        Ok(OffsetPattern { entries })
    }

    pub fn entries(&self) -> &[OffsetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_attractive(&self) -> usize {
        self.entries.iter().filter(|e| e.polarity == Polarity::Attractive).count()
    }

    pub fn num_repulsive(&self) -> usize {
        self.entries.iter().filter(|e| e.polarity == Polarity::Repulsive).count()
    }

    /// In-plane pattern: two local attractive neighbors; a sparse repulsive
    /// ring of radius about 9 (diagonals at (7,7), just under 10) and four
    /// long-range repulsive offsets at distance 27, both on a stride-2
    /// lattice in Y and X. The diagonal offsets use odd components so the
    /// +/- entries never instantiate the same vertex pair on the stride
    /// lattice.
    pub fn default_2d() -> Self {
        let rep = |dy: i64, dx: i64| OffsetEntry::repulsive([0, dy, dx]).with_stride([1, 2, 2]);
        OffsetPattern::new(vec![
            OffsetEntry::attractive([0, -1, 0]),
            OffsetEntry::attractive([0, 0, -1]),
            rep(-9, 0),
            rep(9, 0),
            rep(0, -9),
            rep(0, 9),
            rep(-7, -7),
            rep(-7, 7),
            rep(7, -7),
            rep(7, 7),
            rep(-27, 0),
            rep(27, 0),
            rep(0, -27),
            rep(0, 27),
        ])
        .expect("constant pattern is valid")
    }

    /// The 2D pattern per plane plus direct attractive and indirect
    /// repulsive neighbors in the previous plane (anisotropic data keeps
    /// Z-edges at distance 1).
    pub fn default_3d() -> Self {
        let mut entries = vec![
            OffsetEntry::attractive([0, -1, 0]),
            OffsetEntry::attractive([0, 0, -1]),
            OffsetEntry::attractive([-1, 0, 0]),
        ];
        entries.extend(
            Self::default_2d().entries().iter().copied().filter(|e| e.polarity == Polarity::Repulsive),
        );
        entries.extend([
            OffsetEntry::repulsive([-1, -1, 0]),
            OffsetEntry::repulsive([-1, 1, 0]),
            OffsetEntry::repulsive([-1, 0, -1]),
            OffsetEntry::repulsive([-1, 0, 1]),
        ]);
        OffsetPattern::new(entries).expect("constant pattern is valid")
    }

    /// Mirror pattern: repulsive edges at exactly the local attractive
    /// offsets. Ground-truth affinities on this pattern put a mutex on every
    /// pair of adjacent objects, so segmentation recovers connected objects
    /// exactly; segmentation round-trip checks rely on it.
    pub fn local_2d() -> Self {
        OffsetPattern::new(vec![
            OffsetEntry::attractive([0, -1, 0]),
            OffsetEntry::attractive([0, 0, -1]),
            OffsetEntry::repulsive([0, -1, 0]),
            OffsetEntry::repulsive([0, 0, -1]),
        ])
        .expect("constant pattern is valid")
    }

    pub fn local_3d() -> Self {
        OffsetPattern::new(vec![
            OffsetEntry::attractive([-1, 0, 0]),
            OffsetEntry::attractive([0, -1, 0]),
            OffsetEntry::attractive([0, 0, -1]),
            OffsetEntry::repulsive([-1, 0, 0]),
            OffsetEntry::repulsive([0, -1, 0]),
            OffsetEntry::repulsive([0, 0, -1]),
        ])
        .expect("constant pattern is valid")
    }
}

/// Channels-first, C-order stack of per-offset affinity channels with values
/// in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityVolume {
    shape: [usize; 3],
    channels: usize,
    data: Vec<f32>,
}

impl AffinityVolume {
    pub fn new(shape: [usize; 3], channels: usize, data: Vec<f32>) -> Result<Self> {
        let voxels = shape[0] * shape[1] * shape[2];
        if data.len() != channels * voxels {
            return Err(Error::Input(format!(
                "affinity data has {} values, expected {} ({} channels x {} voxels)",
                data.len(),
                channels * voxels,
                channels,
                voxels
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::Input(format!("affinity value {bad} outside [0, 1]")));
        }
        Ok(AffinityVolume { shape, channels, data })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_voxels(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    fn voxel_index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.shape[1] + y) * self.shape[2] + x
    }

    pub fn get(&self, c: usize, z: usize, y: usize, x: usize) -> f32 {
        self.data[c * self.num_voxels() + self.voxel_index(z, y, x)]
    }
}

/// Dense non-negative voxel labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVolume {
    shape: [usize; 3],
    labels: Vec<u32>,
}

impl LabelVolume {
    pub fn new(shape: [usize; 3], labels: Vec<u32>) -> Result<Self> {
        if labels.len() != shape[0] * shape[1] * shape[2] {
            return Err(Error::Input(format!(
                "label data has {} values for shape {:?}",
                labels.len(),
                shape
            )));
        }
        Ok(LabelVolume { shape, labels })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, z: usize, y: usize, x: usize) -> u32 {
        self.labels[(z * self.shape[1] + y) * self.shape[2] + x]
    }
}

/// Row-major mapping between graph vertices and voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoxelIndexMap {
    shape: [usize; 3],
}

impl VoxelIndexMap {
    pub fn new(shape: [usize; 3]) -> Self {
        VoxelIndexMap { shape }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn num_vertices(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn vertex_of(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.shape[1] + y) * self.shape[2] + x
    }

    pub fn voxel_of(&self, vertex: usize) -> [usize; 3] {
        let x = vertex % self.shape[2];
        let rest = vertex / self.shape[2];
        [rest / self.shape[1], rest % self.shape[1], x]
    }
}

/// Calls `f(channel, source voxel, partner voxel)` for every edge the
/// pattern instantiates on `shape`, in the canonical order: channels in
/// pattern order, source voxels row-major on the stride lattice. This single
/// walk defines edge ids for graphs and cost vectors alike.
fn visit_edges(
    shape: [usize; 3],
    pattern: &OffsetPattern,
    mut f: impl FnMut(usize, [usize; 3], [usize; 3]),
) {
    let dims = [shape[0] as i64, shape[1] as i64, shape[2] as i64];
    for (c, entry) in pattern.entries().iter().enumerate() {
        for z in (0..shape[0]).step_by(entry.stride[0]) {
            for y in (0..shape[1]).step_by(entry.stride[1]) {
                for x in (0..shape[2]).step_by(entry.stride[2]) {
                    let pz = z as i64 + entry.offset[0];
                    let py = y as i64 + entry.offset[1];
                    let px = x as i64 + entry.offset[2];
                    if pz < 0 || py < 0 || px < 0 || pz >= dims[0] || py >= dims[1] || px >= dims[2]
                    {
                        continue;
                    }
                    f(c, [z, y, x], [pz as usize, py as usize, px as usize]);
                }
            }
        }
    }
}

/// Number of edges `visit_edges` produces for one entry, computed in closed
/// form per axis; used as an independent check on the enumeration.
pub fn analytic_edge_count(shape: [usize; 3], entry: &OffsetEntry) -> usize {
    let mut count = 1usize;
    for d in 0..3 {
        let extent = shape[d] as i64;
        let o = entry.offset[d];
        let s = entry.stride[d] as i64;
        // source positions k*s with 0 <= k*s < extent and 0 <= k*s + o < extent
        let lo = 0.max(-o);
        let hi = (extent - 1).min(extent - 1 - o);
        if hi < lo {
            return 0;
        }
        // smallest multiple of s >= lo, largest <= hi
        let first = (lo + s - 1) / s * s;
        if first > hi {
            return 0;
        }
        count *= ((hi - first) / s + 1) as usize;
    }
    count
}

/// Builds the signed grid graph: one vertex per voxel, one edge per in-bounds
/// pattern instantiation, weighted by the channel value at the source voxel.
pub fn graph_from_affinities(
    vol: &AffinityVolume,
    pattern: &OffsetPattern,
) -> Result<(SignedGraph, VoxelIndexMap)> {
    if vol.channels() != pattern.len() {
        return Err(Error::Input(format!(
            "volume has {} channels but the pattern has {} entries",
            vol.channels(),
            pattern.len()
        )));
    }
    let map = VoxelIndexMap::new(vol.shape());
    let mut edges = Vec::new();
    visit_edges(vol.shape(), pattern, |c, src, dst| {
        let u = map.vertex_of(src[0], src[1], src[2]);
        let v = map.vertex_of(dst[0], dst[1], dst[2]);
        let w = vol.get(c, src[0], src[1], src[2]) as f64;
        edges.push((u, v, w, pattern.entries()[c].polarity));
    });
    let graph = SignedGraph::new(map.num_vertices(), edges)?;
    Ok((graph, map))
}

/// Ground-truth affinities: attractive channels are 1 where the voxel pair
/// shares a label, repulsive channels are 1 where the labels differ. Voxels
/// whose partner is out of bounds keep 0 in every channel and are never read
/// back by graph construction.
pub fn affinities_from_labels(labels: &LabelVolume, pattern: &OffsetPattern) -> AffinityVolume {
    let shape = labels.shape();
    let voxels = shape[0] * shape[1] * shape[2];
    let mut data = vec![0.0f32; pattern.len() * voxels];
    let dims = [shape[0] as i64, shape[1] as i64, shape[2] as i64];
    for (c, entry) in pattern.entries().iter().enumerate() {
        for z in 0..shape[0] {
            for y in 0..shape[1] {
                for x in 0..shape[2] {
                    let pz = z as i64 + entry.offset[0];
                    let py = y as i64 + entry.offset[1];
                    let px = x as i64 + entry.offset[2];
                    if pz < 0
                        || py < 0
                        || px < 0
                        || pz >= dims[0]
                        || py >= dims[1]
                        || px >= dims[2]
                    {
                        continue;
                    }
                    let same =
                        labels.get(z, y, x) == labels.get(pz as usize, py as usize, px as usize);
                    let value = match entry.polarity {
                        Polarity::Attractive => same,
                        Polarity::Repulsive => !same,
                    };
                    if value {
                        data[c * voxels + (z * shape[1] + y) * shape[2] + x] = 1.0;
                    }
                }
            }
        }
    }
    AffinityVolume::new(shape, pattern.len(), data).expect("generated affinities are in range")
}

/// End-to-end segmentation: build the grid graph, run the efficient solver,
/// map cluster labels back onto voxels.
pub fn segment(vol: &AffinityVolume, pattern: &OffsetPattern) -> Result<LabelVolume> {
    let (graph, map) = graph_from_affinities(vol, pattern)?;
    let result = solve_efficient(&graph, &SolveOptions::default())?;
    let labels: Vec<u32> = result
        .clustering
        .labels()
        .iter()
        .map(|&l| u32::try_from(l).expect("cluster count fits in u32"))
        .collect();
    LabelVolume::new(map.shape(), labels)
}

/// Thresholding baseline. The boundary map is the maximum of (1 - affinity)
/// over the attractive channels whose partner is in bounds; voxels at or
/// above the threshold become label 0, the rest are connected components of
/// the attractive adjacency, labeled from 1 in row-major order of their
/// smallest voxel.
pub fn threshold_baseline(
    vol: &AffinityVolume,
    pattern: &OffsetPattern,
    threshold: f64,
) -> Result<LabelVolume> {
    if vol.channels() != pattern.len() {
        return Err(Error::Input(format!(
            "volume has {} channels but the pattern has {} entries",
            vol.channels(),
            pattern.len()
        )));
    }
    if pattern.num_attractive() == 0 {
        return Err(Error::Input("threshold baseline needs attractive pattern entries".into()));
    }
    let shape = vol.shape();
    let voxels = vol.num_voxels();
    let map = VoxelIndexMap::new(shape);

    let mut boundary = vec![0.0f64; voxels];
    let attractive_only = OffsetPattern::new(
        pattern.entries().iter().copied().filter(|e| e.polarity == Polarity::Attractive).collect(),
    )
    .expect("filtered pattern stays valid");
    // Channel indices of the attractive entries in the original pattern.
    let attractive_channels: Vec<usize> = pattern
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.polarity == Polarity::Attractive)
        .map(|(c, _)| c)
        .collect();
    visit_edges(shape, &attractive_only, |ac, src, _| {
        let c = attractive_channels[ac];
        let v = map.vertex_of(src[0], src[1], src[2]);
        let b = 1.0 - vol.get(c, src[0], src[1], src[2]) as f64;
        if b > boundary[v] {
            boundary[v] = b;
        }
    });

    let foreground: Vec<bool> = boundary.iter().map(|&b| b < threshold).collect();
    let mut uf = SimpleUnionFind::new(voxels);
    visit_edges(shape, &attractive_only, |_, src, dst| {
        let u = map.vertex_of(src[0], src[1], src[2]);
        let v = map.vertex_of(dst[0], dst[1], dst[2]);
        if foreground[u] && foreground[v] {
            uf.union(u, v);
        }
    });

    let mut labels = vec![0u32; voxels];
    let mut next = 1u32;
    let mut assigned: std::collections::HashMap<usize, u32> = std::collections::HashMap::new();
    for v in 0..voxels {
        if foreground[v] {
            let root = uf.find(v);
            let label = *assigned.entry(root).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            labels[v] = label;
        }
    }
    LabelVolume::new(shape, labels)
}

/// Multicut log-odds costs for every edge of the grid graph, aligned with
/// `graph_from_affinities` edge ids. Affinities are clamped away from 0 and
/// 1 before the logit.
pub const MULTICUT_COST_CLAMP: f64 = 1e-6;

pub fn multicut_costs(vol: &AffinityVolume, pattern: &OffsetPattern) -> Result<Vec<f64>> {
    if vol.channels() != pattern.len() {
        return Err(Error::Input(format!(
            "volume has {} channels but the pattern has {} entries",
            vol.channels(),
            pattern.len()
        )));
    }
    let mut costs = Vec::new();
    visit_edges(vol.shape(), pattern, |c, src, _| {
        let w = (vol.get(c, src[0], src[1], src[2]) as f64)
            .clamp(MULTICUT_COST_CLAMP, 1.0 - MULTICUT_COST_CLAMP);
        let cost = match pattern.entries()[c].polarity {
            Polarity::Attractive => (w / (1.0 - w)).ln(),
            Polarity::Repulsive => ((1.0 - w) / w).ln(),
        };
        costs.push(cost);
    });
    Ok(costs)
}
