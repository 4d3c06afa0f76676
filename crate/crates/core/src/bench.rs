//! Empirical runtime scaling: time the solver sweep (sorting excluded) over
//! growing synthetic grid problems, fit `T/E = a*ln(E) + b`, and report the
//! goodness of fit together with the mutex-table-size statistic M.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gen::rng_from_seed;
use crate::graph::SignedGraph;
use crate::grid::{affinities_from_labels, graph_from_affinities, AffinityVolume, LabelVolume, OffsetPattern};
use crate::mws::{solve_efficient_presorted, sort_edges, SolveOptions};

/// Synthetic affinity styles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthStyle {
    /// Labels grown from random sites (every object connected under the
    /// unit-offset adjacency), converted to ground-truth affinities, then
    /// perturbed: each value flips with `flip_probability` and gets uniform
    /// jitter in [0, jitter], clamped to [0, 1]. The jitter keeps weights
    /// near-unique.
    SmoothObjects { flip_probability: f64, jitter: f64 },
    /// Independent uniform values in [0, 1].
    Noise,
}

impl SynthStyle {
    pub fn smooth_default() -> Self {
        SynthStyle::SmoothObjects { flip_probability: 0.05, jitter: 0.2 }
    }

    /// Degenerate smooth-objects style that reproduces the ground-truth
    /// affinities exactly.
    pub fn smooth_exact() -> Self {
        SynthStyle::SmoothObjects { flip_probability: 0.0, jitter: 0.0 }
    }
}

/// Random label volume: multi-source growth from `num_sites` random sites,
/// a discrete Voronoi diagram under the grid geodesic metric. Every label
/// region is connected under the six-neighborhood by construction.
pub fn synth_labels_with_sites(shape: [usize; 3], seed: u64, num_sites: usize) -> LabelVolume {
    let mut rng = rng_from_seed(seed);
    let voxels = shape[0] * shape[1] * shape[2];
    let num_sites = num_sites.clamp(1, voxels);
    let mut labels = vec![u32::MAX; voxels];
    let mut queue = std::collections::VecDeque::new();
    let mut taken = std::collections::HashSet::new();
    for site in 0..num_sites {
        let v = loop {
            let v = rng.random_range(0..voxels);
            if taken.insert(v) {
                break v;
            }
        };
        labels[v] = site as u32;
        queue.push_back(v);
    }
    let strides = [shape[1] * shape[2], shape[2], 1];
    while let Some(v) = queue.pop_front() {
        let z = v / strides[0];
        let y = v % strides[0] / strides[1];
        let x = v % strides[1];
        let coords = [z, y, x];
        for axis in 0..3 {
            for dir in [-1isize, 1] {
                let c = coords[axis] as isize + dir;
                if c < 0 || c as usize >= shape[axis] {
                    continue;
                }
                let w = (v as isize + dir * strides[axis] as isize) as usize;
                if labels[w] == u32::MAX {
                    labels[w] = labels[v];
                    queue.push_back(w);
                }
            }
        }
    }
    LabelVolume::new(shape, labels).expect("generated labels match the shape")
}

/// Default site density: one site per ~400 voxels, at least two.
pub fn synth_labels(shape: [usize; 3], seed: u64) -> LabelVolume {
    let voxels = shape[0] * shape[1] * shape[2];
    synth_labels_with_sites(shape, seed, (voxels / 400).max(2))
}

/// Deterministic synthetic affinity volume for `pattern`.
pub fn synth_affinities(
    shape: [usize; 3],
    seed: u64,
    style: &SynthStyle,
    pattern: &OffsetPattern,
) -> AffinityVolume {
    match *style {
        SynthStyle::Noise => {
            let mut rng = rng_from_seed(seed ^ 0x6e6f6973);
            let voxels = shape[0] * shape[1] * shape[2];
            let data: Vec<f32> =
                (0..pattern.len() * voxels).map(|_| rng.random::<f32>().clamp(0.0, 1.0)).collect();
            AffinityVolume::new(shape, pattern.len(), data).expect("noise values are in range")
        }
        SynthStyle::SmoothObjects { flip_probability, jitter } => {
            let labels = synth_labels(shape, seed);
            let gt = affinities_from_labels(&labels, pattern);
            if flip_probability == 0.0 && jitter == 0.0 {
                return gt;
            }
            let mut rng = rng_from_seed(seed ^ 0x70657274);
            let data: Vec<f32> = gt
                .data()
                .iter()
                .map(|&v| {
                    let mut v = v;
                    if rng.random_bool(flip_probability) {
                        v = 1.0 - v;
                    }
                    let j = rng.random::<f64>() * jitter;
                    (v as f64 + j).clamp(0.0, 1.0) as f32
                })
                .collect();
            AffinityVolume::new(shape, pattern.len(), data).expect("perturbed values are clamped")
        }
    }
}

/// One measured problem size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub num_edges: usize,
    /// Median sweep time over the repeats, sorting excluded.
    pub solve_seconds: f64,
    pub sort_seconds: f64,
    /// Mean of the smaller mutex-table size over all sampled events.
    pub mean_min_mutex: f64,
    pub repeats: usize,
}

/// Least-squares fit of `y = a*ln(E) + b` with `y = T/E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    /// Set when the responses were constant, which leaves R^2 undefined;
    /// it is reported as 0 in that case.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRun {
    pub rows: Vec<ScalingRow>,
    pub fit: LogFit,
}

impl ScalingRun {
    /// Fits the rows (sorted by edge count). This is also the injection
    /// point for synthetic timings in tests.
    pub fn from_rows(mut rows: Vec<ScalingRow>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Input("need at least two rows to fit".into()));
        }
        rows.sort_by_key(|r| r.num_edges);
        let fit = fit_log(&rows);
        Ok(ScalingRun { rows, fit })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,T_solve_s,T_sort_s,M,repeats\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.num_edges, r.solve_seconds, r.sort_seconds, r.mean_min_mutex, r.repeats
            ));
        }
        out
    }

    pub fn fit_json(&self) -> String {
        format!(
            "{{\"a\": {}, \"b\": {}, \"r_squared\": {}}}\n",
            self.fit.a, self.fit.b, self.fit.r_squared
        )
    }
}

fn fit_log(rows: &[ScalingRow]) -> LogFit {
    let xs: Vec<f64> = rows.iter().map(|r| (r.num_edges as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.solve_seconds / r.num_edges as f64).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let b = y_mean - a * x_mean;
    if ss_tot <= 0.0 {
        return LogFit { a, b, r_squared: 0.0, flat: true };
    }
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - (a * x + b)).powi(2)).sum();
    LogFit { a, b, r_squared: 1.0 - ss_res / ss_tot, flat: false }
}

/// What to measure: the generator style and pattern, how many repeats per
/// size, and the base RNG seed (each size derives its own stream).
#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub style: SynthStyle,
    pub pattern: OffsetPattern,
    pub seed: u64,
    pub repeats: usize,
}

impl ScalingConfig {
    pub fn new(pattern: OffsetPattern) -> Self {
        ScalingConfig { style: SynthStyle::smooth_default(), pattern, seed: 0, repeats: 3 }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Builds one graph per size, times the sort once and the sweep
/// `repeats` times (median), and fits the per-edge time against ln E.
/// Sizes must produce at least four distinct edge counts spanning two
/// decades.
pub fn run_scaling(cfg: &ScalingConfig, sizes: &[[usize; 3]]) -> Result<ScalingRun> {
    if cfg.repeats == 0 {
        return Err(Error::Input("repeats must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for (i, &shape) in sizes.iter().enumerate() {
        let vol = synth_affinities(shape, cfg.seed.wrapping_add(i as u64), &cfg.style, &cfg.pattern);
        let (graph, _) = graph_from_affinities(&vol, &cfg.pattern)?;
        rows.push(measure_one(&graph, cfg.repeats)?);
    }
    check_size_spread(&rows)?;
    ScalingRun::from_rows(rows)
}

fn check_size_spread(rows: &[ScalingRow]) -> Result<()> {
    let mut counts: Vec<usize> = rows.iter().map(|r| r.num_edges).collect();
    counts.sort_unstable();
    counts.dedup();
    if counts.len() < 4 {
        return Err(Error::Input(format!(
            "need at least 4 distinct problem sizes, got {}",
            counts.len()
        )));
    }
    let (min, max) = (counts[0], counts[counts.len() - 1]);
    if min == 0 || max / min < 100 {
        return Err(Error::Input(format!(
            "problem sizes must span two decades of edges; got {min}..{max}"
        )));
    }
    Ok(())
}

fn measure_one(graph: &SignedGraph, repeats: usize) -> Result<ScalingRow> {
    let sort_start = Instant::now();
    let order = sort_edges(graph);
    let sort_seconds = sort_start.elapsed().as_secs_f64();

    let opts = SolveOptions { record_stats: true, ..Default::default() };
    let mut times = Vec::with_capacity(repeats);
    let mut mean_min_mutex = 0.0;
    for _ in 0..repeats {
        let solve_start = Instant::now();
        let result = solve_efficient_presorted(graph, &order, &opts)?;
        times.push(solve_start.elapsed().as_secs_f64());
        mean_min_mutex = result.stats.expect("stats were requested").mean_min_table();
    }
    Ok(ScalingRow {
        num_edges: graph.num_edges(),
        solve_seconds: median(times),
        sort_seconds,
        mean_min_mutex,
        repeats,
    })
}
