//! Randomized cross-checks of the solvers against the brute-force oracles,
//! shared by the CLI `verify` command and the test suite.
//!
//! Each trial draws fresh instances and checks five properties:
//! greedy-vs-oracle optimality, naive-vs-efficient agreement, seeded
//! watershed vs maximum spanning forest, the multicut relation on
//! power-of-two weights, and the cycle-inequality characterization of
//! consistency.

use crate::active::{self, ActiveSet};
use crate::error::{Error, Result};
use crate::gen;
use crate::graph::SignedGraph;
use crate::mws::{solve_efficient, solve_naive, SolveOptions};
use crate::oracle;
use crate::seeded;

/// Instance size caps for a verify run. Kept within the oracles' own limits.
#[derive(Debug, Clone, Copy)]
pub struct TrialBounds {
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for TrialBounds {
    fn default() -> Self {
        TrialBounds { max_vertices: 7, max_edges: 12 }
    }
}

impl TrialBounds {
    pub fn validate(&self) -> Result<()> {
        if self.max_vertices < 2 || self.max_vertices > 8 {
            return Err(Error::Input(format!(
                "max vertices must be in 2..=8 (oracle enumeration limits), got {}",
                self.max_vertices
            )));
        }
        if self.max_edges > 16 {
            return Err(Error::Input(format!(
                "max edges must be at most 16 (oracle enumeration limits), got {}",
                self.max_edges
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    OracleOptimality,
    NaiveEfficientAgreement,
    SeededAgreement,
    MulticutPowersOfTwo,
    CycleInequalities,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::OracleOptimality,
        Property::NaiveEfficientAgreement,
        Property::SeededAgreement,
        Property::MulticutPowersOfTwo,
        Property::CycleInequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::OracleOptimality => "oracle-optimality",
            Property::NaiveEfficientAgreement => "naive-efficient-agreement",
            Property::SeededAgreement => "seeded-msf-agreement",
            Property::MulticutPowersOfTwo => "multicut-powers-of-two",
            Property::CycleInequalities => "cycle-inequality-equivalence",
        }
    }
}

/// A failed trial: the instance and what went wrong on it.
#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub property: Property,
    pub graph: SignedGraph,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub trials_requested: usize,
    pub passes: Vec<(Property, usize)>,
    pub failure: Option<TrialFailure>,
}

impl VerifyOutcome {
    pub fn all_passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `trials` rounds of all five properties. Stops at the first failure.
///
/// `inject_fault` is a testing hook: it corrupts the solver result fed into
/// the optimality comparison so the failure path itself can be exercised.
pub fn run_trials(
    bounds: &TrialBounds,
    trials: usize,
    seed: u64,
    inject_fault: bool,
) -> Result<VerifyOutcome> {
    bounds.validate()?;
    let mut passes: Vec<(Property, usize)> = Property::ALL.iter().map(|&p| (p, 0)).collect();
    for t in 0..trials {
        let mut rng = gen::trial_rng(seed, t as u64);
        for (property, count) in passes.iter_mut() {
            match run_one(*property, bounds, &mut rng, inject_fault) {
                Ok(()) => *count += 1,
                Err(failure) => {
                    return Ok(VerifyOutcome {
                        trials_requested: trials,
                        passes,
                        failure: Some(failure),
                    });
                }
            }
        }
    }
    Ok(VerifyOutcome { trials_requested: trials, passes, failure: None })
}

fn fail(property: Property, graph: &SignedGraph, detail: impl Into<String>) -> TrialFailure {
    TrialFailure { property, graph: graph.clone(), detail: detail.into() }
}

fn run_one(
    property: Property,
    bounds: &TrialBounds,
    rng: &mut rand_chacha::ChaCha8Rng,
    inject_fault: bool,
) -> std::result::Result<(), TrialFailure> {
    match property {
        Property::OracleOptimality => {
            let g = gen::random_unique_weight_graph(rng, bounds.max_vertices, bounds.max_edges);
            let p = match oracle::minimal_dominant_power(g.weights()) {
                Ok(d) => d.p,
                Err(e) => return Err(fail(property, &g, format!("dominant power failed: {e}"))),
            };
            let greedy = solve_naive(&g, &SolveOptions::default())
                .map_err(|e| fail(property, &g, format!("solver failed: {e}")))?;
            let best = oracle::brute_force_mws(&g, &ActiveSet::new(), p)
                .map_err(|e| fail(property, &g, format!("oracle failed: {e}")))?;
            let mut greedy_active = greedy.active;
            if inject_fault {
                corrupt(&mut greedy_active, &g);
            }
            if greedy_active != best.active {
                return Err(fail(
                    property,
                    &g,
                    format!(
                        "greedy active set differs from the exhaustive optimum at p={p}: \
                         greedy {greedy_active:?} vs optimal {:?}",
                        best.active
                    ),
                ));
            }
            Ok(())
        }
        Property::NaiveEfficientAgreement => {
            // Larger instances than the oracle properties; ties on purpose.
            let g = gen::random_signed_graph(rng, bounds.max_vertices.max(4) * 3, 60);
            let naive = solve_naive(&g, &SolveOptions::default())
                .map_err(|e| fail(property, &g, format!("naive failed: {e}")))?;
            let efficient = solve_efficient(&g, &SolveOptions::default())
                .map_err(|e| fail(property, &g, format!("efficient failed: {e}")))?;
            if naive.active != efficient.active {
                return Err(fail(property, &g, "active sets differ"));
            }
            if naive.clustering != efficient.clustering {
                return Err(fail(property, &g, "clusterings differ"));
            }
            if !active::is_forest(&g, &efficient.active)
                || active::has_violating_cycle(&g, &efficient.active)
            {
                return Err(fail(property, &g, "solver output is inconsistent"));
            }
            Ok(())
        }
        Property::SeededAgreement => {
            let g = gen::random_connected_attractive_graph(rng, bounds.max_vertices.max(4) * 3);
            let count = rand::Rng::random_range(rng, 2..=5usize).min(g.num_vertices());
            let seeds = gen::random_seeds(rng, g.num_vertices(), count);
            let a = seeded::seeded_mws(&g, &seeds)
                .map_err(|e| fail(property, &g, format!("seeded mws failed: {e}")))?;
            let b = seeded::seeded_msf_reference(&g, &seeds)
                .map_err(|e| fail(property, &g, format!("msf reference failed: {e}")))?;
            if a != b {
                return Err(fail(
                    property,
                    &g,
                    format!("clusterings differ for seeds {:?}", seeds.seeds()),
                ));
            }
            Ok(())
        }
        Property::MulticutPowersOfTwo => {
            let g = gen::random_power_of_two_graph(rng, bounds.max_vertices.min(7));
            let mws = solve_efficient(&g, &SolveOptions::default())
                .map_err(|e| fail(property, &g, format!("solver failed: {e}")))?;
            let costs = oracle::signed_costs_from_mws_graph(&g, 1);
            let mc = oracle::brute_force_multicut(&g, &costs)
                .map_err(|e| fail(property, &g, format!("multicut oracle failed: {e}")))?;
            if !mc.is_unique() {
                return Err(fail(
                    property,
                    &g,
                    format!("expected a unique multicut minimizer, got {}", mc.minimizers.len()),
                ));
            }
            if mws.clustering != *mc.clustering() {
                return Err(fail(
                    property,
                    &g,
                    format!(
                        "clusterings differ: mws {:?} vs multicut {:?} (energy {})",
                        mws.clustering.labels(),
                        mc.clustering().labels(),
                        mc.energy
                    ),
                ));
            }
            Ok(())
        }
        Property::CycleInequalities => {
            let g = gen::random_signed_graph(rng, bounds.max_vertices, bounds.max_edges.min(14));
            let subset = gen::random_edge_subset(rng, &g, 0.45);
            let via_inequalities = oracle::cycle_inequalities_hold(&g, &subset)
                .map_err(|e| fail(property, &g, format!("cycle enumeration failed: {e}")))?;
            let via_components = !active::has_violating_cycle(&g, &subset);
            if via_inequalities != via_components {
                return Err(fail(
                    property,
                    &g,
                    format!(
                        "inequalities say {via_inequalities}, component check says \
                         {via_components} for subset {subset:?}"
                    ),
                ));
            }
            Ok(())
        }
    }
}

/// Flips one edge in or out of the set; used only by the fault-injection
/// fixture.
fn corrupt(set: &mut ActiveSet, graph: &SignedGraph) {
    let first_member = set.edge_refs().next();
    if let Some(e) = first_member {
        set.remove(e);
    } else if let Some(e) = graph.edge_refs().next() {
        set.insert(e);
    }
}
