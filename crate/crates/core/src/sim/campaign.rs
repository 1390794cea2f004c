//! Time-slotted replications and their aggregation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SweepParameter};
use super::stats::{ci95, mean};
use super::world::{generate_scenario, step_mobility};
use crate::error::Result;
use crate::exec::{map_indices, with_threads};
use crate::model::evaluate;
use crate::solvers::{exhaustive_states, solve, SolverKind};

/// Per-slot averages of one solver over one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub utility: f64,
    /// Mean vehicles per slot meeting each type's reliability target.
    pub throughput: Vec<f64>,
    pub mean_runtime_ms: f64,
    pub solves: usize,
    pub fallbacks: usize,
    pub handoffs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub sweep_value: f64,
    pub replication: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub mean_utility: f64,
    pub ci95: f64,
    pub throughput: Vec<f64>,
    pub mean_runtime_ms: f64,
    /// Replications that completed; failed ones are excluded from the means.
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub sweep_value: f64,
    pub summaries: Vec<SolverSummary>,
    /// Ordered by replication, then by solver selection order.
    pub outcomes: Vec<ReplicationOutcome>,
    pub failures: Vec<ReplicationFailure>,
}

impl PointResult {
    pub fn summary(&self, solver: SolverKind) -> Option<&SolverSummary> {
        self.summaries.iter().find(|s| s.solver == solver)
    }

    /// Utilities of `solver` indexed by replication; `None` where it failed.
    pub fn utilities(&self, solver: SolverKind, replications: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; replications];
        for o in self.outcomes.iter().filter(|o| o.solver == solver) {
            out[o.replication] = Some(o.utility);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub sweep_parameter: SweepParameter,
    pub solvers: Vec<SolverKind>,
    pub replications: usize,
    pub n_messages: usize,
    pub points: Vec<PointResult>,
}

impl CampaignResult {
    pub fn failures(&self) -> impl Iterator<Item = &ReplicationFailure> {
        self.points.iter().flat_map(|p| &p.failures)
    }
}

/// Seed of replication `r`: the root seed plus `r`.
pub fn replication_seed(root: u64, replication: usize) -> u64 {
    root.wrapping_add(replication as u64)
}

/// Simulate `config.slots` slots for one solver. The world depends only on the
/// replication seed, so solvers sharing a replication see the same vehicles and channel.
pub fn run_replication(
    config: &ScenarioConfig,
    solver: SolverKind,
    replication: usize,
) -> Result<ReplicationOutcome> {
    let seed = replication_seed(config.seed, replication);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut world = generate_scenario(config, &mut rng)?;
    let n_k = world.scenario.n_messages();
    let (slots, resolve, step) = (
        config.slots,
        config.resolve_period_slots,
        config.mobility_step_slots,
    );

    let mut alloc = None;
    let mut utility = 0.0;
    let mut counts = vec![0.0; n_k];
    let mut runtime_ms = 0.0;
    let (mut solves, mut fallbacks, mut handoffs) = (0, 0, 0);
    let mut t = 0;
    while t < slots {
        if t % resolve == 0 {
            let r = solve(solver, &world.scenario, &world.channel, &config.solver)?;
            runtime_ms += r.wall_time.as_secs_f64() * 1e3;
            solves += 1;
            fallbacks += usize::from(r.fallback);
            alloc = Some(r.alloc);
        }
        let a = alloc.as_mut().expect("slot 0 always solves");
        let next = ((t / step + 1) * step)
            .min((t / resolve + 1) * resolve)
            .min(slots);
        let held = f64::from(next - t);
        let eval = evaluate(a, &world.scenario, &world.channel)?;
        utility += eval.utility * held;
        for (c, s) in counts.iter_mut().zip(&eval.satisfied) {
            *c += f64::from(*s) * held;
        }
        t = next;
        if t < slots && t % step == 0 {
            let moved = step_mobility(&mut world, step)?;
            handoffs += moved.handoffs.len();
            for (v, _, new) in moved.handoffs {
                for (n, row) in a.y.iter_mut().enumerate() {
                    row[v] = u8::from(n == new);
                }
            }
        }
    }
    let total = f64::from(slots);
    Ok(ReplicationOutcome {
        replication,
        seed,
        solver,
        utility: utility / total,
        throughput: counts.into_iter().map(|c| c / total).collect(),
        mean_runtime_ms: runtime_ms / solves as f64,
        solves,
        fallbacks,
        handoffs,
    })
}

/// Largest exhaustive search space over the sweep, sized on each point's first
/// replication. Interest draws can differ between replications, so this is a
/// guide for refusing the oracle up front, not a bound.
pub fn exhaustive_search_size(config: &ScenarioConfig) -> Result<u128> {
    config.validate()?;
    let mut largest = 0;
    for value in config.sweep_values() {
        let cfg = config.at_sweep_value(value)?;
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(cfg.seed, 0));
        let world = generate_scenario(&cfg, &mut rng)?;
        largest = largest.max(exhaustive_states(&world.scenario)?);
    }
    Ok(largest)
}

/// Every sweep point × replication × solver, aggregated per point and solver.
pub fn run_campaign(config: &ScenarioConfig, solvers: &[SolverKind]) -> Result<CampaignResult> {
    config.validate()?;
    let n_messages = config.resolved_messages()?.len();
    let mut points = Vec::new();
    for value in config.sweep_values() {
        let cfg = config.at_sweep_value(value)?;
        let jobs = cfg.replications * solvers.len();
        let runs = with_threads(cfg.jobs, || {
            map_indices(cfg.execution, jobs, |i| {
                let (r, s) = (i / solvers.len(), solvers[i % solvers.len()]);
                (r, s, run_replication(&cfg, s, r))
            })
        });
        let mut outcomes = Vec::new();
        let mut failures = Vec::new();
        for (r, s, res) in runs {
            match res {
                Ok(o) => outcomes.push(o),
                Err(e) => failures.push(ReplicationFailure {
                    sweep_value: value,
                    replication: r,
                    seed: replication_seed(cfg.seed, r),
                    solver: s,
                    message: e.to_string(),
                }),
            }
        }
        let summaries = solvers
            .iter()
            .map(|&s| summarize(s, &outcomes, &failures, n_messages))
            .collect();
        points.push(PointResult {
            sweep_value: value,
            summaries,
            outcomes,
            failures,
        });
    }
    Ok(CampaignResult {
        sweep_parameter: config.sweep.parameter,
        solvers: solvers.to_vec(),
        replications: config.replications,
        n_messages,
        points,
    })
}

fn summarize(
    solver: SolverKind,
    outcomes: &[ReplicationOutcome],
    failures: &[ReplicationFailure],
    n_messages: usize,
) -> SolverSummary {
    let mine: Vec<&ReplicationOutcome> = outcomes.iter().filter(|o| o.solver == solver).collect();
    let utilities: Vec<f64> = mine.iter().map(|o| o.utility).collect();
    let throughput = (0..n_messages)
        .map(|k| mean(&mine.iter().map(|o| o.throughput[k]).collect::<Vec<_>>()))
        .collect();
    SolverSummary {
        solver,
        mean_utility: mean(&utilities),
        ci95: ci95(&utilities),
        throughput,
        mean_runtime_ms: mean(&mine.iter().map(|o| o.mean_runtime_ms).collect::<Vec<_>>()),
        replications: mine.len(),
        failures: failures.iter().filter(|f| f.solver == solver).count(),
    }
}
