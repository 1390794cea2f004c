//! The four allocation algorithms and their common result type.

mod baseline;
mod common;
mod exhaustive;
mod heuristic;
mod hsca;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use exhaustive::{exhaustive_states, ExhaustiveConfig};
pub use hsca::{
    finite_diff_gradient, smoothed_term, smoothed_utility, surrogate_argmin, AugmentedVector,
    HscaConfig, SmoothedObjective,
};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::model::{evaluate_with, Allocation, Scenario};
use common::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Baseline,
    Heuristic,
    Hsca,
    Exhaustive,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Baseline,
        SolverKind::Heuristic,
        SolverKind::Hsca,
        SolverKind::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Baseline => "baseline",
            SolverKind::Heuristic => "heuristic",
            SolverKind::Hsca => "hsca",
            SolverKind::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(
                    "solver",
                    format!(
                        "unknown solver `{s}` (expected baseline, heuristic, hsca or exhaustive)"
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub hsca: HscaConfig,
    pub exhaustive: ExhaustiveConfig,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.hsca.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub solver: SolverKind,
    pub alloc: Allocation,
    pub utility: f64,
    /// Vehicles meeting their reliability target, per type.
    pub satisfied: Vec<u32>,
    /// HSCA outer iterations, heuristic trimming passes, baseline grants or
    /// exhaustive search-space size, depending on the solver.
    pub iterations: u64,
    pub association_moves: usize,
    pub wall_time: Duration,
    /// Smoothed objective per HSCA iterate; empty for other solvers.
    pub trace: Vec<f64>,
    /// HSCA could not round to a feasible point and returned the heuristic's answer.
    pub fallback: bool,
}

impl SolverResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Run `kind` on one channel snapshot.
pub fn solve(
    kind: SolverKind,
    scenario: &Scenario,
    channel: &ChannelRealization,
    config: &SolverConfig,
) -> Result<SolverResult> {
    config.validate()?;
    let start = Instant::now();
    let p = Problem::new(scenario, channel)?;
    let mut trace = Vec::new();
    let mut fallback = false;
    let (alloc, iterations, association_moves) = match kind {
        SolverKind::Baseline => {
            let (assoc, ch, grants) = baseline::run(&p);
            (p.allocation(&assoc, &ch), grants as u64, 0)
        }
        SolverKind::Heuristic => {
            let r = heuristic::run(&p);
            (
                p.allocation(&r.assoc, &r.choices),
                r.trim_iterations as u64,
                r.association_moves,
            )
        }
        SolverKind::Hsca => {
            let r = hsca::run(&p, &config.hsca);
            trace = r.trace;
            if r.infeasible {
                fallback = true;
                let h = heuristic::run(&p);
                (
                    p.allocation(&h.assoc, &h.choices),
                    r.iterations as u64,
                    h.association_moves,
                )
            } else {
                (
                    p.allocation(&r.assoc, &r.choices),
                    r.iterations as u64,
                    r.association_moves,
                )
            }
        }
        SolverKind::Exhaustive => {
            let r = exhaustive::run(&p, &config.exhaustive)?;
            let states = u64::try_from(r.states).unwrap_or(u64::MAX);
            (p.allocation(&r.assoc, &r.choices), states, 0)
        }
    };
    let eval = evaluate_with(&alloc, &p.cache);
    Ok(SolverResult {
        solver: kind,
        alloc,
        utility: eval.utility,
        satisfied: eval.satisfied,
        iterations,
        association_moves,
        wall_time: start.elapsed(),
        trace,
        fallback,
    })
}
