//! CSV and manifest files written for plotting scripts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::campaign::{CampaignResult, ReplicationFailure};
use super::config::ScenarioConfig;
use crate::error::Result;
use crate::solvers::SolverKind;

/// Header of the per-sweep summary CSV.
pub fn summary_header(n_messages: usize) -> Vec<String> {
    let mut h: Vec<String> = ["sweep_value", "solver", "mean_utility", "ci95"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=n_messages).map(|k| format!("throughput_type_{k}")));
    h.push("mean_runtime_ms".into());
    h
}

pub const PAIRED_HEADER: [&str; 7] = [
    "sweep_value",
    "replication",
    "solver_a",
    "solver_b",
    "utility_a",
    "utility_b",
    "difference",
];

pub fn write_summary_csv(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(summary_header(result.n_messages))?;
    for p in &result.points {
        for s in &p.summaries {
            let mut row = vec![
                p.sweep_value.to_string(),
                s.solver.to_string(),
                s.mean_utility.to_string(),
                s.ci95.to_string(),
            ];
            row.extend(s.throughput.iter().map(f64::to_string));
            row.push(s.mean_runtime_ms.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per sweep value, replication and solver pair where both solvers succeeded.
pub fn write_paired_csv(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PAIRED_HEADER)?;
    for p in &result.points {
        for (i, &a) in result.solvers.iter().enumerate() {
            for &b in &result.solvers[i + 1..] {
                let ua = p.utilities(a, result.replications);
                let ub = p.utilities(b, result.replications);
                for r in 0..result.replications {
                    if let (Some(x), Some(y)) = (ua[r], ub[r]) {
                        w.write_record([
                            p.sweep_value.to_string(),
                            r.to_string(),
                            a.to_string(),
                            b.to_string(),
                            x.to_string(),
                            y.to_string(),
                            (x - y).to_string(),
                        ])?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to replay a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub replication_seeds: String,
    pub solvers: Vec<SolverKind>,
    pub sweep_parameter: String,
    pub sweep_values: Vec<f64>,
    pub failures: Vec<ReplicationFailure>,
    /// Solvers left out before the run, and why.
    #[serde(default)]
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(config: &ScenarioConfig, result: &CampaignResult, files: Vec<PathBuf>) -> Self {
        Self {
            config: config.clone(),
            seed: config.seed,
            replication_seeds: "seed + replication index".into(),
            solvers: result.solvers.clone(),
            sweep_parameter: result.sweep_parameter.name().into(),
            sweep_values: result.points.iter().map(|p| p.sweep_value).collect(),
            failures: result.failures().cloned().collect(),
            notes: Vec::new(),
            files,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
