//! Scenario generation, mobility and replicated campaigns.

mod campaign;
mod config;
mod output;
pub mod stats;
mod world;

pub use campaign::{
    exhaustive_search_size, replication_seed, run_campaign, run_replication, CampaignResult,
    PointResult, ReplicationFailure, ReplicationOutcome, SolverSummary,
};
pub use config::{parse_range, Deployment, ScenarioConfig, Sweep, SweepParameter};
pub use output::{summary_header, write_paired_csv, write_summary_csv, Manifest, PAIRED_HEADER};
pub use world::{generate_scenario, step_mobility, MobilityStep, World};
