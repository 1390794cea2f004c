//! `v2xcast`: run campaigns, compare solvers, validate fixtures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use v2xcast::sim::{
    exhaustive_search_size, parse_range, run_campaign, stats, write_paired_csv, write_summary_csv,
    CampaignResult, Deployment, Manifest, ScenarioConfig, Sweep, SweepParameter,
};
use v2xcast::solvers::SolverKind;
use v2xcast::validate::{default_fixture_dir, run_validation, ValidateOptions};

#[derive(Parser)]
#[command(
    name = "v2xcast",
    version,
    about = "Multicast V2X resource allocation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and write summary.csv and manifest.json.
    Run(CampaignArgs),
    /// Run several solvers on the same replications and tabulate paired differences.
    Compare(CampaignArgs),
    /// Check fixtures and formulas against their oracles.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// TOML config, or a manifest.json from an earlier run to replay it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver name; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
    solver: Vec<SolverKind>,
    /// RBs per BS: a number or `start..end..step`.
    #[arg(long, value_name = "RANGE")]
    rb_budget: Option<String>,
    #[arg(long, value_name = "RANGE")]
    vehicles: Option<String>,
    /// Cell radius in metres.
    #[arg(long, value_name = "RANGE")]
    radius: Option<String>,
    /// Centre of a ±10 km/h speed band.
    #[arg(long, value_name = "RANGE")]
    speed: Option<String>,
    /// `fixed_spacing` or `binomial`.
    #[arg(long, value_parser = parse_deployment)]
    deployment: Option<Deployment>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    fixture_dir: Option<PathBuf>,
    /// Allowed Monte Carlo deviation in standard errors.
    #[arg(long, default_value_t = 3.0)]
    mc_tolerance: f64,
    #[arg(long, default_value_t = 200_000)]
    mc_trials: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse::<SolverKind>().map_err(|_| {
        let names: Vec<&str> = SolverKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown solver (expected one of: {})", names.join(", "))
    })
}

fn parse_deployment(s: &str) -> Result<Deployment, String> {
    s.parse::<Deployment>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap omits the usage line for bad values; show it so the valid form is visible
            if matches!(
                e.kind(),
                ErrorKind::InvalidValue | ErrorKind::ValueValidation
            ) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => campaign(&a, false),
        Command::Compare(a) => campaign(&a, true),
        Command::Validate(a) => validate(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    let Some(path) = path else {
        return Ok(ScenarioConfig::default());
    };
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        return Ok(manifest.config);
    }
    Ok(ScenarioConfig::from_path(path)?)
}

/// Apply command-line overrides. A single value sets the field; a range
/// becomes the sweep, and only one range is allowed.
fn apply_overrides(cfg: &mut ScenarioConfig, a: &CampaignArgs) -> Result<()> {
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(d) = a.deployment {
        cfg.deployment = d;
    }
    let ranged = [
        (SweepParameter::RbBudget, &a.rb_budget, "--rb-budget"),
        (SweepParameter::NVehicles, &a.vehicles, "--vehicles"),
        (SweepParameter::CellRadiusM, &a.radius, "--radius"),
        (SweepParameter::SpeedKmh, &a.speed, "--speed"),
    ];
    let mut swept: Option<&str> = None;
    for (param, text, flag) in ranged {
        let Some(text) = text else { continue };
        let values = parse_range(text).with_context(|| format!("{flag} {text}"))?;
        if values.len() > 1 {
            if let Some(other) = swept {
                bail!("only one range is allowed, got {other} and {flag}");
            }
            swept = Some(flag);
            cfg.sweep = Sweep {
                parameter: param,
                values,
            };
            continue;
        }
        let mut single = cfg.clone();
        single.sweep = Sweep {
            parameter: param,
            values: vec![],
        };
        let set = single
            .at_sweep_value(values[0])
            .with_context(|| format!("{flag} {text}"))?;
        cfg.rb_budget = set.rb_budget;
        cfg.n_vehicles = set.n_vehicles;
        cfg.cell_radius_m = set.cell_radius_m;
        cfg.speed_band_kmh = set.speed_band_kmh;
        if cfg.sweep.parameter == param {
            cfg.sweep.values.clear();
        }
    }
    Ok(())
}

fn campaign(a: &CampaignArgs, compare: bool) -> Result<bool> {
    let mut cfg = load_config(a.config.as_deref())?;
    apply_overrides(&mut cfg, a)?;
    if !a.solver.is_empty() {
        cfg.solvers = a.solver.clone();
    } else if compare {
        cfg.solvers = SolverKind::ALL.to_vec();
    }
    cfg.solvers.dedup();
    cfg.validate()?;

    let mut notes = Vec::new();
    if compare && cfg.solvers.contains(&SolverKind::Exhaustive) {
        let states = exhaustive_search_size(&cfg)?;
        let cap = u128::from(cfg.solver.exhaustive.state_cap);
        if states > cap {
            let note = format!("exhaustive left out: {states} states exceed the cap of {cap}");
            eprintln!("{note}");
            notes.push(note);
            cfg.solvers.retain(|&s| s != SolverKind::Exhaustive);
            if cfg.solvers.is_empty() {
                bail!("no solver left to run");
            }
        }
    }

    let result = run_campaign(&cfg, &cfg.solvers)?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut files = vec![PathBuf::from("summary.csv")];
    write_summary_csv(&result, &a.out_dir.join("summary.csv"))?;
    if compare {
        write_paired_csv(&result, &a.out_dir.join("paired.csv"))?;
        files.push("paired.csv".into());
    }
    files.push("manifest.json".into());
    let mut manifest = Manifest::new(&cfg, &result, files);
    manifest.notes = notes;
    manifest.write(&a.out_dir.join("manifest.json"))?;

    print_summary(&result);
    if compare {
        print_paired(&result);
    }
    let failures: Vec<_> = result.failures().collect();
    for f in &failures {
        eprintln!(
            "failed: {} replication {} (seed {}) at {} = {}: {}",
            f.solver,
            f.replication,
            f.seed,
            result.sweep_parameter.name(),
            f.sweep_value,
            f.message
        );
    }
    println!("wrote {}", a.out_dir.display());
    Ok(failures.is_empty())
}

fn print_summary(r: &CampaignResult) {
    println!(
        "{:>12}  {:<10}  {:>14}  {:>12}  {:>11}",
        r.sweep_parameter.name(),
        "solver",
        "mean utility",
        "± ci95",
        "runtime ms"
    );
    for p in &r.points {
        for s in &p.summaries {
            println!(
                "{:>12}  {:<10}  {:>14.1}  {:>12.1}  {:>11.3}",
                p.sweep_value, s.solver, s.mean_utility, s.ci95, s.mean_runtime_ms
            );
        }
    }
}

fn print_paired(r: &CampaignResult) {
    println!();
    println!(
        "{:>12}  {:<22}  {:>14}  {:>12}",
        r.sweep_parameter.name(),
        "pair",
        "mean diff",
        "± ci95"
    );
    for p in &r.points {
        for (i, &a) in r.solvers.iter().enumerate() {
            for &b in &r.solvers[i + 1..] {
                let ua = p.utilities(a, r.replications);
                let ub = p.utilities(b, r.replications);
                let (xs, ys): (Vec<f64>, Vec<f64>) = ua
                    .iter()
                    .zip(&ub)
                    .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                    .unzip();
                if xs.is_empty() {
                    continue;
                }
                let (d, ci) = stats::paired_difference(&xs, &ys);
                println!(
                    "{:>12}  {:<22}  {:>14.1}  {:>12.1}",
                    p.sweep_value,
                    format!("{a} - {b}"),
                    d,
                    ci
                );
            }
        }
    }
}

fn validate(a: &ValidateArgs) -> Result<bool> {
    let opts = ValidateOptions {
        fixture_dir: a.fixture_dir.clone().unwrap_or_else(default_fixture_dir),
        mc_trials: a.mc_trials,
        mc_tolerance_se: a.mc_tolerance,
        seed: a.seed,
    };
    let results = run_validation(&opts);
    for r in &results {
        let tag = if r.passed { "pass" } else { "FAIL" };
        println!("{tag}  {:<16}  {}", r.name, r.detail);
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}
