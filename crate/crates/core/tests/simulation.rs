use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use v2xcast::model::MessageCatalog;
use v2xcast::sim::{
    generate_scenario, parse_range, replication_seed, run_campaign, step_mobility, Deployment,
    ScenarioConfig, Sweep, SweepParameter,
};
use v2xcast::solvers::{solve, SolverConfig, SolverKind};

fn small() -> ScenarioConfig {
    ScenarioConfig {
        n_bs: 2,
        n_vehicles: 12,
        slots: 200,
        replications: 6,
        rb_budget: 10,
        ..ScenarioConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn fixed_spacing_places_bs_every_kilometre() {
    let w = generate_scenario(&ScenarioConfig::default(), &mut rng(1)).unwrap();
    let xs: Vec<f64> = w
        .scenario
        .base_stations
        .iter()
        .map(|b| b.position.x)
        .collect();
    assert_eq!(xs, [0.0, 1000.0, 2000.0, 3000.0, 4000.0]);
    assert_eq!(w.scenario.road.length_m, 5000.0);
    assert!(w
        .scenario
        .vehicles
        .iter()
        .all(|v| v.interest.iter().all(|&i| i)));
    assert_eq!(w.scenario.messages, MessageCatalog::standard().default);
}

#[test]
fn defaults_follow_the_environment_table() {
    let c = ScenarioConfig::default();
    assert_eq!(c.cell_radius_m, 500.0);
    assert_eq!(c.channel.tx_power_dbm, 23.0);
    assert_eq!(c.channel.shadowing_sigma_db, 8.2);
    assert_eq!(c.speed_band_kmh, [90.0, 110.0]);
    assert_eq!(c.slots, 1000);
}

#[test]
fn same_seed_same_world() {
    let c = small();
    let a = generate_scenario(&c, &mut rng(42)).unwrap();
    let b = generate_scenario(&c, &mut rng(42)).unwrap();
    assert_eq!(a, b);
    let d = generate_scenario(&c, &mut rng(43)).unwrap();
    assert_ne!(a, d);
}

#[test]
fn binomial_sites_are_uniform_along_the_road() {
    let c = ScenarioConfig {
        deployment: Deployment::Binomial,
        n_vehicles: 1,
        ..ScenarioConfig::default()
    };
    let bins = 10;
    let mut counts = vec![0usize; bins];
    for seed in 0..100 {
        let w = generate_scenario(&c, &mut rng(seed)).unwrap();
        let road = w.scenario.road;
        for b in &w.scenario.base_stations {
            let u = (b.position.x - road.x_start) / road.length_m;
            assert!((0.0..1.0).contains(&u));
            counts[(u * bins as f64) as usize] += 1;
        }
    }
    let expected = 500.0 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9th percentile of chi-square with 9 degrees of freedom
    assert!(chi2 < 27.877, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn mobility_displacement_matches_speed() {
    let c = ScenarioConfig {
        n_bs: 5,
        n_vehicles: 3,
        ..ScenarioConfig::default()
    };
    let mut w = generate_scenario(&c, &mut rng(3)).unwrap();
    w.scenario.vehicles[0].position.x = 100.0;
    w.scenario.vehicles[0].speed_kmh = 100.0;
    w.scenario.vehicles[1].position.x = 700.0;
    w.scenario.vehicles[1].speed_kmh = 0.0;
    w.recompute_channel().unwrap();
    for _ in 0..100 {
        step_mobility(&mut w, 10).unwrap();
    }
    let moved = w.scenario.vehicles[0].position.x - 100.0;
    assert!((moved - 27.78).abs() < 0.005, "{moved}");
    assert_eq!(w.scenario.vehicles[1].position.x, 700.0);
}

#[test]
fn vehicles_wrap_around_the_segment() {
    let mut w = generate_scenario(&small(), &mut rng(3)).unwrap();
    let end = w.scenario.road.x_start + w.scenario.road.length_m;
    w.scenario.vehicles[0].position.x = end - 1.0;
    w.scenario.vehicles[0].speed_kmh = 36.0;
    // 10 m/s for 1 s
    step_mobility(&mut w, 1000).unwrap();
    let x = w.scenario.vehicles[0].position.x;
    assert!((x - (w.scenario.road.x_start + 9.0)).abs() < 1e-9, "{x}");
}

#[test]
fn handoff_happens_when_the_midpoint_is_crossed() {
    let mut c = small();
    c.n_vehicles = 1;
    c.channel.shadowing_enabled = false;
    let mut w = generate_scenario(&c, &mut rng(8)).unwrap();
    // BSs at 0 and 1000 m; the strongest BS flips at 500 m
    w.scenario.vehicles[0].position.x = 499.9;
    w.scenario.vehicles[0].speed_kmh = 100.0;
    w.recompute_channel().unwrap();
    assert_eq!(w.channel.best_bs(0), 0);
    // 10 slots at 100 km/h: 0.278 m, which crosses 500 m
    let step = step_mobility(&mut w, 10).unwrap();
    assert_eq!(step.handoffs, [(0, 0, 1)]);
    let step = step_mobility(&mut w, 10).unwrap();
    assert!(step.handoffs.is_empty());
}

#[test]
fn one_slot_campaign_equals_one_solve() {
    let c = ScenarioConfig {
        replications: 1,
        slots: 1,
        speed_band_kmh: [0.0, 0.0],
        ..small()
    };
    let r = run_campaign(&c, &[SolverKind::Heuristic]).unwrap();
    let w = generate_scenario(&c, &mut rng(replication_seed(c.seed, 0))).unwrap();
    let s = solve(
        SolverKind::Heuristic,
        &w.scenario,
        &w.channel,
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(r.points[0].summaries[0].mean_utility, s.utility);
}

#[test]
fn campaigns_are_deterministic() {
    let c = small();
    let solvers = [SolverKind::Baseline, SolverKind::Hsca];
    let a = run_campaign(&c, &solvers).unwrap();
    let b = run_campaign(&c, &solvers).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        for s in solvers {
            assert_eq!(
                p.utilities(s, c.replications),
                q.utilities(s, c.replications)
            );
            let (x, y) = (p.summary(s).unwrap(), q.summary(s).unwrap());
            assert_eq!(
                (x.mean_utility, x.ci95, &x.throughput),
                (y.mean_utility, y.ci95, &y.throughput)
            );
        }
    }
}

#[test]
fn utility_is_throughput_weighted_by_message_value() {
    let c = small();
    let r = run_campaign(&c, &[SolverKind::Heuristic]).unwrap();
    let messages = c.resolved_messages().unwrap();
    for o in &r.points[0].outcomes {
        let from_counts: f64 = messages
            .iter()
            .zip(&o.throughput)
            .map(|(m, t)| m.value() * t)
            .sum();
        assert!((o.utility - from_counts).abs() <= 1e-6 * o.utility.max(1.0));
        for (t, k) in o.throughput.iter().zip(0..) {
            assert!(*t <= c.n_vehicles as f64, "type {k}");
        }
    }
}

#[test]
fn sequential_and_parallel_campaigns_agree() {
    let mut c = small();
    c.execution = v2xcast::exec::Execution::Sequential;
    let a = run_campaign(&c, &[SolverKind::Heuristic]).unwrap();
    c.execution = v2xcast::exec::Execution::Parallel;
    let b = run_campaign(&c, &[SolverKind::Heuristic]).unwrap();
    assert_eq!(
        a.points[0].utilities(SolverKind::Heuristic, c.replications),
        b.points[0].utilities(SolverKind::Heuristic, c.replications)
    );
}

#[test]
fn confidence_interval_shrinks_with_replications() {
    let mut c = ScenarioConfig {
        slots: 100,
        n_vehicles: 10,
        ..small()
    };
    let ci = |c: &ScenarioConfig| {
        let r = run_campaign(c, &[SolverKind::Baseline]).unwrap();
        r.points[0].summaries[0].ci95
    };
    c.replications = 20;
    let wide = ci(&c);
    c.replications = 80;
    let narrow = ci(&c);
    // quadrupling R should roughly halve the half-width
    let ratio = narrow / wide;
    assert!((0.3..0.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn sweep_runs_every_point() {
    let mut c = small();
    c.replications = 2;
    c.sweep = Sweep {
        parameter: SweepParameter::RbBudget,
        values: parse_range("2..8..3").unwrap(),
    };
    let r = run_campaign(&c, &[SolverKind::Heuristic]).unwrap();
    let xs: Vec<f64> = r.points.iter().map(|p| p.sweep_value).collect();
    assert_eq!(xs, [2.0, 5.0, 8.0]);
}

#[test]
fn config_round_trips_through_toml() {
    let mut c = small();
    c.sweep.values = vec![1.0, 2.0];
    c.spacing_m = Some(500.0);
    let back = ScenarioConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
}

#[test]
fn failed_replications_are_recorded() {
    let mut c = small();
    c.replications = 2;
    c.solver.exhaustive.state_cap = 1;
    let r = run_campaign(&c, &[SolverKind::Heuristic, SolverKind::Exhaustive]).unwrap();
    let f: Vec<_> = r.failures().collect();
    assert_eq!(f.len(), 2);
    assert!(f.iter().all(|f| f.solver == SolverKind::Exhaustive));
    let s = r.points[0].summary(SolverKind::Exhaustive).unwrap();
    assert_eq!((s.replications, s.failures), (0, 2));
    assert_eq!(
        r.points[0]
            .summary(SolverKind::Heuristic)
            .unwrap()
            .replications,
        2
    );
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let c =
            ScenarioConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        c.validate().unwrap();
        assert!(!c.sweep_values().is_empty());
        n += 1;
    }
    assert_eq!(n, 3);
}
