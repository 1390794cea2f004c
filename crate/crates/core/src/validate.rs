//! Oracle suite behind the `validate` subcommand: fixture tables, the FEC
//! reception formula against simulation, and hand-traced solver runs.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::association::{initial_association, refine_association};
use crate::channel::{
    marcum_q, mean_sinr_db, sinr_to_cqi, ChannelParams, ChannelRealization, Link, McsTable,
    STANDARD_ENTRIES,
};
use crate::error::{Error, Result};
use crate::model::{
    full_alphabet, ps_success, required_blocks, system_utility, Allocation, BaseStation,
    MessageCatalog, MessageType, Position, Road, Scenario, Vehicle,
};
use crate::solvers::{solve, SolverConfig, SolverKind};

/// Fixture directory shipped with the crate.
pub fn default_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub fixture_dir: PathBuf,
    pub mc_trials: usize,
    /// Allowed distance between simulated and exact PS, in standard errors.
    pub mc_tolerance_se: f64,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            fixture_dir: default_fixture_dir(),
            mc_trials: 200_000,
            mc_tolerance_se: 3.0,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, failures: Vec<String>, ok_detail: impl Into<String>) -> Self {
        let passed = failures.is_empty();
        Self {
            name: name.into(),
            passed,
            detail: if passed {
                ok_detail.into()
            } else {
                failures.join("; ")
            },
        }
    }
}

/// Run every check; a missing or unreadable fixture fails its check rather than aborting.
pub fn run_validation(opts: &ValidateOptions) -> Vec<CheckResult> {
    let mut out = vec![
        check_mcs_table(&opts.fixture_dir),
        check_catalog(&opts.fixture_dir),
    ];
    out.push(check_ps_monte_carlo(opts));
    match load_traces(&opts.fixture_dir) {
        Ok(t) => out.extend(check_traces(&t)),
        Err(e) => out.push(CheckResult::new("hand_traces", vec![e.to_string()], "")),
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Fixture CSV must reproduce the built-in table exactly, and 11.0 dB must map to CQI 10.
pub fn check_mcs_table(dir: &Path) -> CheckResult {
    let name = "mcs_table";
    let table = match McsTable::from_csv_path(dir.join("mcs_table.csv")) {
        Ok(t) => t,
        Err(e) => return CheckResult::new(name, vec![e.to_string()], ""),
    };
    let mut fails = Vec::new();
    for (i, (got, want)) in table
        .entries()
        .iter()
        .zip(STANDARD_ENTRIES.iter())
        .enumerate()
    {
        let same = got.cqi4g == want.cqi4g
            && got.cqi5g == want.cqi5g
            && got.modulation_order == want.modulation_order
            && got.code_rate_x1024 == want.code_rate_x1024
            && got.sinr_threshold_db.to_bits() == want.sinr_threshold_db.to_bits()
            && got.efficiency.to_bits() == want.efficiency.to_bits();
        if !same {
            fails.push(format!("row {i} differs from the reference table"));
        }
    }
    if sinr_to_cqi(11.0, &table) != 10 {
        fails.push("SINR 11.0 dB does not map to CQI 10".into());
    }
    CheckResult::new(name, fails, "16 rows match, 11.0 dB -> CQI 10")
}

pub fn check_catalog(dir: &Path) -> CheckResult {
    let name = "message_catalog";
    let path = dir.join("catalog.json");
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(_) => return CheckResult::new(name, vec![Error::MissingFixture(path).to_string()], ""),
    };
    match MessageCatalog::from_json(&text) {
        Ok(c) if c == MessageCatalog::standard() => {
            CheckResult::new(name, vec![], "default catalog and five levels match")
        }
        Ok(_) => CheckResult::new(
            name,
            vec!["catalog differs from the built-in one".into()],
            "",
        ),
        Err(e) => CheckResult::new(name, vec![e.to_string()], ""),
    }
}

/// Simulated fraction of trials in which at least `⌈rb·f⌉` of `rb` blocks arrive.
pub fn simulate_ps<R: Rng + ?Sized>(rb: u32, f: f64, p: f64, trials: usize, rng: &mut R) -> f64 {
    let need = required_blocks(rb, f);
    let mut hits = 0usize;
    for _ in 0..trials {
        let got = (0..rb).filter(|_| rng.random::<f64>() < p).count() as u32;
        if got >= need {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

pub fn check_ps_monte_carlo(opts: &ValidateOptions) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cases = [
        (3, 2.0 / 3.0, 0.9),
        (8, 0.5, 0.6),
        (16, 0.75, 0.8),
        (5, 1.0, 0.95),
        (12, 0.25, 0.3),
        (10, 0.9, 0.97),
    ];
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for (rb, f, p) in cases {
        let exact = ps_success(rb, f, p);
        let sim = simulate_ps(rb, f, p, opts.mc_trials, &mut rng);
        let se = (exact * (1.0 - exact) / opts.mc_trials as f64).sqrt();
        let z = if se > 0.0 {
            (sim - exact).abs() / se
        } else {
            0.0
        };
        worst = worst.max(z);
        if z > opts.mc_tolerance_se {
            fails.push(format!(
                "rb={rb} f={f:.3} p={p}: exact {exact:.6}, simulated {sim:.6} ({z:.2} SE)"
            ));
        }
    }
    CheckResult::new(
        "ps_monte_carlo",
        fails,
        format!("{} cases, worst deviation {worst:.2} SE", cases.len()),
    )
}

#[derive(Debug, Deserialize)]
pub struct Traces {
    pub marcum: Vec<MarcumCase>,
    pub ps: Vec<PsCase>,
    pub link_budget: Vec<LinkCase>,
    pub association: Vec<AssociationCase>,
    pub solver: Vec<SolverCase>,
    pub utility: Vec<UtilityCase>,
}

#[derive(Debug, Deserialize)]
pub struct MarcumCase {
    pub a: f64,
    pub b: f64,
    pub expected: f64,
}

#[derive(Debug, Deserialize)]
pub struct PsCase {
    pub rb: u32,
    pub f: f64,
    pub p: f64,
    pub expected: f64,
}

#[derive(Debug, Deserialize)]
pub struct LinkCase {
    pub distance_m: f64,
    pub snr_db: f64,
}

#[derive(Debug, Deserialize)]
pub struct AssociationCase {
    pub name: String,
    pub sinr_db: Vec<Vec<f64>>,
    pub initial: Vec<usize>,
    pub refined: Option<Vec<usize>>,
    pub moves: Option<usize>,
}

/// A small instance given directly by its SINR and Rice-factor matrices.
#[derive(Debug, Deserialize)]
pub struct InstanceSpec {
    pub sinr_db: Vec<Vec<f64>>,
    pub k_factor: Vec<Vec<f64>>,
    pub budgets: Vec<u32>,
    pub messages: Vec<MessageType>,
    pub interest: Vec<Vec<u8>>,
    #[serde(default = "full_alphabet")]
    pub alphabet: Vec<u8>,
}

impl InstanceSpec {
    pub fn build(&self) -> (Scenario, ChannelRealization) {
        let scenario = Scenario {
            base_stations: self
                .budgets
                .iter()
                .enumerate()
                .map(|(n, &m)| BaseStation {
                    position: Position::new(n as f64 * 1000.0, 0.0),
                    rb_budget: m,
                })
                .collect(),
            vehicles: self
                .interest
                .iter()
                .map(|w| Vehicle {
                    position: Position::new(0.0, 10.0),
                    speed_kmh: 0.0,
                    interest: w.iter().map(|&b| b == 1).collect(),
                })
                .collect(),
            messages: self.messages.clone(),
            table: McsTable::standard(),
            params: ChannelParams::default(),
            slots_per_second: 1000,
            cqi_alphabet: self.alphabet.clone(),
            road: Road {
                x_start: -500.0,
                length_m: 1000.0 * self.budgets.len() as f64,
                lateral_offset_m: 10.0,
            },
        };
        let channel =
            ChannelRealization::from_sinr_and_k(self.sinr_db.clone(), self.k_factor.clone());
        (scenario, channel)
    }
}

#[derive(Debug, Deserialize)]
pub struct SolverCase {
    pub name: String,
    pub solver: SolverKind,
    #[serde(flatten)]
    pub instance: InstanceSpec,
    pub association: Option<Vec<usize>>,
    pub q: Option<Vec<Vec<u8>>>,
    pub rb: Option<Vec<Vec<u32>>>,
    pub utility: f64,
}

#[derive(Debug, Deserialize)]
pub struct UtilityCase {
    pub name: String,
    #[serde(flatten)]
    pub instance: InstanceSpec,
    pub association: Vec<usize>,
    pub q: Vec<Vec<u8>>,
    pub rb: Vec<Vec<u32>>,
    pub x: Vec<Vec<u32>>,
    pub utility: f64,
}

pub fn load_traces(dir: &Path) -> Result<Traces> {
    let path = dir.join("traces.json");
    let text = std::fs::read_to_string(&path).map_err(|_| Error::MissingFixture(path))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn check_traces(t: &Traces) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let fails = t
        .marcum
        .iter()
        .filter(|c| !close(marcum_q(c.a, c.b), c.expected, 1e-10))
        .map(|c| {
            format!(
                "Q1({}, {}) = {} (want {})",
                c.a,
                c.b,
                marcum_q(c.a, c.b),
                c.expected
            )
        })
        .collect();
    out.push(CheckResult::new(
        "marcum_q",
        fails,
        format!("{} values", t.marcum.len()),
    ));

    let fails =
        t.ps.iter()
            .filter(|c| !close(ps_success(c.rb, c.f, c.p), c.expected, 1e-12))
            .map(|c| {
                format!(
                    "PS(rb={}, f={}, p={}) = {}",
                    c.rb,
                    c.f,
                    c.p,
                    ps_success(c.rb, c.f, c.p)
                )
            })
            .collect();
    out.push(CheckResult::new(
        "ps_formula",
        fails,
        format!("{} values", t.ps.len()),
    ));

    let params = ChannelParams::default();
    let bs = BaseStation {
        position: Position::new(0.0, 0.0),
        rb_budget: 0,
    };
    let fails = t
        .link_budget
        .iter()
        .filter_map(|c| {
            let veh = Vehicle {
                position: Position::new(c.distance_m, 0.0),
                speed_kmh: 0.0,
                interest: vec![],
            };
            let link = Link {
                bs: &bs,
                shadowing_db: 0.0,
            };
            match mean_sinr_db(link, &veh, &params, &[]) {
                Ok(s) if close(s, c.snr_db, 1e-12) => None,
                Ok(s) => Some(format!("{} m: {s} dB (want {})", c.distance_m, c.snr_db)),
                Err(e) => Some(e.to_string()),
            }
        })
        .collect();
    out.push(CheckResult::new(
        "link_budget",
        fails,
        format!("{} distances", t.link_budget.len()),
    ));

    let mut fails = Vec::new();
    for c in &t.association {
        // With `refined` present, `initial` is a chosen start rather than the argmax.
        if c.refined.is_none() {
            let ch = ChannelRealization::from_sinr(c.sinr_db.clone(), 0.0);
            let init = initial_association(&ch);
            if init != c.initial {
                fails.push(format!("{}: initial {init:?}", c.name));
            }
        }
        if let Some(want) = &c.refined {
            let r = refine_association(&c.initial, &c.sinr_db, f64::NEG_INFINITY);
            if &r.association != want || Some(r.moves) != c.moves {
                fails.push(format!(
                    "{}: refined {:?} in {} moves",
                    c.name, r.association, r.moves
                ));
            }
        }
    }
    out.push(CheckResult::new(
        "association",
        fails,
        format!("{} cases", t.association.len()),
    ));

    let mut fails = Vec::new();
    for c in &t.solver {
        let (sc, ch) = c.instance.build();
        match solve(c.solver, &sc, &ch, &SolverConfig::default()) {
            Ok(r) => {
                let assoc: Vec<usize> = r
                    .alloc
                    .association()
                    .into_iter()
                    .map(|a| a.unwrap_or(usize::MAX))
                    .collect();
                let mut bad = !close(r.utility, c.utility, 1e-9);
                bad |= c.association.as_ref().is_some_and(|a| a != &assoc);
                bad |= c.q.as_ref().is_some_and(|q| q != &r.alloc.q);
                bad |= c.rb.as_ref().is_some_and(|rb| rb != &r.alloc.rb);
                if bad {
                    fails.push(format!(
                        "{}: utility {} q {:?} rb {:?} (want {} q {:?} rb {:?})",
                        c.name, r.utility, r.alloc.q, r.alloc.rb, c.utility, c.q, c.rb
                    ));
                }
            }
            Err(e) => fails.push(format!("{}: {e}", c.name)),
        }
    }
    out.push(CheckResult::new(
        "solver_traces",
        fails,
        format!("{} cases", t.solver.len()),
    ));

    let mut fails = Vec::new();
    for c in &t.utility {
        let (sc, ch) = c.instance.build();
        let mut a = Allocation::with_association(sc.n_bs(), sc.n_messages(), &c.association);
        for n in 0..sc.n_bs() {
            for k in 0..sc.n_messages() {
                a.q[n][k] = c.q[n][k];
                a.rb[n][k] = c.rb[n][k];
                a.f[n][k] = f64::from(c.x[n][k]) / f64::from(c.rb[n][k].max(1));
            }
        }
        match system_utility(&a, &sc, &ch) {
            Ok(u) if close(u, c.utility, 1e-9) => {}
            Ok(u) => fails.push(format!("{}: {u} (want {})", c.name, c.utility)),
            Err(e) => fails.push(format!("{}: {e}", c.name)),
        }
    }
    out.push(CheckResult::new(
        "system_utility",
        fails,
        format!("{} cases", t.utility.len()),
    ));
    out
}
