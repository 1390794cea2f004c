use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_v2xcast");

/// Static vehicles and a single solve per replication keep these runs fast and
/// make the oracle's per-snapshot optimality visible in the averages.
const TINY: &str = r#"
seed = 5
replications = 4
slots = 100
n_bs = 2
n_vehicles = 4
speed_band_kmh = [0.0, 0.0]
rb_budget = 4
cqi_alphabet = [1, 5, 10, 15]
messages = [
    { data_rate_bps = 300000.0, reliability = 0.9, weight = 1.0 },
    { data_rate_bps = 800000.0, reliability = 0.8, weight = 1.5 },
]
"#;

fn v2xcast(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_summary_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = v2xcast(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let (header, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(
        header,
        [
            "sweep_value",
            "solver",
            "mean_utility",
            "ci95",
            "throughput_type_1",
            "throughput_type_2",
            "mean_runtime_ms"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "heuristic");
    for cell in &rows[0][2..] {
        let x: f64 = cell.parse().unwrap();
        assert!(x >= 0.0);
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["n_vehicles"], 4);
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("heuristic"));
}

#[test]
fn rb_budget_range_gives_six_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = v2xcast(&[
        "run",
        "--config",
        &cfg,
        "--rb-budget",
        "20..45..5",
        "--replications",
        "2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&out.join("summary.csv"));
    let xs: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(xs, ["20", "25", "30", "35", "40", "45"]);
}

#[test]
fn unknown_solver_exits_with_usage() {
    let o = v2xcast(&["run", "--solver", "simplex"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("Usage:"), "{err}");
    assert!(err.contains("simplex"));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{TINY}\ninterest_probability = 1.5\n"));
    let o = v2xcast(&[
        "run",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("interest_probability"),
        "{}",
        stderr(&o)
    );

    let cfg = write_config(dir.path(), "n_vehicle = 3\n");
    let o = v2xcast(&["run", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("n_vehicle"), "{}", stderr(&o));
}

#[test]
fn missing_mcs_table_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("mcs_table = \"/no/such/table.csv\"\n{TINY}"),
    );
    let o = v2xcast(&[
        "run",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/no/such/table.csv"), "{}", stderr(&o));
}

#[test]
fn compare_pairs_all_four_solvers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = v2xcast(&[
        "compare",
        "--config",
        &cfg,
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let (_, rows) = read_csv(&out.join("summary.csv"));
    let solvers: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(solvers, ["baseline", "heuristic", "hsca", "exhaustive"]);
    let utility: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(
        utility[..3].iter().all(|&u| u <= utility[3] + 1e-6),
        "{utility:?}"
    );

    let (header, paired) = read_csv(&out.join("paired.csv"));
    assert_eq!(
        header[..4],
        ["sweep_value", "replication", "solver_a", "solver_b"]
    );
    // six pairs per replication
    assert_eq!(paired.len(), 6 * 4);
    for r in &paired {
        let (a, b, d): (f64, f64, f64) = (
            r[4].parse().unwrap(),
            r[5].parse().unwrap(),
            r[6].parse().unwrap(),
        );
        assert_eq!(a - b, d);
    }
}

#[test]
fn compare_leaves_out_oracle_above_cap() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &TINY.replace("n_vehicles = 4", "n_vehicles = 40"),
    );
    let out = dir.path().join("out");
    let o = v2xcast(&[
        "compare",
        "--config",
        &cfg,
        "--replications",
        "2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("exhaustive left out"));
    let (_, rows) = read_csv(&out.join("summary.csv"));
    assert!(rows.iter().all(|r| r[1] != "exhaustive"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["notes"].as_array().unwrap().len(), 1);
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("[0.0, 0.0]", "[90.0, 110.0]"));
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let o = v2xcast(&[
        "compare",
        "--config",
        &cfg,
        "--seed",
        "77",
        "--solver",
        "baseline,heuristic,hsca",
        "--out-dir",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = first.join("manifest.json");
    let o = v2xcast(&[
        "compare",
        "--config",
        manifest.to_str().unwrap(),
        "--solver",
        "baseline,heuristic,hsca",
        "--out-dir",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    assert_eq!(
        fs::read(first.join("paired.csv")).unwrap(),
        fs::read(second.join("paired.csv")).unwrap()
    );
    // wall-clock runtime is the only column allowed to differ
    let (h1, r1) = read_csv(&first.join("summary.csv"));
    let (h2, r2) = read_csv(&second.join("summary.csv"));
    assert_eq!(h1, h2);
    let last = h1.len() - 1;
    assert_eq!(h1[last], "mean_runtime_ms");
    for (a, b) in r1.iter().zip(&r2) {
        assert_eq!(a[..last], b[..last]);
    }
}

#[test]
fn validate_passes_on_shipped_fixtures() {
    let o = v2xcast(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("pass  mcs_table"));
    assert!(!stdout.contains("FAIL"));
}

fn copy_fixtures(to: &Path) {
    let from = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    for f in ["mcs_table.csv", "catalog.json", "traces.json"] {
        fs::copy(from.join(f), to.join(f)).unwrap();
    }
}

#[test]
fn validate_names_a_corrupted_table() {
    let dir = TempDir::new().unwrap();
    copy_fixtures(dir.path());
    let table = dir.path().join("mcs_table.csv");
    let text = fs::read_to_string(&table)
        .unwrap()
        .replace("5.5547", "5.5548");
    fs::write(&table, text).unwrap();
    let o = v2xcast(&["validate", "--fixture-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  mcs_table"));
    assert!(stderr(&o).contains("mcs_table"));
}

#[test]
fn validate_tolerance_flag_reaches_the_check() {
    let o = v2xcast(&[
        "validate",
        "--mc-tolerance",
        "0.0001",
        "--mc-trials",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  ps_monte_carlo"));
}
