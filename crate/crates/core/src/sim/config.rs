//! Campaign configuration: TOML in, fully resolved values echoed out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, McsTable};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{full_alphabet, validate_alphabet, MessageCatalog, MessageType};
use crate::solvers::{SolverConfig, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deployment {
    /// BSs on a line at a constant spacing.
    #[default]
    FixedSpacing,
    /// A fixed number of BSs placed uniformly along the road.
    Binomial,
}

impl std::str::FromStr for Deployment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_spacing" | "fixed" => Ok(Deployment::FixedSpacing),
            "binomial" | "bpp" => Ok(Deployment::Binomial),
            _ => Err(Error::config(
                "deployment",
                format!("unknown deployment `{s}`"),
            )),
        }
    }
}

/// The configuration field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    #[default]
    RbBudget,
    NVehicles,
    CellRadiusM,
    /// Mean speed; each vehicle draws from `[v − 10, v + 10]` km/h.
    SpeedKmh,
    MessageLevel,
    NBs,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::RbBudget => "rb_budget",
            SweepParameter::NVehicles => "n_vehicles",
            SweepParameter::CellRadiusM => "cell_radius_m",
            SweepParameter::SpeedKmh => "speed_kmh",
            SweepParameter::MessageLevel => "message_level",
            SweepParameter::NBs => "n_bs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    /// Empty means the single value already in the config.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Root seed; replication `r` uses `seed + r`.
    pub seed: u64,
    pub replications: usize,
    pub slots: u32,
    pub slots_per_second: u32,
    /// Slots between solver invocations.
    pub resolve_period_slots: u32,
    /// Slots between position and channel updates.
    pub mobility_step_slots: u32,
    pub n_bs: usize,
    pub deployment: Deployment,
    pub cell_radius_m: f64,
    /// BS spacing for fixed deployments; defaults to twice the cell radius.
    pub spacing_m: Option<f64>,
    /// Distance between the road and the BS line.
    pub lateral_offset_m: f64,
    pub n_vehicles: usize,
    pub speed_band_kmh: [f64; 2],
    /// Chance that a vehicle wants a given message type.
    pub interest_probability: f64,
    pub rb_budget: u32,
    /// Data-rate level 1–5 of the shipped catalog; ignored when `messages` is set.
    pub message_level: Option<usize>,
    pub messages: Option<Vec<MessageType>>,
    pub cqi_alphabet: Vec<u8>,
    /// CSV replacing the built-in MCS table.
    pub mcs_table: Option<PathBuf>,
    pub channel: ChannelParams,
    pub solver: SolverConfig,
    pub solvers: Vec<SolverKind>,
    pub sweep: Sweep,
    /// Worker threads for replications; 0 lets the pool decide.
    pub jobs: usize,
    pub execution: Execution,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            replications: 20,
            slots: 1000,
            slots_per_second: 1000,
            resolve_period_slots: 100,
            mobility_step_slots: 10,
            n_bs: 5,
            deployment: Deployment::FixedSpacing,
            cell_radius_m: 500.0,
            spacing_m: None,
            lateral_offset_m: 10.0,
            n_vehicles: 250,
            speed_band_kmh: [90.0, 110.0],
            interest_probability: 1.0,
            rb_budget: 30,
            message_level: None,
            messages: None,
            cqi_alphabet: full_alphabet(),
            mcs_table: None,
            channel: ChannelParams::default(),
            solver: SolverConfig::default(),
            solvers: vec![SolverKind::Heuristic],
            sweep: Sweep::default(),
            jobs: 0,
            execution: Execution::Parallel,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("config {}: {e}", path.display()),
            ))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing_m.unwrap_or(2.0 * self.cell_radius_m)
    }

    pub fn load_table(&self) -> Result<McsTable> {
        match &self.mcs_table {
            Some(path) => McsTable::from_csv_path(path),
            None => Ok(McsTable::standard()),
        }
    }

    /// Message types after applying `messages` / `message_level`.
    pub fn resolved_messages(&self) -> Result<Vec<MessageType>> {
        if let Some(m) = &self.messages {
            return Ok(m.clone());
        }
        let catalog = MessageCatalog::standard();
        match self.message_level {
            Some(level) => catalog.level(level),
            None => Ok(catalog.default),
        }
    }

    /// Sweep values, or the configured value of the swept field.
    pub fn sweep_values(&self) -> Vec<f64> {
        if !self.sweep.values.is_empty() {
            return self.sweep.values.clone();
        }
        let current = match self.sweep.parameter {
            SweepParameter::RbBudget => f64::from(self.rb_budget),
            SweepParameter::NVehicles => self.n_vehicles as f64,
            SweepParameter::CellRadiusM => self.cell_radius_m,
            SweepParameter::SpeedKmh => 0.5 * (self.speed_band_kmh[0] + self.speed_band_kmh[1]),
            SweepParameter::MessageLevel => self.message_level.unwrap_or(0) as f64,
            SweepParameter::NBs => self.n_bs as f64,
        };
        vec![current]
    }

    /// Copy with the swept field set to `value`.
    pub fn at_sweep_value(&self, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let as_count = |field: &str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::config(
                    field,
                    format!("sweep value {value} is not a whole number"),
                ))
            }
        };
        match self.sweep.parameter {
            SweepParameter::RbBudget => {
                c.rb_budget = u32::try_from(as_count("rb_budget")?)
                    .map_err(|_| Error::config("rb_budget", "too large"))?
            }
            SweepParameter::NVehicles => c.n_vehicles = as_count("n_vehicles")?,
            SweepParameter::CellRadiusM => c.cell_radius_m = value,
            SweepParameter::SpeedKmh => c.speed_band_kmh = [value - 10.0, value + 10.0],
            SweepParameter::MessageLevel => {
                c.message_level = Some(as_count("message_level")?);
                c.messages = None;
            }
            SweepParameter::NBs => c.n_bs = as_count("n_bs")?,
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        if self.slots == 0 {
            return Err(Error::config("slots", "must be at least 1"));
        }
        if self.slots_per_second == 0 {
            return Err(Error::config("slots_per_second", "must be at least 1"));
        }
        if self.resolve_period_slots == 0 {
            return Err(Error::config("resolve_period_slots", "must be at least 1"));
        }
        if self.mobility_step_slots == 0 {
            return Err(Error::config("mobility_step_slots", "must be at least 1"));
        }
        if self.n_bs == 0 {
            return Err(Error::config("n_bs", "must be at least 1"));
        }
        if self.n_vehicles == 0 {
            return Err(Error::config("n_vehicles", "must be at least 1"));
        }
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return Err(Error::config("cell_radius_m", "must be positive"));
        }
        if let Some(s) = self.spacing_m {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config("spacing_m", "must be positive"));
            }
        }
        if !(self.lateral_offset_m > 0.0 && self.lateral_offset_m.is_finite()) {
            return Err(Error::config("lateral_offset_m", "must be positive"));
        }
        let [lo, hi] = self.speed_band_kmh;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::config("speed_band_kmh", "need 0 ≤ low ≤ high"));
        }
        if !(0.0..=1.0).contains(&self.interest_probability) {
            return Err(Error::config("interest_probability", "must lie in [0, 1]"));
        }
        if self.solvers.is_empty() {
            return Err(Error::config("solvers", "select at least one solver"));
        }
        let messages = self.resolved_messages()?;
        if messages.is_empty() {
            return Err(Error::config("messages", "need at least one message type"));
        }
        for (i, m) in messages.iter().enumerate() {
            m.validate(i)?;
        }
        validate_alphabet(&self.cqi_alphabet)?;
        self.load_table()?;
        self.channel.validate()?;
        self.solver.validate()
    }
}

/// Parse `a..b..step` (inclusive) or a single number.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::config(
            "range",
            format!("`{text}` is not `start..end..step` or a number"),
        )
    };
    let parts: Vec<&str> = text.split("..").collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b] | [a, b, _] => {
            let (start, end) = (num(a)?, num(b)?);
            let step = if parts.len() == 3 {
                num(parts[2])?
            } else {
                1.0
            };
            if !(step > 0.0) || end < start {
                return Err(bad());
            }
            let count = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(bad()),
    }
}
