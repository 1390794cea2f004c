use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, McsTable, MAX_CQI};
use crate::error::{Error, Result};

/// Shipped message catalog: the five-type default and five data-rate levels.
pub const CATALOG_JSON: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A multicast message type: required rate, reliability target, and utility weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageType {
    pub data_rate_bps: f64,
    pub reliability: f64,
    pub weight: f64,
}

impl MessageType {
    pub fn new(data_rate_bps: f64, reliability: f64, weight: f64) -> Self {
        Self {
            data_rate_bps,
            reliability,
            weight,
        }
    }

    /// Utility credited for one vehicle that meets the reliability target.
    pub fn value(&self) -> f64 {
        self.weight * self.data_rate_bps
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("messages[{index}].{name}");
        if !(self.data_rate_bps > 0.0 && self.data_rate_bps.is_finite()) {
            return Err(Error::config(
                field("data_rate_bps"),
                "must be positive and finite",
            ));
        }
        if !(self.reliability > 0.0 && self.reliability < 1.0) {
            return Err(Error::config(field("reliability"), "must lie in (0, 1)"));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::config(field("weight"), "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageCatalog {
    pub default: Vec<MessageType>,
    /// Data rates per level, one entry per message type of `default`.
    pub levels: Vec<Vec<f64>>,
}

impl MessageCatalog {
    pub fn standard() -> Self {
        serde_json::from_str(CATALOG_JSON).expect("shipped catalog parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let catalog: Self = serde_json::from_str(text)?;
        for (i, m) in catalog.default.iter().enumerate() {
            m.validate(i)?;
        }
        for (l, rates) in catalog.levels.iter().enumerate() {
            if rates.len() != catalog.default.len() {
                return Err(Error::config(
                    format!("levels[{l}]"),
                    "needs one data rate per message type",
                ));
            }
        }
        Ok(catalog)
    }

    /// The default catalog with data rates replaced by `level` (1-based).
    pub fn level(&self, level: usize) -> Result<Vec<MessageType>> {
        let rates = level
            .checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or_else(|| Error::config("level", format!("no data-rate level {level}")))?;
        Ok(self
            .default
            .iter()
            .zip(rates)
            .map(|(m, &rate)| MessageType {
                data_rate_bps: rate,
                ..*m
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub position: Position,
    /// Resource blocks reserved for multicast per slot.
    pub rb_budget: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub position: Position,
    pub speed_kmh: f64,
    /// `interest[k]` is set when the vehicle wants message type `k`.
    pub interest: Vec<bool>,
}

/// A straight road segment along the x axis; positions wrap within it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Road {
    pub x_start: f64,
    pub length_m: f64,
    pub lateral_offset_m: f64,
}

impl Road {
    pub fn wrap(&self, x: f64) -> f64 {
        self.x_start + (x - self.x_start).rem_euclid(self.length_m)
    }
}

/// Everything a solver needs besides the channel realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub base_stations: Vec<BaseStation>,
    pub vehicles: Vec<Vehicle>,
    pub messages: Vec<MessageType>,
    pub table: McsTable,
    pub params: ChannelParams,
    pub slots_per_second: u32,
    /// CQI values the solvers may select, ascending.
    pub cqi_alphabet: Vec<u8>,
    pub road: Road,
}

impl Scenario {
    pub fn n_bs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn n_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn n_messages(&self) -> usize {
        self.messages.len()
    }

    pub fn interested(&self, v: usize, k: usize) -> bool {
        self.vehicles[v].interest[k]
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_stations.is_empty() {
            return Err(Error::config("base_stations", "at least one is required"));
        }
        for (i, m) in self.messages.iter().enumerate() {
            m.validate(i)?;
        }
        for (v, veh) in self.vehicles.iter().enumerate() {
            if veh.interest.len() != self.messages.len() {
                return Err(Error::Dimension(format!(
                    "vehicle {v} has {} interest flags for {} message types",
                    veh.interest.len(),
                    self.messages.len()
                )));
            }
        }
        if self.slots_per_second == 0 {
            return Err(Error::config("slots_per_second", "must be positive"));
        }
        validate_alphabet(&self.cqi_alphabet)?;
        self.params.validate()
    }
}

pub(crate) fn validate_alphabet(alphabet: &[u8]) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::config("cqi_alphabet", "must not be empty"));
    }
    if alphabet.iter().any(|&q| q == 0 || q > MAX_CQI) {
        return Err(Error::config("cqi_alphabet", "entries must lie in 1..=15"));
    }
    if alphabet.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("cqi_alphabet", "must be strictly ascending"));
    }
    Ok(())
}

/// Every CQI from 1 to 15.
pub fn full_alphabet() -> Vec<u8> {
    (1..=MAX_CQI).collect()
}
