//! Decision matrices and their feasibility check.

use serde::{Deserialize, Serialize};

use super::reliability::rb_data_rate;
use super::Scenario;
use crate::channel::MAX_CQI;
use crate::error::Result;

/// Slack allowed on the rate constraint, in bits/s.
pub const RATE_TOLERANCE_BPS: f64 = 1e-6;

/// A full decision: CQI, code rate and RB count per `[bs][type]`, association per `[bs][vehicle]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub q: Vec<Vec<u8>>,
    pub f: Vec<Vec<f64>>,
    pub rb: Vec<Vec<u32>>,
    /// 0/1 entries.
    pub y: Vec<Vec<u8>>,
}

impl Allocation {
    /// No RBs granted, CQI 1, F = 1, nobody associated.
    pub fn empty(n_bs: usize, n_messages: usize, n_vehicles: usize) -> Self {
        Self {
            q: vec![vec![1; n_messages]; n_bs],
            f: vec![vec![1.0; n_messages]; n_bs],
            rb: vec![vec![0; n_messages]; n_bs],
            y: vec![vec![0; n_vehicles]; n_bs],
        }
    }

    /// Empty allocation with `association[v]` as the serving BS of vehicle `v`.
    pub fn with_association(n_bs: usize, n_messages: usize, association: &[usize]) -> Self {
        let mut a = Self::empty(n_bs, n_messages, association.len());
        a.set_association(association);
        a
    }

    pub fn set_association(&mut self, association: &[usize]) {
        for row in &mut self.y {
            row.iter_mut().for_each(|e| *e = 0);
        }
        for (v, &n) in association.iter().enumerate() {
            self.y[n][v] = 1;
        }
    }

    /// Serving BS per vehicle; the lowest-index one if the column has several.
    pub fn association(&self) -> Vec<Option<usize>> {
        let n_veh = self.y.first().map_or(0, Vec::len);
        (0..n_veh)
            .map(|v| (0..self.y.len()).find(|&n| self.y[n][v] == 1))
            .collect()
    }

    pub fn total_rb(&self, bs: usize) -> u32 {
        self.rb[bs].iter().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `Σ_k RB[n][k] ≤ M_n`.
    RbBudget,
    /// `RB · RD · F ≥ D_k` for granted types.
    RateDemand,
    /// Every vehicle served by exactly one BS.
    Association,
    /// Entry outside its allowed range or matrix of the wrong shape.
    Domain,
}

/// One broken constraint. `slack` is negative by the amount of the violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub indices: Vec<usize>,
    pub slack: f64,
}

/// Every constraint `alloc` breaks; empty iff feasible.
pub fn check_feasibility(alloc: &Allocation, scenario: &Scenario) -> Vec<Violation> {
    let n_bs = scenario.n_bs();
    let n_k = scenario.n_messages();
    let n_v = scenario.n_vehicles();
    let mut out = Vec::new();

    let shape_ok = alloc.q.len() == n_bs
        && alloc.f.len() == n_bs
        && alloc.rb.len() == n_bs
        && alloc.y.len() == n_bs
        && alloc.q.iter().all(|r| r.len() == n_k)
        && alloc.f.iter().all(|r| r.len() == n_k)
        && alloc.rb.iter().all(|r| r.len() == n_k)
        && alloc.y.iter().all(|r| r.len() == n_v);
    if !shape_ok {
        out.push(Violation {
            constraint: Constraint::Domain,
            indices: vec![],
            slack: f64::NEG_INFINITY,
        });
        return out;
    }

    for n in 0..n_bs {
        let used = f64::from(alloc.total_rb(n));
        let budget = f64::from(scenario.base_stations[n].rb_budget);
        if used > budget {
            out.push(Violation {
                constraint: Constraint::RbBudget,
                indices: vec![n],
                slack: budget - used,
            });
        }
        for k in 0..n_k {
            let (q, f, rb) = (alloc.q[n][k], alloc.f[n][k], alloc.rb[n][k]);
            if q == 0 || q > MAX_CQI || !(f > 0.0 && f <= 1.0) {
                out.push(Violation {
                    constraint: Constraint::Domain,
                    indices: vec![n, k],
                    slack: f64::NEG_INFINITY,
                });
                continue;
            }
            if rb == 0 {
                continue;
            }
            let rd = rb_data_rate(q, &scenario.table, scenario.slots_per_second)
                .expect("CQI range checked above");
            let slack = f64::from(rb) * rd * f - scenario.messages[k].data_rate_bps;
            if slack < -RATE_TOLERANCE_BPS {
                out.push(Violation {
                    constraint: Constraint::RateDemand,
                    indices: vec![n, k],
                    slack,
                });
            }
        }
    }

    for v in 0..n_v {
        let mut col = 0i64;
        for n in 0..n_bs {
            match alloc.y[n][v] {
                0 => {}
                1 => col += 1,
                _ => out.push(Violation {
                    constraint: Constraint::Domain,
                    indices: vec![n, v],
                    slack: f64::NEG_INFINITY,
                }),
            }
        }
        if col != 1 {
            out.push(Violation {
                constraint: Constraint::Association,
                indices: vec![v],
                slack: -((col - 1).abs() as f64),
            });
        }
    }
    out
}
