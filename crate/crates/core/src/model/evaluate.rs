//! Reception probabilities and system utility of a concrete allocation.

use std::cell::Cell;

use super::allocation::Allocation;
use super::reliability::{ps_with_blocks, required_blocks, utility};
use super::Scenario;
use crate::channel::{rb_success_prob, ChannelRealization, MAX_CQI, TABLE_ROWS};
use crate::error::{Error, Result};

/// Lazily filled `p(n, v, q)`: per-RB success probability at the CQI-`q` threshold.
///
/// Monte Carlo fading makes each entry expensive, so nothing is computed twice.
pub struct SuccessCache<'a> {
    scenario: &'a Scenario,
    channel: &'a ChannelRealization,
    n_veh: usize,
    values: Vec<Cell<f64>>,
}

impl<'a> SuccessCache<'a> {
    pub fn new(scenario: &'a Scenario, channel: &'a ChannelRealization) -> Result<Self> {
        let (n_bs, n_veh) = (scenario.n_bs(), scenario.n_vehicles());
        if channel.n_bs() != n_bs || (n_bs > 0 && channel.n_vehicles() != n_veh) {
            return Err(Error::Dimension(format!(
                "channel is {}x{}, scenario is {n_bs}x{n_veh}",
                channel.n_bs(),
                channel.n_vehicles()
            )));
        }
        for row in &channel.k_factor {
            if row.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
                return Err(Error::domain("Rice factor must be non-negative and finite"));
            }
        }
        if channel.sinr_db.iter().flatten().any(|s| s.is_nan()) {
            return Err(Error::domain("SINR matrix contains NaN"));
        }
        Ok(Self {
            scenario,
            channel,
            n_veh,
            values: (0..n_bs * n_veh * TABLE_ROWS)
                .map(|_| Cell::new(f64::NAN))
                .collect(),
        })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn channel(&self) -> &'a ChannelRealization {
        self.channel
    }

    pub fn p(&self, n: usize, v: usize, q: u8) -> f64 {
        debug_assert!(q <= MAX_CQI);
        let cell = &self.values[(n * self.n_veh + v) * TABLE_ROWS + q as usize];
        let cached = cell.get();
        if !cached.is_nan() {
            return cached;
        }
        let thr = self.scenario.table.threshold_db(q);
        let p = rb_success_prob(thr, self.channel.link(n, v), &self.scenario.params.fading)
            .expect("link statistics validated in SuccessCache::new");
        cell.set(p);
        p
    }

    /// PS of vehicle `v` for a type sent by BS `n` at CQI `q` over `rb` RBs needing `x` of them.
    pub fn ps(&self, n: usize, v: usize, q: u8, rb: u32, x: u32) -> f64 {
        if rb == 0 {
            return 0.0;
        }
        ps_with_blocks(rb, x, self.p(n, v, q))
    }

    /// Whether `v` meets the reliability of type `k` under that transmission.
    pub fn satisfied(&self, n: usize, v: usize, k: usize, q: u8, rb: u32, x: u32) -> bool {
        rb > 0 && self.ps(n, v, q, rb, x) >= self.scenario.messages[k].reliability
    }
}

/// Utility and per-type counts of vehicles meeting their reliability target.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub utility: f64,
    pub satisfied: Vec<u32>,
}

/// Literal triple sum over `(n, v, k)` with `w · y` gating.
pub fn evaluate_with(alloc: &Allocation, cache: &SuccessCache<'_>) -> Evaluation {
    let sc = cache.scenario();
    let mut satisfied = vec![0u32; sc.n_messages()];
    let mut total = 0.0;
    for n in 0..sc.n_bs() {
        for v in 0..sc.n_vehicles() {
            if alloc.y[n][v] != 1 {
                continue;
            }
            for (k, msg) in sc.messages.iter().enumerate() {
                let rb = alloc.rb[n][k];
                if !sc.interested(v, k) || rb == 0 {
                    continue;
                }
                let x = required_blocks(rb, alloc.f[n][k]);
                let ps = cache.ps(n, v, alloc.q[n][k], rb, x);
                if ps >= msg.reliability {
                    satisfied[k] += 1;
                }
                total += utility(ps, msg);
            }
        }
    }
    Evaluation {
        utility: total,
        satisfied,
    }
}

pub fn evaluate(
    alloc: &Allocation,
    scenario: &Scenario,
    channel: &ChannelRealization,
) -> Result<Evaluation> {
    let cache = SuccessCache::new(scenario, channel)?;
    Ok(evaluate_with(alloc, &cache))
}

/// System utility of `alloc` on `channel`.
pub fn system_utility(
    alloc: &Allocation,
    scenario: &Scenario,
    channel: &ChannelRealization,
) -> Result<f64> {
    Ok(evaluate(alloc, scenario, channel)?.utility)
}
