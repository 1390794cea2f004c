//! Tanh-smoothed objective, difference-quotient gradients and linear-surrogate steps.

use serde::{Deserialize, Serialize};

use super::common::{spend_residual, BsView, Choice, Problem};
use crate::association::associate;
use crate::channel::MAX_CQI;
use crate::error::{Error, Result};
use crate::model::{rb_count, Scenario, SuccessCache, RESOURCE_ELEMENTS_PER_RB};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HscaConfig {
    /// Steepness of the tanh approximation.
    pub c_constant: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Step size at iteration `t` is `step0 / t`.
    pub step0: f64,
    /// Fix an over-budget rounded point instead of falling back to the heuristic.
    pub repair_rounding: bool,
}

impl Default for HscaConfig {
    fn default() -> Self {
        Self {
            c_constant: 50.0,
            epsilon: 1e-3,
            max_iters: 200,
            step0: 0.5,
            repair_rounding: true,
        }
    }
}

impl HscaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_constant > 0.0 && self.c_constant.is_finite()) {
            return Err(Error::config("hsca.c_constant", "must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("hsca.epsilon", "must be positive"));
        }
        if !(self.step0 > 0.0 && self.step0 <= 1.0) {
            return Err(Error::config("hsca.step0", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Relaxed decision vector: CQIs per `[bs][type]`, then association weights per `[bs][vehicle]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedVector {
    pub n_bs: usize,
    pub n_messages: usize,
    pub n_vehicles: usize,
    pub q_part: Vec<f64>,
    pub y_part: Vec<f64>,
}

impl AugmentedVector {
    pub fn new(n_bs: usize, n_messages: usize, n_vehicles: usize, q: f64, assoc: &[usize]) -> Self {
        let mut y_part = vec![0.0; n_bs * n_vehicles];
        for (v, &n) in assoc.iter().enumerate() {
            y_part[n * n_vehicles + v] = 1.0;
        }
        Self {
            n_bs,
            n_messages,
            n_vehicles,
            q_part: vec![q; n_bs * n_messages],
            y_part,
        }
    }

    pub fn len(&self) -> usize {
        self.q_part.len() + self.y_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn q(&self, n: usize, k: usize) -> f64 {
        self.q_part[n * self.n_messages + k]
    }

    pub fn y(&self, n: usize, v: usize) -> f64 {
        self.y_part[n * self.n_vehicles + v]
    }

    pub fn get(&self, j: usize) -> f64 {
        if j < self.q_part.len() {
            self.q_part[j]
        } else {
            self.y_part[j - self.q_part.len()]
        }
    }

    pub fn distance_sq(&self, other: &Self) -> f64 {
        self.q_part
            .iter()
            .chain(&self.y_part)
            .zip(other.q_part.iter().chain(&other.y_part))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self + gamma · (target − self)`.
    pub fn step_towards(&self, target: &Self, gamma: f64) -> Self {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, t)| x + gamma * (t - x)).collect()
        };
        Self {
            q_part: mix(&self.q_part, &target.q_part),
            y_part: mix(&self.y_part, &target.y_part),
            ..*self
        }
    }
}

/// One smoothed utility term: `value · (tanh(C · (ps − target)) + 1) / 2`.
pub fn smoothed_term(value: f64, c_constant: f64, ps: f64, target: f64) -> f64 {
    value * 0.5 * ((c_constant * (ps - target)).tanh() + 1.0)
}

/// The negated, tanh-smoothed system utility over relaxed CQIs and association.
pub struct SmoothedObjective<'a> {
    pub c_constant: f64,
    pub slots_per_second: u32,
    scenario: &'a Scenario,
    cache: &'a SuccessCache<'a>,
}

impl<'a> SmoothedObjective<'a> {
    pub fn new(cache: &'a SuccessCache<'a>, c_constant: f64) -> Self {
        let scenario = cache.scenario();
        Self {
            c_constant,
            slots_per_second: scenario.slots_per_second,
            scenario,
            cache,
        }
    }

    /// RBs type `k` needs at (possibly fractional) CQI `q` without FEC.
    pub fn rb_at(&self, k: usize, q: f64) -> u32 {
        let eff = self.scenario.table.interpolated_efficiency(q);
        let rd = RESOURCE_ELEMENTS_PER_RB * eff * f64::from(self.slots_per_second);
        rb_count(self.scenario.messages[k].data_rate_bps, rd, 1.0)
    }

    /// Per-RB success probability, linear between neighbouring integer CQIs.
    pub fn p_at(&self, n: usize, v: usize, q: f64) -> f64 {
        let q = q.clamp(1.0, f64::from(MAX_CQI));
        let lo = q.floor();
        let frac = q - lo;
        let p_lo = self.cache.p(n, v, lo as u8);
        if frac == 0.0 {
            return p_lo;
        }
        let p_hi = self.cache.p(n, v, lo as u8 + 1);
        p_lo + frac * (p_hi - p_lo)
    }

    pub fn term(&self, n: usize, v: usize, k: usize, q: f64, y: f64) -> f64 {
        let msg = &self.scenario.messages[k];
        let w = if self.scenario.interested(v, k) {
            1.0
        } else {
            0.0
        };
        let rb = self.rb_at(k, q);
        let ps = w * y * self.p_at(n, v, q).powi(rb as i32);
        smoothed_term(msg.value(), self.c_constant, ps, msg.reliability)
    }

    /// Sum of terms affected by `Q[n][k]` at value `q`.
    fn q_slice(&self, x: &AugmentedVector, n: usize, k: usize, q: f64) -> f64 {
        (0..x.n_vehicles)
            .map(|v| self.term(n, v, k, q, x.y(n, v)))
            .sum()
    }

    /// Sum of terms affected by `y[n][v]` at value `y`.
    fn y_slice(&self, x: &AugmentedVector, n: usize, v: usize, y: f64) -> f64 {
        (0..x.n_messages)
            .map(|k| self.term(n, v, k, x.q(n, k), y))
            .sum()
    }

    /// Whether every BS fits its budget with the RB counts implied by `x`.
    pub fn within_budget(&self, x: &AugmentedVector) -> bool {
        (0..x.n_bs).all(|n| {
            let need: u64 = (0..x.n_messages)
                .map(|k| u64::from(self.rb_at(k, x.q(n, k))))
                .sum();
            need <= u64::from(self.scenario.base_stations[n].rb_budget)
        })
    }
}

/// `U_tot(x)`: minus the sum of smoothed terms.
pub fn smoothed_utility(x: &AugmentedVector, obj: &SmoothedObjective<'_>) -> f64 {
    let mut total = 0.0;
    for n in 0..x.n_bs {
        for v in 0..x.n_vehicles {
            for k in 0..x.n_messages {
                total += obj.term(n, v, k, x.q(n, k), x.y(n, v));
            }
        }
    }
    -total
}

/// Per coordinate `j`: `(U(x_prev) − U(x_prev with j taken from x_t)) / (x_prev_j − x_t_j)`,
/// or 0 where the coordinate did not move.
pub fn finite_diff_gradient(
    x_t: &AugmentedVector,
    x_prev: &AugmentedVector,
    obj: &SmoothedObjective<'_>,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x_prev.len());
    for n in 0..x_prev.n_bs {
        for k in 0..x_prev.n_messages {
            let (old, new) = (x_prev.q(n, k), x_t.q(n, k));
            if old == new {
                grad.push(0.0);
                continue;
            }
            // U = −Σ terms, so U(old) − U(new) = Σ new − Σ old
            let diff = obj.q_slice(x_prev, n, k, new) - obj.q_slice(x_prev, n, k, old);
            grad.push(diff / (old - new));
        }
    }
    for n in 0..x_prev.n_bs {
        for v in 0..x_prev.n_vehicles {
            let (old, new) = (x_prev.y(n, v), x_t.y(n, v));
            if old == new {
                grad.push(0.0);
                continue;
            }
            let diff = obj.y_slice(x_prev, n, v, new) - obj.y_slice(x_prev, n, v, old);
            grad.push(diff / (old - new));
        }
    }
    grad
}

/// Minimiser of `⟨grad, x⟩` over the CQI box and per-vehicle association simplices.
///
/// Zero entries leave CQIs where they are; an all-zero vehicle block keeps the
/// current association. Ties favour the current dominant BS, then the lowest index.
pub fn surrogate_argmin(
    grad: &[f64],
    current: &AugmentedVector,
    q_bounds: (f64, f64),
) -> AugmentedVector {
    let mut out = current.clone();
    let nq = current.q_part.len();
    for (j, q) in out.q_part.iter_mut().enumerate() {
        if grad[j] > 0.0 {
            *q = q_bounds.0;
        } else if grad[j] < 0.0 {
            *q = q_bounds.1;
        }
    }
    let (n_bs, n_veh) = (current.n_bs, current.n_vehicles);
    for v in 0..n_veh {
        let g = |n: usize| grad[nq + n * n_veh + v];
        if (0..n_bs).all(|n| g(n) == 0.0) {
            continue;
        }
        let mut dominant = 0;
        for n in 1..n_bs {
            if current.y(n, v) > current.y(dominant, v) {
                dominant = n;
            }
        }
        let mut best = dominant;
        for n in 0..n_bs {
            if g(n) < g(best) {
                best = n;
            }
        }
        for n in 0..n_bs {
            out.y_part[n * n_veh + v] = if n == best { 1.0 } else { 0.0 };
        }
    }
    out
}

pub(crate) struct HscaRun {
    pub assoc: Vec<usize>,
    pub choices: Vec<Vec<Choice>>,
    pub association_moves: usize,
    pub iterations: usize,
    pub trace: Vec<f64>,
    /// Rounded point was over budget and repair was disabled.
    pub infeasible: bool,
}

fn nearest_in(alphabet: &[u8], q: f64) -> u8 {
    let mut best = alphabet[0];
    for &a in alphabet {
        // ties go to the higher CQI
        if (f64::from(a) - q).abs() <= (f64::from(best) - q).abs() {
            best = a;
        }
    }
    best
}

pub(crate) fn run(p: &Problem<'_>, cfg: &HscaConfig) -> HscaRun {
    let sc = p.sc;
    let (n_bs, n_k, n_v) = (sc.n_bs(), sc.n_messages(), sc.n_vehicles());
    let refined = associate(p.cache.channel(), &sc.table);
    let alphabet = p.alphabet();
    let bounds = (
        f64::from(alphabet[0]),
        f64::from(alphabet[alphabet.len() - 1]),
    );
    let obj = SmoothedObjective::new(&p.cache, cfg.c_constant);

    let mut x_prev = AugmentedVector::new(n_bs, n_k, n_v, 10.0, &refined.association);
    let mut x_t = AugmentedVector::new(n_bs, n_k, n_v, 9.0, &refined.association);
    let mut trace = vec![
        smoothed_utility(&x_prev, &obj),
        smoothed_utility(&x_t, &obj),
    ];
    let mut iterations = 0;
    for t in 1..=cfg.max_iters {
        iterations = t;
        let grad = finite_diff_gradient(&x_t, &x_prev, &obj);
        let target = surrogate_argmin(&grad, &x_t, bounds);
        let next = x_t.step_towards(&target, cfg.step0 / t as f64);
        // on either stopping rule the current iterate is the one rounded
        if next.distance_sq(&x_t) <= cfg.epsilon || !obj.within_budget(&next) {
            break;
        }
        x_prev = std::mem::replace(&mut x_t, next);
        trace.push(smoothed_utility(&x_t, &obj));
    }

    // round y to the dominant BS, Q to the nearest allowed CQI
    let assoc: Vec<usize> = (0..n_v)
        .map(|v| {
            let mut best = 0;
            for n in 1..n_bs {
                if x_t.y(n, v) > x_t.y(best, v) {
                    best = n;
                }
            }
            best
        })
        .collect();
    let mut infeasible = false;
    let mut choices = Vec::with_capacity(n_bs);
    for n in 0..n_bs {
        let view = p.view(&assoc, n);
        let mut row: Vec<Choice> = (0..n_k)
            .map(|k| {
                let q = nearest_in(alphabet, x_t.q(n, k));
                if !view.has_members(k) {
                    Choice::off(q)
                } else {
                    let x = p.x_min(k, q);
                    Choice { q, rb: x, x }
                }
            })
            .collect();
        if row.iter().map(|c| c.rb).sum::<u32>() > p.budget(n) {
            if cfg.repair_rounding {
                repair(&view, &mut row);
            } else {
                infeasible = true;
            }
        }
        spend_residual(&view, &mut row);
        choices.push(row);
    }
    HscaRun {
        assoc,
        choices,
        association_moves: refined.moves,
        iterations,
        trace,
        infeasible,
    }
}

/// Bring BS `n` within budget by raising CQIs or switching types off, losing as
/// little utility as possible at each step.
fn repair(view: &BsView<'_, '_>, row: &mut [Choice]) {
    let p = view.p;
    while row.iter().map(|c| c.rb).sum::<u32>() > view.budget() {
        // (loss, is_drop, k, choice)
        let mut pick: Option<(f64, bool, usize, Choice)> = None;
        for (k, cur) in row.iter().enumerate() {
            if cur.rb == 0 {
                continue;
            }
            let now = view.utility(k, *cur);
            let upgrade = p
                .alphabet()
                .iter()
                .filter(|&&q| q > cur.q)
                .map(|&q| (q, p.x_min(k, q)))
                .find(|&(_, x)| x < cur.rb)
                .map(|(q, x)| Choice { q, rb: x, x });
            let cands = upgrade
                .map(|c| (c, false))
                .into_iter()
                .chain(std::iter::once((Choice::off(cur.q), true)));
            for (c, drop) in cands {
                let loss = now - view.utility(k, c);
                let better = match pick {
                    None => true,
                    Some((l, d, _, _)) => loss < l || (loss == l && !drop && d),
                };
                if better {
                    pick = Some((loss, drop, k, c));
                }
            }
        }
        let (_, _, k, c) = pick.expect("over budget implies some RB is granted");
        row[k] = c;
    }
}
