//! Brute-force oracle over association, CQI, RB count and code rate.

use serde::{Deserialize, Serialize};

use super::common::{Choice, Problem};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::model::{rb_count, rb_data_rate, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExhaustiveConfig {
    /// Refuse instances whose search space is larger than this.
    pub state_cap: u64,
    pub execution: Execution,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        Self {
            state_cap: 50_000_000,
            execution: Execution::Parallel,
        }
    }
}

pub(crate) struct ExhaustiveRun {
    pub assoc: Vec<usize>,
    pub choices: Vec<Vec<Choice>>,
    pub states: u128,
}

/// Candidate transmissions of one type at one BS with the vehicles each satisfies.
struct Options {
    choices: Vec<Choice>,
    /// Bit `i` set when the `i`-th enumerated vehicle would be served if attached.
    masks: Vec<u128>,
    value: f64,
}

struct Space {
    budgets: Vec<u32>,
    /// Vehicles whose association is enumerated: those wanting at least one type.
    free: Vec<usize>,
    fixed: Vec<usize>,
    options: Vec<Vec<Options>>,
}

/// Search-space size: associations times per-BS option combinations.
fn state_count(n_bs: usize, n_free: usize, options: &[Vec<Options>]) -> u128 {
    let assoc = (n_bs as u128).saturating_pow(n_free as u32);
    let per_bs = options
        .iter()
        .map(|row| {
            row.iter()
                .fold(1u128, |acc, o| acc.saturating_mul(o.choices.len() as u128))
        })
        .fold(0u128, u128::saturating_add);
    assoc.saturating_mul(per_bs)
}

/// Size of the exhaustive search space for `sc`. It depends on interest and
/// budgets only, so the search can be refused before any channel is drawn.
pub fn exhaustive_states(sc: &Scenario) -> Result<u128> {
    sc.validate()?;
    let n_free = (0..sc.n_vehicles())
        .filter(|&v| sc.vehicles[v].interest.iter().any(|&w| w))
        .count();
    let mut per_bs = 0u128;
    for bs in &sc.base_stations {
        let mut combos = 1u128;
        for m in &sc.messages {
            let mut n_opts = 1u128;
            for &q in &sc.cqi_alphabet {
                let x = rb_count(
                    m.data_rate_bps,
                    rb_data_rate(q, &sc.table, sc.slots_per_second)?,
                    1.0,
                );
                n_opts += u128::from((bs.rb_budget + 1).saturating_sub(x.max(1)));
            }
            combos = combos.saturating_mul(n_opts);
        }
        per_bs = per_bs.saturating_add(combos);
    }
    Ok((sc.n_bs() as u128)
        .saturating_pow(n_free as u32)
        .saturating_mul(per_bs))
}

pub(crate) fn run(p: &Problem<'_>, cfg: &ExhaustiveConfig) -> Result<ExhaustiveRun> {
    let sc = p.sc;
    let n_bs = sc.n_bs();
    let free: Vec<usize> = (0..sc.n_vehicles())
        .filter(|&v| sc.vehicles[v].interest.iter().any(|&w| w))
        .collect();
    if free.len() > 128 {
        return Err(Error::StateCapExceeded {
            states: u128::MAX,
            cap: u128::from(cfg.state_cap),
        });
    }
    let fixed: Vec<usize> = (0..sc.n_vehicles())
        .map(|v| p.cache.channel().best_bs(v))
        .collect();
    let low = p.alphabet()[0];

    let mut options = Vec::with_capacity(n_bs);
    for n in 0..n_bs {
        let mut row = Vec::with_capacity(sc.n_messages());
        for k in 0..sc.n_messages() {
            let mut o = Options {
                choices: vec![Choice::off(low)],
                masks: vec![0],
                value: p.value(k),
            };
            for &q in p.alphabet() {
                for rb in p.x_min(k, q)..=p.budget(n) {
                    let Some(c) = p.option(k, q, rb) else {
                        continue;
                    };
                    let mut mask = 0u128;
                    for (i, &v) in free.iter().enumerate() {
                        if sc.interested(v, k) && p.satisfied(n, k, v, c) {
                            mask |= 1 << i;
                        }
                    }
                    o.choices.push(c);
                    o.masks.push(mask);
                }
            }
            row.push(o);
        }
        options.push(row);
    }

    let states = state_count(n_bs, free.len(), &options);
    if states > u128::from(cfg.state_cap) {
        return Err(Error::StateCapExceeded {
            states,
            cap: u128::from(cfg.state_cap),
        });
    }
    let space = Space {
        budgets: (0..n_bs).map(|n| p.budget(n)).collect(),
        free,
        fixed,
        options,
    };
    let total = (n_bs as u128).pow(space.free.len() as u32) as usize;
    let chunk = total.div_ceil(256).max(1);
    let n_chunks = total.div_ceil(chunk);
    let partial = map_indices(cfg.execution, n_chunks, |c| {
        let mut scratch = Scratch::default();
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for idx in c * chunk..((c + 1) * chunk).min(total) {
            let u = space.evaluate(idx, &mut scratch, None);
            if u > best.0 {
                best = (u, idx);
            }
        }
        best
    });
    // chunks are in index order, so strict improvement keeps the lowest index on ties
    let mut best = (f64::NEG_INFINITY, 0usize);
    for b in partial {
        if b.0 > best.0 {
            best = b;
        }
    }
    let mut choices = Vec::new();
    space.evaluate(best.1, &mut Scratch::default(), Some(&mut choices));
    Ok(ExhaustiveRun {
        assoc: space.association(best.1),
        choices,
        states,
    })
}

#[derive(Default)]
struct Scratch {
    attached: Vec<u128>,
    gains: Vec<Vec<f64>>,
    stack: Vec<usize>,
    best_combo: Vec<usize>,
}

impl Space {
    fn association(&self, mut idx: usize) -> Vec<usize> {
        let n_bs = self.options.len();
        let mut assoc = self.fixed.clone();
        for &v in &self.free {
            assoc[v] = idx % n_bs;
            idx /= n_bs;
        }
        assoc
    }

    /// Best utility over all per-BS option combinations for association `idx`.
    fn evaluate(
        &self,
        mut idx: usize,
        s: &mut Scratch,
        mut out: Option<&mut Vec<Vec<Choice>>>,
    ) -> f64 {
        let n_bs = self.options.len();
        s.attached.clear();
        s.attached.resize(n_bs, 0);
        for i in 0..self.free.len() {
            s.attached[idx % n_bs] |= 1 << i;
            idx /= n_bs;
        }
        let mut total = 0.0;
        for n in 0..n_bs {
            let row = &self.options[n];
            s.gains.resize(row.len(), Vec::new());
            for (k, o) in row.iter().enumerate() {
                s.gains[k].clear();
                s.gains[k].extend(
                    o.masks
                        .iter()
                        .map(|m| o.value * f64::from((m & s.attached[n]).count_ones())),
                );
            }
            let mut best = f64::NEG_INFINITY;
            s.stack.clear();
            s.best_combo.clear();
            search(
                row,
                &s.gains,
                self.budgets[n],
                0.0,
                &mut s.stack,
                &mut best,
                &mut s.best_combo,
            );
            total += best;
            if let Some(out) = out.as_deref_mut() {
                out.push(
                    s.best_combo
                        .iter()
                        .enumerate()
                        .map(|(k, &i)| row[k].choices[i])
                        .collect(),
                );
            }
        }
        total
    }
}

fn search(
    row: &[Options],
    gains: &[Vec<f64>],
    budget: u32,
    acc: f64,
    stack: &mut Vec<usize>,
    best: &mut f64,
    best_combo: &mut Vec<usize>,
) {
    let k = stack.len();
    if k == row.len() {
        if acc > *best {
            *best = acc;
            best_combo.clone_from(stack);
        }
        return;
    }
    for (i, c) in row[k].choices.iter().enumerate() {
        if c.rb > budget {
            continue;
        }
        stack.push(i);
        search(
            row,
            gains,
            budget - c.rb,
            acc + gains[k][i],
            stack,
            best,
            best_combo,
        );
        stack.pop();
    }
}
