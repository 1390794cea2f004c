//! Shared per-(BS, type) bookkeeping for the solvers.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;

use crate::channel::{ChannelRealization, TABLE_ROWS};
use crate::error::Result;
use crate::model::{rb_count, rb_data_rate, Allocation, Scenario, SuccessCache};

/// One type's transmission at one BS: CQI, RBs granted, blocks needed to decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Choice {
    pub q: u8,
    pub rb: u32,
    pub x: u32,
}

impl Choice {
    pub fn off(q: u8) -> Self {
        Self { q, rb: 0, x: 0 }
    }

    pub fn f(&self) -> f64 {
        if self.rb == 0 {
            1.0
        } else {
            f64::from(self.x) / f64::from(self.rb)
        }
    }
}

pub(crate) struct Problem<'a> {
    pub sc: &'a Scenario,
    pub cache: SuccessCache<'a>,
    /// `x_min[k][q]`: fewest blocks carrying `D_k` at CQI `q`.
    x_min: Vec<[u32; TABLE_ROWS]>,
}

impl<'a> Problem<'a> {
    pub fn new(sc: &'a Scenario, channel: &'a ChannelRealization) -> Result<Self> {
        sc.validate()?;
        let cache = SuccessCache::new(sc, channel)?;
        let mut x_min = Vec::with_capacity(sc.n_messages());
        for m in &sc.messages {
            let mut row = [u32::MAX; TABLE_ROWS];
            for q in 1..TABLE_ROWS as u8 {
                let rd = rb_data_rate(q, &sc.table, sc.slots_per_second)?;
                row[q as usize] = rb_count(m.data_rate_bps, rd, 1.0);
            }
            x_min.push(row);
        }
        Ok(Self { sc, cache, x_min })
    }

    pub fn alphabet(&self) -> &'a [u8] {
        &self.sc.cqi_alphabet
    }

    pub fn x_min(&self, k: usize, q: u8) -> u32 {
        self.x_min[k][q as usize]
    }

    pub fn budget(&self, n: usize) -> u32 {
        self.sc.base_stations[n].rb_budget
    }

    pub fn value(&self, k: usize) -> f64 {
        self.sc.messages[k].value()
    }

    /// Interested vehicles attached to `n`, per type.
    pub fn members(&self, assoc: &[usize], n: usize) -> Vec<Vec<usize>> {
        (0..self.sc.n_messages())
            .map(|k| {
                (0..assoc.len())
                    .filter(|&v| assoc[v] == n && self.sc.interested(v, k))
                    .collect()
            })
            .collect()
    }

    pub fn view<'p>(&'p self, assoc: &[usize], n: usize) -> BsView<'p, 'a> {
        let members = self.members(assoc, n);
        BsView {
            p: self,
            n,
            sorted: (0..members.len() * TABLE_ROWS)
                .map(|_| OnceCell::new())
                .collect(),
            members,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn satisfied(&self, n: usize, k: usize, v: usize, c: Choice) -> bool {
        self.cache.satisfied(n, v, k, c.q, c.rb, c.x)
    }

    /// Choice at CQI `q` over `rb` RBs using the fewest blocks, if the rate fits.
    pub fn option(&self, k: usize, q: u8, rb: u32) -> Option<Choice> {
        let x = self.x_min(k, q);
        (rb >= x && rb > 0).then_some(Choice { q, rb, x })
    }

    pub fn allocation(&self, assoc: &[usize], choices: &[Vec<Choice>]) -> Allocation {
        let mut a = Allocation::with_association(self.sc.n_bs(), self.sc.n_messages(), assoc);
        for (n, row) in choices.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                a.q[n][k] = c.q;
                a.rb[n][k] = c.rb;
                a.f[n][k] = c.f();
            }
        }
        a
    }
}

/// One BS with a fixed set of attached vehicles; counts served members per option.
pub(crate) struct BsView<'p, 'a> {
    pub p: &'p Problem<'a>,
    pub n: usize,
    pub members: Vec<Vec<usize>>,
    /// Members' per-RB success probability at `(k, q)`, descending.
    sorted: Vec<OnceCell<Vec<f64>>>,
    memo: RefCell<HashMap<(usize, Choice), u32>>,
}

impl BsView<'_, '_> {
    pub fn has_members(&self, k: usize) -> bool {
        !self.members[k].is_empty()
    }

    pub fn budget(&self) -> u32 {
        self.p.budget(self.n)
    }

    /// Members of type `k` meeting its reliability under `c`.
    pub fn count(&self, k: usize, c: Choice) -> u32 {
        if c.rb == 0 || self.members[k].is_empty() {
            return 0;
        }
        if let Some(&hit) = self.memo.borrow().get(&(k, c)) {
            return hit;
        }
        let ps = self.sorted[k * TABLE_ROWS + c.q as usize].get_or_init(|| {
            let mut v: Vec<f64> = self.members[k]
                .iter()
                .map(|&v| self.p.cache.p(self.n, v, c.q))
                .collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        });
        // reception probability is monotone in p, so the served members form a prefix
        let target = self.p.sc.messages[k].reliability;
        let served =
            ps.partition_point(|&p| crate::model::ps_with_blocks(c.rb, c.x, p) >= target) as u32;
        self.memo.borrow_mut().insert((k, c), served);
        served
    }

    pub fn utility(&self, k: usize, c: Choice) -> f64 {
        self.p.value(k) * f64::from(self.count(k, c))
    }
}

/// Give back RBs that earn nothing: each type moves to the cheapest option
/// serving at least as many members, or switches off if it serves none.
pub(crate) fn reclaim(view: &BsView<'_, '_>, choices: &mut [Choice]) {
    let p = view.p;
    for (k, cur) in choices.iter_mut().enumerate() {
        if cur.rb == 0 {
            continue;
        }
        let have = view.count(k, *cur);
        if have == 0 {
            *cur = Choice::off(cur.q);
            continue;
        }
        for rb in 1..=cur.rb {
            let found = p
                .alphabet()
                .iter()
                .rev()
                .filter_map(|&q| p.option(k, q, rb))
                .find(|&c| view.count(k, c) >= have);
            if let Some(c) = found {
                *cur = c;
                break;
            }
        }
    }
}

/// Spend leftover RBs one move at a time while some move raises utility.
///
/// A move resets one type to any option fitting in its RBs plus the leftover;
/// moves needing no extra RB go first, then the best gain per extra RB.
/// RBs that earn nothing are reclaimed before each round.
pub(crate) fn spend_residual(view: &BsView<'_, '_>, choices: &mut [Choice]) -> usize {
    let p = view.p;
    let mut moves = 0;
    loop {
        reclaim(view, choices);
        let used: u32 = choices.iter().map(|c| c.rb).sum();
        let residual = view.budget().saturating_sub(used);
        // (free move?, score, k, choice)
        let mut best: Option<(bool, f64, usize, Choice)> = None;
        for (k, cur) in choices.iter().enumerate() {
            if !view.has_members(k) {
                continue;
            }
            let base = view.utility(k, *cur);
            for &q in p.alphabet() {
                for rb in p.x_min(k, q).max(1)..=cur.rb + residual {
                    let Some(c) = p.option(k, q, rb) else {
                        continue;
                    };
                    let gain = view.utility(k, c) - base;
                    if gain <= 0.0 {
                        continue;
                    }
                    let extra = rb.saturating_sub(cur.rb);
                    let cand = if extra == 0 {
                        (true, gain)
                    } else {
                        (false, gain / f64::from(extra))
                    };
                    let better = match best {
                        None => true,
                        Some((free, score, _, _)) => {
                            (cand.0 && !free) || (cand.0 == free && cand.1 > score)
                        }
                    };
                    if better {
                        best = Some((cand.0, cand.1, k, c));
                    }
                }
            }
        }
        match best {
            Some((_, _, k, c)) => {
                choices[k] = c;
                moves += 1;
            }
            None => return moves,
        }
    }
}
