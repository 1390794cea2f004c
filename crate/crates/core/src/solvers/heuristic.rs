//! Worst-vehicle CQI selection, violation-minimising RB trimming, FEC fine-tuning.

use super::common::{BsView, Choice, Problem};
use crate::association::associate;

pub(crate) struct HeuristicRun {
    pub assoc: Vec<usize>,
    pub choices: Vec<Vec<Choice>>,
    pub association_moves: usize,
    /// Passes through the RB-trimming loop, summed over BSs.
    pub trim_iterations: usize,
}

/// Cheapest way to give up one RB: the next alphabet CQI at or above `c.q`
/// that still fits the rate in `rb - 1` blocks, or switching the type off.
fn shrink(p: &Problem<'_>, k: usize, c: Choice) -> Choice {
    let rb = c.rb - 1;
    p.alphabet()
        .iter()
        .filter(|&&q| q >= c.q)
        .find_map(|&q| p.option(k, q, rb))
        .map_or(Choice::off(c.q), |o| Choice { rb, x: o.x, q: o.q })
}

/// Start from the worst member's CQI and step down until every member is served.
fn initial_choice(view: &BsView<'_, '_>, k: usize) -> Choice {
    let p = view.p;
    let (sc, n, members) = (p.sc, view.n, &view.members[k]);
    let alphabet = p.alphabet();
    let worst = members
        .iter()
        .map(|&v| p.cache.channel().sinr_db[n][v])
        .fold(f64::INFINITY, f64::min);
    let cqi = sc.table.sinr_to_cqi(worst);
    let start = alphabet.iter().rposition(|&q| q <= cqi).unwrap_or(0);
    for i in (0..=start).rev() {
        let q = alphabet[i];
        let x = p.x_min(k, q);
        let c = Choice { q, rb: x, x };
        if i == 0 || view.count(k, c) as usize == members.len() {
            return c;
        }
    }
    unreachable!("loop returns at the lowest CQI")
}

pub(crate) fn run(p: &Problem<'_>) -> HeuristicRun {
    let sc = p.sc;
    let refined = associate(p.cache.channel(), &sc.table);
    let assoc = refined.association;
    let mut all = Vec::with_capacity(sc.n_bs());
    let mut trim_iterations = 0;
    for n in 0..sc.n_bs() {
        let view = p.view(&assoc, n);
        let mut ch: Vec<Choice> = (0..sc.n_messages())
            .map(|k| {
                if view.has_members(k) {
                    initial_choice(&view, k)
                } else {
                    Choice::off(p.alphabet()[p.alphabet().len() - 1])
                }
            })
            .collect();

        while ch.iter().map(|c| c.rb).sum::<u32>() > p.budget(n) {
            trim_iterations += 1;
            let mut pick: Option<(u32, usize, Choice)> = None;
            for (k, &cur) in ch.iter().enumerate() {
                if cur.rb == 0 {
                    continue;
                }
                let next = shrink(p, k, cur);
                let before = view.count(k, cur);
                let after = view.count(k, next);
                let lost = before.saturating_sub(after);
                if pick.is_none_or(|(l, _, _)| lost < l) {
                    pick = Some((lost, k, next));
                }
            }
            let (_, k, next) = pick.expect("over budget implies some RB is granted");
            ch[k] = next;
        }

        fine_tune(&view, &mut ch);
        all.push(ch);
    }
    HeuristicRun {
        assoc,
        choices: all,
        association_moves: refined.moves,
        trim_iterations,
    }
}

/// Per type, move to the higher-CQI/lower-rate option within the leftover RBs
/// serving the most members; ties prefer fewer RBs, then higher CQI.
fn fine_tune(view: &BsView<'_, '_>, ch: &mut [Choice]) -> usize {
    let p = view.p;
    let mut moves = 0;
    loop {
        let mut changed = false;
        for k in 0..ch.len() {
            if !view.has_members(k) {
                continue;
            }
            let used: u32 = ch.iter().map(|c| c.rb).sum();
            let cap = ch[k].rb + view.budget().saturating_sub(used);
            let key = |c: Choice| (view.count(k, c), std::cmp::Reverse(c.rb), c.q);
            let mut best = ch[k];
            let mut best_key = key(best);
            for &q in p.alphabet().iter().filter(|&&q| q >= ch[k].q) {
                for rb in p.x_min(k, q)..=cap {
                    let Some(c) = p.option(k, q, rb) else {
                        continue;
                    };
                    let kc = key(c);
                    if kc > best_key {
                        best = c;
                        best_key = kc;
                    }
                }
            }
            if best != ch[k] {
                ch[k] = best;
                moves += 1;
                changed = true;
            }
        }
        if !changed {
            return moves;
        }
    }
}
