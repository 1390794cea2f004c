//! Greedy one-RB-at-a-time grants on strongest-server association, without FEC.

use super::common::{BsView, Choice, Problem};
use crate::association::initial_association;

/// Best utility and CQI for type `k` at BS `n` when it holds `g` RBs with F = 1.
/// Ties go to the higher CQI.
fn best_at(view: &BsView<'_, '_>, k: usize, g: u32) -> (f64, Option<Choice>) {
    let p = view.p;
    let mut best = (0.0, None);
    for &q in p.alphabet().iter().rev() {
        if g == 0 || p.x_min(k, q) > g {
            continue;
        }
        let c = Choice { q, rb: g, x: g };
        let u = view.utility(k, c);
        if best.1.is_none() || u > best.0 {
            best = (u, Some(c));
        }
    }
    best
}

pub(crate) fn run(p: &Problem<'_>) -> (Vec<usize>, Vec<Vec<Choice>>, usize) {
    let sc = p.sc;
    let assoc = initial_association(p.cache.channel());
    let low = p.alphabet()[0];
    let mut all = Vec::with_capacity(sc.n_bs());
    let mut grants = 0;
    for n in 0..sc.n_bs() {
        let view = p.view(&assoc, n);
        let n_k = sc.n_messages();
        let mut g = vec![0u32; n_k];
        let mut cur: Vec<f64> = vec![0.0; n_k];
        for _ in 0..p.budget(n) {
            // (Δ, current utility, k); Δ descending, then utility ascending, then k
            let mut pick: Option<(f64, f64, usize)> = None;
            for k in (0..n_k).filter(|&k| view.has_members(k)) {
                let delta = best_at(&view, k, g[k] + 1).0 - cur[k];
                let better = match pick {
                    None => true,
                    Some((d, u, _)) => delta > d || (delta == d && cur[k] < u),
                };
                if better {
                    pick = Some((delta, cur[k], k));
                }
            }
            match pick {
                Some((d, _, k)) if d >= 0.0 => {
                    g[k] += 1;
                    cur[k] = best_at(&view, k, g[k]).0;
                    grants += 1;
                }
                _ => break,
            }
        }
        let row = (0..n_k)
            .map(|k| best_at(&view, k, g[k]).1.unwrap_or(Choice::off(low)))
            .collect();
        all.push(row);
    }
    (assoc, all, grants)
}
