//! Vehicle-to-BS association: strongest-server start, then worst-SINR offloading.

use crate::channel::{ChannelRealization, McsTable};

/// Margin by which a move must improve the source BS's worst SINR, dB.
pub const SINR_TOLERANCE_DB: f64 = 1e-9;

/// Serving BS per vehicle: the argmax of SINR, ties to the lowest index.
pub fn initial_association(channel: &ChannelRealization) -> Vec<usize> {
    (0..channel.n_vehicles())
        .map(|v| channel.best_bs(v))
        .collect()
}

/// 0/1 matrix `[bs][vehicle]` of an association vector.
pub fn to_matrix(association: &[usize], n_bs: usize) -> Vec<Vec<u8>> {
    let mut y = vec![vec![0u8; association.len()]; n_bs];
    for (v, &n) in association.iter().enumerate() {
        y[n][v] = 1;
    }
    y
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub association: Vec<usize>,
    pub moves: usize,
}

/// Offload each BS's worst vehicle while that strictly lifts the BS's worst SINR
/// and the receiving BS keeps its own worst SINR.
///
/// Vehicles whose best SINR is below `floor_db` cannot be served anywhere; they
/// stay put and are ignored when computing worst SINRs.
pub fn refine_association(
    association: &[usize],
    sinr_db: &[Vec<f64>],
    floor_db: f64,
) -> Refinement {
    let n_bs = sinr_db.len();
    let mut assoc = association.to_vec();
    let n_veh = assoc.len();
    let active: Vec<bool> = (0..n_veh)
        .map(|v| (0..n_bs).any(|n| sinr_db[n][v] >= floor_db))
        .collect();
    let worst = |assoc: &[usize], n: usize, skip: Option<usize>| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n_veh {
            if assoc[v] != n || !active[v] || Some(v) == skip {
                continue;
            }
            let s = sinr_db[n][v];
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((v, s));
            }
        }
        best
    };

    let mut moves = 0;
    loop {
        let mut moved = false;
        for n in 0..n_bs {
            let Some((v_star, worst_n)) = worst(&assoc, n, None) else {
                continue;
            };
            let Some((_, next_worst)) = worst(&assoc, n, Some(v_star)) else {
                continue;
            };
            if next_worst - worst_n <= SINR_TOLERANCE_DB {
                continue;
            }
            let mut target: Option<usize> = None;
            for m in (0..n_bs).filter(|&m| m != n) {
                let Some((_, worst_m)) = worst(&assoc, m, None) else {
                    continue;
                };
                let s = sinr_db[m][v_star];
                if s > worst_m + SINR_TOLERANCE_DB && target.is_none_or(|t| s > sinr_db[t][v_star])
                {
                    target = Some(m);
                }
            }
            if let Some(m) = target {
                assoc[v_star] = m;
                moves += 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Refinement {
        association: assoc,
        moves,
    }
}

/// Strongest-server start followed by refinement; unservable vehicles are those below CQI 1.
pub fn associate(channel: &ChannelRealization, table: &McsTable) -> Refinement {
    let init = initial_association(channel);
    refine_association(&init, &channel.sinr_db, table.threshold_db(1))
}

/// Per-BS worst SINR over attached vehicles at or above `floor_db`.
pub fn worst_sinrs(association: &[usize], sinr_db: &[Vec<f64>], floor_db: f64) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = vec![None; sinr_db.len()];
    for (v, &n) in association.iter().enumerate() {
        if !(0..sinr_db.len()).any(|m| sinr_db[m][v] >= floor_db) {
            continue;
        }
        let s = sinr_db[n][v];
        out[n] = Some(out[n].map_or(s, |w: f64| w.min(s)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bs_takes_everyone() {
        let ch = ChannelRealization::from_sinr(vec![vec![3.0, -2.0, 10.0]], 1.0);
        assert_eq!(initial_association(&ch), vec![0, 0, 0]);
    }

    #[test]
    fn ties_go_to_lowest_bs() {
        let ch = ChannelRealization::from_sinr(vec![vec![5.0], vec![5.0]], 1.0);
        assert_eq!(initial_association(&ch), vec![0]);
    }

    #[test]
    fn worst_vehicle_moves_when_target_keeps_its_worst() {
        // BS0 serves v0 (1 dB, worst) and v1; BS1 serves v2 at 4 dB.
        // v0 hears BS1 at 6 dB > 4 dB, so it moves and BS0's worst rises to 8 dB.
        let sinr = vec![vec![1.0, 8.0, 0.0], vec![6.0, 2.0, 4.0]];
        let r = refine_association(&[0, 0, 1], &sinr, f64::NEG_INFINITY);
        assert_eq!(r.association, vec![1, 0, 1]);
        assert_eq!(r.moves, 1);
    }

    #[test]
    fn no_move_if_target_worst_would_drop() {
        let sinr = vec![vec![1.0, 8.0, 0.0], vec![3.0, 2.0, 4.0]];
        let r = refine_association(&[0, 0, 1], &sinr, f64::NEG_INFINITY);
        assert_eq!(r.association, vec![0, 0, 1]);
        assert_eq!(r.moves, 0);
    }

    #[test]
    fn unservable_vehicle_stays() {
        let sinr = vec![vec![-20.0, 8.0, 0.0], vec![-30.0, 2.0, 4.0]];
        let r = refine_association(&[0, 0, 1], &sinr, -6.9);
        assert_eq!(r.association[0], 0);
    }
}
