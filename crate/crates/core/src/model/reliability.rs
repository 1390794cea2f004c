//! Rate, RB-count, reception-probability and utility arithmetic.

use crate::channel::{McsTable, MAX_CQI};
use crate::error::{Error, Result};
use crate::model::MessageType;

/// Sub-carriers per RB times OFDM symbols per slot.
pub const RESOURCE_ELEMENTS_PER_RB: f64 = 12.0 * 14.0;

const CEIL_TOLERANCE: f64 = 1e-9;

/// Sustained bits/s carried by one RB position granted in every slot at CQI `q`.
pub fn rb_data_rate(q: u8, table: &McsTable, slots_per_second: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::NoTransmission);
    }
    if q > MAX_CQI {
        return Err(Error::domain(format!("CQI {q} is out of range")));
    }
    Ok(RESOURCE_ELEMENTS_PER_RB * table.efficiency(q) * f64::from(slots_per_second))
}

/// Smallest RB count with `rb · rd · f ≥ d`.
pub fn rb_count(d_bps: f64, rd_bps: f64, f: f64) -> u32 {
    let per_rb = rd_bps * f;
    let mut n = (d_bps / per_rb).ceil().max(0.0) as u32;
    // undo a ceiling pushed up by rounding in the division
    while n > 0 && f64::from(n - 1) * per_rb >= d_bps {
        n -= 1;
    }
    while f64::from(n) * per_rb < d_bps {
        n += 1;
    }
    n
}

/// Blocks a receiver needs out of `rb` at code rate `f`: `⌈rb · f⌉`.
pub fn required_blocks(rb: u32, f: f64) -> u32 {
    let x = (f64::from(rb) * f - CEIL_TOLERANCE).ceil();
    (x.max(0.0) as u32).min(rb)
}

/// Probability of receiving at least `⌈rb · f⌉` of `rb` independent blocks.
pub fn ps_success(rb: u32, f: f64, p: f64) -> f64 {
    ps_with_blocks(rb, required_blocks(rb, f), p)
}

/// `P[Binomial(rb, p) ≥ needed]`.
pub fn ps_with_blocks(rb: u32, needed: u32, p: f64) -> f64 {
    if needed == 0 {
        return 1.0;
    }
    if needed > rb {
        return 0.0;
    }
    if needed == rb {
        return p.powi(rb as i32);
    }
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    // one pass over the pmf, both tails, no allocation
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let n = f64::from(rb);
    let (mut lower, mut upper) = (0.0, 0.0);
    let mut ln_c = 0.0;
    for i in 0..=rb {
        let fi = f64::from(i);
        let term = (ln_c + fi * ln_p + (n - fi) * ln_q).exp();
        if i < needed {
            lower += term;
        } else {
            upper += term;
        }
        ln_c += ((n - fi) / (fi + 1.0)).ln();
    }
    if upper <= 0.5 {
        upper
    } else {
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// `P[Binomial(n, p) = i]` for `i = 0..=n`, via log-space coefficients.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    if p <= 0.0 {
        let mut v = vec![0.0; n_us + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n_us + 1];
        v[n_us] = 1.0;
        return v;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_fact = Vec::with_capacity(n_us + 1);
    ln_fact.push(0.0);
    for i in 1..=n_us {
        ln_fact.push(ln_fact[i - 1] + (i as f64).ln());
    }
    (0..=n_us)
        .map(|i| {
            let ln_c = ln_fact[n_us] - ln_fact[i] - ln_fact[n_us - i];
            (ln_c + i as f64 * ln_p + (n_us - i) as f64 * ln_q).exp()
        })
        .collect()
}

/// Step utility: the message's value once its reliability target is met.
pub fn utility(ps: f64, msg: &MessageType) -> f64 {
    if ps >= msg.reliability {
        msg.value()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rb_data_rate_examples() {
        let t = McsTable::standard();
        assert!((rb_data_rate(15, &t, 1000).unwrap() - 933_189.6).abs() < 1e-6);
        assert!((rb_data_rate(1, &t, 1000).unwrap() - 25_586.4).abs() < 1e-6);
        assert!((rb_data_rate(15, &t, 1).unwrap() - 933.1896).abs() < 1e-9);
        assert!(matches!(
            rb_data_rate(0, &t, 1000),
            Err(Error::NoTransmission)
        ));
        assert!(rb_data_rate(16, &t, 1000).is_err());
    }

    #[test]
    fn rb_count_examples() {
        assert_eq!(rb_count(2_500_000.0, 933_189.6, 1.0), 3);
        assert_eq!(rb_count(100_000.0, 933_189.6, 1.0), 1);
        assert_eq!(rb_count(933_189.6, 933_189.6, 1.0), 1);
        assert_eq!(rb_count(2_500_000.0, 933_189.6, 0.5), 6);
    }

    #[test]
    fn ps_examples() {
        // C(3,2) 0.9² 0.1 + 0.9³
        assert!((ps_success(3, 2.0 / 3.0, 0.9) - 0.972).abs() < 1e-12);
        assert_eq!(ps_success(5, 1.0, 0.8), 0.8f64.powi(5));
        for rb in 1..10 {
            assert_eq!(ps_success(rb, 0.37, 1.0), 1.0);
        }
    }

    #[test]
    fn utility_threshold_is_inclusive() {
        let m = MessageType::new(100e3, 0.9999, 2.0);
        assert_eq!(utility(0.99995, &m), 200_000.0);
        assert_eq!(utility(0.999, &m), 0.0);
        assert_eq!(utility(0.9999, &m), 200_000.0);
    }

    #[test]
    fn required_blocks_ignores_rounding_noise() {
        assert_eq!(required_blocks(3, 2.0 / 3.0), 2);
        assert_eq!(required_blocks(7, 3.0 / 7.0), 3);
        assert_eq!(required_blocks(10, 0.0), 0);
        assert_eq!(required_blocks(4, 1.0), 4);
    }

    #[test]
    fn no_fec_is_plain_power() {
        for rb in 1..=64u32 {
            for step in 0..=10 {
                let p = f64::from(step) / 10.0;
                assert_eq!(ps_success(rb, 1.0, p), p.powi(rb as i32), "rb={rb} p={p}");
            }
        }
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(n in 0u32..=64, p in 0.0f64..=1.0) {
            let s: f64 = binomial_pmf(n, p).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ps_monotone_in_p(rb in 1u32..=40, f in 0.05f64..=1.0, p in 0.0f64..0.99, dp in 0.0f64..0.01) {
            prop_assert!(ps_success(rb, f, p + dp) + 1e-15 >= ps_success(rb, f, p));
        }

        #[test]
        fn redundancy_never_hurts(needed in 1u32..=20, extra in 0u32..=20, p in 0.0f64..=1.0) {
            let base = ps_with_blocks(needed + extra, needed, p);
            let more = ps_with_blocks(needed + extra + 1, needed, p);
            prop_assert!(more + 1e-15 >= base);
        }

        #[test]
        fn rb_count_meets_demand(d in 1.0f64..5e6, q in 1u8..=15, f in 0.05f64..=1.0) {
            let rd = rb_data_rate(q, &McsTable::standard(), 1000).unwrap();
            let n = rb_count(d, rd, f);
            prop_assert!(f64::from(n) * rd * f >= d);
            prop_assert!(n == 0 || f64::from(n - 1) * rd * f < d);
        }

        #[test]
        fn utility_is_a_single_step(ps in 0.0f64..=1.0, target in 0.01f64..0.9999) {
            let m = MessageType::new(1e5, target, 1.5);
            let u = utility(ps, &m);
            prop_assert_eq!(u, if ps >= target { m.value() } else { 0.0 });
        }
    }
}
