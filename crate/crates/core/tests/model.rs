use proptest::prelude::*;

use v2xcast::model::{
    check_feasibility, evaluate, full_alphabet, Allocation, Constraint, MessageType,
};
use v2xcast::validate::InstanceSpec;

fn instance(sinr: Vec<Vec<f64>>, interest: Vec<Vec<u8>>, budget: u32) -> InstanceSpec {
    let n_bs = sinr.len();
    let n_k = interest[0].len();
    InstanceSpec {
        k_factor: sinr.iter().map(|r| vec![1.0; r.len()]).collect(),
        sinr_db: sinr,
        budgets: vec![budget; n_bs],
        messages: [
            MessageType::new(300_000.0, 0.9, 1.0),
            MessageType::new(800_000.0, 0.8, 1.5),
        ][..n_k]
            .to_vec(),
        interest,
        alphabet: full_alphabet(),
    }
}

fn two_by_three() -> InstanceSpec {
    instance(
        vec![vec![15.0, 8.0, 2.0], vec![1.0, 9.0, 14.0]],
        vec![vec![1, 1], vec![1, 0], vec![0, 1]],
        6,
    )
}

fn allocation(assoc: &[usize], q: u8, rb: u32, x: u32) -> Allocation {
    let mut a = Allocation::with_association(2, 2, assoc);
    for n in 0..2 {
        for k in 0..2 {
            a.q[n][k] = q;
            a.rb[n][k] = rb;
            a.f[n][k] = f64::from(x) / f64::from(rb.max(1));
        }
    }
    a
}

#[test]
fn feasible_allocation_has_no_violations() {
    let (sc, _) = two_by_three().build();
    // one RB at CQI 7 carries 248 kb/s: 300 kb/s needs 2 RBs, 800 kb/s needs 4
    let mut a = allocation(&[0, 1, 1], 7, 2, 2);
    a.rb[0][1] = 4;
    a.rb[1][1] = 4;
    assert!(
        check_feasibility(&a, &sc).is_empty(),
        "{:?}",
        check_feasibility(&a, &sc)
    );
}

#[test]
fn each_constraint_is_reported() {
    let (sc, _) = two_by_three().build();

    let a = allocation(&[0, 1, 1], 7, 4, 2);
    let v = check_feasibility(&a, &sc);
    assert!(v
        .iter()
        .any(|v| v.constraint == Constraint::RbBudget && v.slack == -2.0));

    let a = allocation(&[0, 1, 1], 1, 2, 1);
    let v = check_feasibility(&a, &sc);
    assert!(v
        .iter()
        .any(|v| v.constraint == Constraint::RateDemand && v.slack < 0.0));

    let mut a = allocation(&[0, 1, 1], 7, 3, 3);
    a.y[0][1] = 1;
    a.y[1][2] = 0;
    let v: Vec<_> = check_feasibility(&a, &sc)
        .into_iter()
        .filter(|v| v.constraint == Constraint::Association)
        .collect();
    assert_eq!(v.len(), 2);

    let mut a = allocation(&[0, 1, 1], 7, 3, 3);
    a.q[1][1] = 0;
    a.f[0][0] = 1.5;
    let v = check_feasibility(&a, &sc);
    assert_eq!(
        v.iter()
            .filter(|v| v.constraint == Constraint::Domain)
            .count(),
        2
    );

    let a = Allocation::empty(1, 2, 3);
    assert_eq!(check_feasibility(&a, &sc)[0].constraint, Constraint::Domain);
}

#[test]
fn unassociated_vehicles_earn_nothing() {
    let (sc, ch) = two_by_three().build();
    let a = allocation(&[0, 0, 0], 1, 6, 1);
    let all = evaluate(&a, &sc, &ch).unwrap();
    let mut b = a.clone();
    b.y[0][0] = 0;
    let fewer = evaluate(&b, &sc, &ch).unwrap();
    assert!(all.utility > fewer.utility);
    assert_eq!(all.satisfied[0] - fewer.satisfied[0], 1);
    let value: f64 = sc
        .messages
        .iter()
        .zip(&all.satisfied)
        .map(|(m, &s)| m.value() * f64::from(s))
        .sum();
    assert_eq!(all.utility, value);
}

#[test]
fn allocation_json_round_trip() {
    let a = allocation(&[1, 0, 1], 9, 2, 1);
    assert_eq!(Allocation::from_json(&a.to_json().unwrap()).unwrap(), a);
    assert_eq!(a.association(), [Some(1), Some(0), Some(1)]);
}

/// SINR `[bs][vehicle]`, interest, association, CQI and RB per (bs, type).
type Instance = (Vec<Vec<f64>>, Vec<Vec<u8>>, Vec<usize>, Vec<u8>, Vec<u32>);

fn arb_instance() -> impl Strategy<Value = Instance> {
    (1usize..=6).prop_flat_map(|n_v| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..30.0, n_v), 2),
            prop::collection::vec(prop::collection::vec(0u8..=1, 2), n_v),
            prop::collection::vec(0usize..2, n_v),
            prop::collection::vec(1u8..=15, 4),
            prop::collection::vec(1u32..=4, 4),
        )
    })
}

fn utility_of(
    sinr: &[Vec<f64>],
    interest: &[Vec<u8>],
    assoc: &[usize],
    q: &[u8],
    rb: &[u32],
) -> f64 {
    let (sc, ch) = instance(sinr.to_vec(), interest.to_vec(), 8).build();
    let mut a = Allocation::with_association(2, 2, assoc);
    for n in 0..2 {
        for k in 0..2 {
            a.q[n][k] = q[n * 2 + k];
            a.rb[n][k] = rb[n * 2 + k];
            a.f[n][k] = 1.0 / f64::from(rb[n * 2 + k]);
        }
    }
    evaluate(&a, &sc, &ch).unwrap().utility
}

proptest! {
    #[test]
    fn utility_ignores_vehicle_order(
        (sinr, interest, assoc, q, rb) in arb_instance(),
        seed in any::<u64>(),
    ) {
        let base = utility_of(&sinr, &interest, &assoc, &q, &rb);
        let n_v = assoc.len();
        let mut perm: Vec<usize> = (0..n_v).collect();
        perm.rotate_left((seed % n_v as u64) as usize);
        if seed % 2 == 1 {
            perm.reverse();
        }
        let sinr_p: Vec<Vec<f64>> = sinr.iter().map(|r| perm.iter().map(|&v| r[v]).collect()).collect();
        let interest_p: Vec<Vec<u8>> = perm.iter().map(|&v| interest[v].clone()).collect();
        let assoc_p: Vec<usize> = perm.iter().map(|&v| assoc[v]).collect();
        let permuted = utility_of(&sinr_p, &interest_p, &assoc_p, &q, &rb);
        prop_assert!((base - permuted).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn utility_ignores_bs_labels((sinr, interest, assoc, q, rb) in arb_instance()) {
        let base = utility_of(&sinr, &interest, &assoc, &q, &rb);
        let sinr_s = vec![sinr[1].clone(), sinr[0].clone()];
        let assoc_s: Vec<usize> = assoc.iter().map(|&n| 1 - n).collect();
        let q_s = [q[2], q[3], q[0], q[1]];
        let rb_s = [rb[2], rb[3], rb[0], rb[1]];
        let swapped = utility_of(&sinr_s, &interest, &assoc_s, &q_s, &rb_s);
        prop_assert!((base - swapped).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn utility_is_bounded_by_total_interest((sinr, interest, assoc, q, rb) in arb_instance()) {
        let u = utility_of(&sinr, &interest, &assoc, &q, &rb);
        let cap: f64 = interest.iter().map(|w| f64::from(w[0]) * 300_000.0 + f64::from(w[1]) * 1_200_000.0).sum();
        prop_assert!(u >= 0.0 && u <= cap + 1e-6);
    }
}
