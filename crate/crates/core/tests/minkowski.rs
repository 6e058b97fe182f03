mod common;

use bmstab_core::minkowski::{
    convex_combination, count_grid_sets, deficit, enumerate_grid_sets, exhaustive_kemperman, grid_kemperman,
    grid_to_intervals, kemperman_stability, IntervalSet,
};
use bmstab_core::num::{qf, qi};
use bmstab_core::LatticeSet;
use common::{brute_combination, random_scatter, random_set, rng};
use proptest::prelude::*;

fn arb_t() -> impl Strategy<Value = (i64, i64)> {
    prop_oneof![Just((1, 2)), Just((1, 3)), Just((2, 3)), Just((2, 5)), Just((1, 4))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn combination_matches_brute_force(dim in 1usize..=3, seed in any::<u64>(), (p, q) in arb_t()) {
        let mut r = rng(seed);
        let side = [0, 10, 6, 4][dim];
        let a = random_scatter(&mut r, dim, 2, side, 0.4);
        let b = random_set(&mut r, dim, 2, side, 2);
        let fast = convex_combination(&a, &b, &qf(p, q)).unwrap();
        let slow = brute_combination(&a, &b, p, q);
        prop_assert!(fast.same_set(&slow).unwrap());
    }

    #[test]
    fn brunn_minkowski_never_fails(dim in 1usize..=3, seed in any::<u64>(), (p, q) in arb_t()) {
        let mut r = rng(seed);
        let side = [0, 12, 6, 4][dim];
        let a = random_scatter(&mut r, dim, 3, side, 0.5);
        let b = random_set(&mut r, dim, 3, side, 3);
        let (rec, _) = deficit(&a, &b, &qf(p, q)).unwrap();
        prop_assert!(rec.bm_holds());
        prop_assert!(rec.delta_raw.lo >= 0.0);
        prop_assert!(rec.delta_raw.lo <= rec.delta_raw.hi);
    }

    #[test]
    fn combination_is_symmetric_in_t(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_set(&mut r, 2, 2, 6, 2);
        let b = random_set(&mut r, 2, 2, 6, 2);
        let s1 = convex_combination(&a, &b, &qf(1, 3)).unwrap();
        let s2 = convex_combination(&b, &a, &qf(2, 3)).unwrap();
        prop_assert!(s1.same_set(&s2).unwrap());
    }
}

#[test]
fn convex_sets_have_zero_deficit() {
    let a = LatticeSet::boxed(2, 4, [0, 0, 0], [4, 4, 0]).unwrap();
    let b = LatticeSet::boxed(2, 4, [0, 0, 0], [8, 2, 0]).unwrap();
    // homothetic copies: equality
    let c = LatticeSet::boxed(2, 4, [0, 0, 0], [8, 8, 0]).unwrap();
    let (rec, _) = deficit(&a, &c, &qf(1, 2)).unwrap();
    assert_eq!(rec.sign, std::cmp::Ordering::Equal);
    let (rec, s) = deficit(&a, &b, &qf(1, 2)).unwrap();
    assert_eq!(s.measure(), qf(9, 8));
    assert!(rec.delta_raw.lo > 0.0);
}

#[test]
fn interval_sumset_by_hand() {
    let a = IntervalSet::new(vec![(qi(0), qi(1)), (qi(3), qi(4))]).unwrap();
    let b = IntervalSet::new(vec![(qi(0), qf(1, 2))]).unwrap();
    let s = a.sumset(&b);
    assert_eq!(s.components(), &[(qi(0), qf(3, 2)), (qi(3), qf(9, 2))]);
    assert_eq!(s.measure(), qi(3));
}

#[test]
fn boundary_pair_is_not_applicable() {
    // |A+B| = |A|+|B|+min exactly: the near-equality hypothesis is strict
    let a = IntervalSet::new(vec![(qi(0), qi(1)), (qi(3), qi(3) + qf(1, 16))]).unwrap();
    let v = kemperman_stability(&a, &a).unwrap();
    assert!(!v.applicable);
    assert_eq!(v.delta, qi(1) + qf(1, 16));
    assert_eq!(v.excess_a, qi(2));
}

#[test]
fn grid_route_agrees_with_interval_route() {
    let sets = enumerate_grid_sets(8, 3);
    let mut r = rng(11);
    use rand::Rng;
    for _ in 0..3000 {
        let a = &sets[r.gen_range(0..sets.len())];
        let b = &sets[r.gen_range(0..sets.len())];
        let (app, pass) = grid_kemperman(a, b);
        let v = kemperman_stability(&grid_to_intervals(a, 2), &grid_to_intervals(b, 2)).unwrap();
        assert_eq!((app, pass), (v.applicable, v.pass), "{a:?} {b:?}");
    }
}

#[test]
fn enumeration_count_matches_formula() {
    for (max, k) in [(4, 3), (8, 2), (8, 3), (12, 2)] {
        assert_eq!(enumerate_grid_sets(max, k).len() as u128, count_grid_sets(max, k));
    }
}

#[test]
fn exhaustive_quarter_grid_three_components() {
    let rep = exhaustive_kemperman(16, 3, None);
    assert!(rep.complete);
    assert!(rep.failures.is_empty(), "{:?}", &rep.failures[..rep.failures.len().min(3)]);
    assert!(rep.applicable > 0);
}

#[test]
fn exhaustive_eighth_grid_two_components() {
    let rep = exhaustive_kemperman(32, 2, None);
    assert!(rep.complete);
    assert!(rep.failures.is_empty());
}

#[test]
fn deficit_is_exact_for_scaled_cube() {
    let a = LatticeSet::unit_cube(3, 2).unwrap();
    let b = LatticeSet::boxed(3, 2, [0, 0, 0], [4, 4, 4]).unwrap();
    let (rec, s) = deficit(&a, &b, &qf(1, 2)).unwrap();
    // (1/2) Q + (1/2) 2Q = (3/2) Q
    assert_eq!(s.measure(), qf(27, 8));
    assert_eq!(rec.sign, std::cmp::Ordering::Equal);
    assert_eq!(rec.delta_norm, qi(7) + qf(19, 8));
}
