mod common;

use std::collections::HashMap;

use bmstab_core::convexity::{
    concave_envelope, concavity_fit, four_point_residual, hull_excess, linear_fit, GridFunction, LevelIndex, Polytope,
};
use bmstab_core::num::{qf, qi, Q};
use bmstab_core::LatticeSet;
use common::{random_scatter, rng};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::Rng;

fn rq(r: &mut impl Rng) -> Q {
    Q::new(BigInt::from(r.gen_range(-50i64..50)), BigInt::from(r.gen_range(1i64..9)))
}

/// Gift wrapping on integer points; twice the area.
fn jarvis_area2(pts: &[[i64; 2]]) -> i128 {
    let cross = |o: [i64; 2], a: [i64; 2], b: [i64; 2]| -> i128 {
        (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128 - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128
    };
    let d2 = |a: [i64; 2], b: [i64; 2]| (a[0] - b[0]).pow(2) + (a[1] - b[1]).pow(2);
    let start = *pts.iter().min().unwrap();
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = if pts[0] == cur { pts[1] } else { pts[0] };
        for &p in pts {
            let c = cross(cur, next, p);
            if c < 0 || (c == 0 && d2(cur, p) > d2(cur, next)) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        cur = next;
        if hull.len() > pts.len() + 1 {
            panic!("wrapping did not close");
        }
    }
    let mut s = 0i128;
    for k in 0..hull.len() {
        let (a, b) = (hull[k], hull[(k + 1) % hull.len()]);
        s += a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quadratic_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let y1 = [rq(&mut r), rq(&mut r)];
        let y2 = [rq(&mut r), rq(&mut r)];
        let tp = Q::new(BigInt::from(r.gen_range(1i64..20)), BigInt::from(20));
        let comb = |a: &Q| [a * &y1[0] + (Q::from(BigInt::from(1)) - a) * &y2[0], a * &y1[1] + (Q::from(BigInt::from(1)) - a) * &y2[1]];
        let sq = |p: &[Q; 2]| &p[0] * &p[0] + &p[1] * &p[1];
        let one = qi(1);
        let lhs = sq(&comb(&tp)) + sq(&comb(&(&one - &tp))) - sq(&y1) - sq(&y2);
        let d = [&y1[0] - &y2[0], &y1[1] - &y2[1]];
        let rhs = qi(-2) * &tp * (&one - &tp) * sq(&d);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn planar_hull_area_matches_gift_wrapping(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e = random_scatter(&mut r, 2, 3, 8, 0.3);
        let pts: Vec<[i64; 2]> = e.corners().iter().map(|c| [c[0], c[1]]).collect();
        let area = Polytope::hull_of(&e).unwrap().volume().clone();
        prop_assert_eq!(area, Q::new(BigInt::from(jarvis_area2(&pts)), BigInt::from(18)));
        prop_assert!(hull_excess(&e).unwrap() >= qi(0));
    }

    #[test]
    fn solid_hull_volume_splits_over_unit_boxes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e = random_scatter(&mut r, 3, 1, 4, 0.15);
        let k = Polytope::hull_of(&e).unwrap();
        let mut total = qi(0);
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    total += k.box_intersection_volume(&[qi(x), qi(y), qi(z)], &[qi(x + 1), qi(y + 1), qi(z + 1)]);
                }
            }
        }
        prop_assert_eq!(&total, k.volume());
        prop_assert_eq!(k.lattice_intersection_measure(&e), e.measure());
        for c in e.corners() {
            prop_assert!(k.contains(&c.map(qi)));
        }
    }

    #[test]
    fn one_dimensional_envelope_matches_chord_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..30);
        let pts: Vec<[i64; 2]> = (0..n).map(|x| [x, 0]).collect();
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::new(1, 8, pts, vals.clone()).unwrap();
        let env = concave_envelope(&f).unwrap();
        for x in 0..n as usize {
            let mut best = f64::NEG_INFINITY;
            for a in 0..=x {
                for b in x..n as usize {
                    let v = if a == b {
                        vals[a]
                    } else {
                        vals[a] + (vals[b] - vals[a]) * (x - a) as f64 / (b - a) as f64
                    };
                    best = best.max(v);
                }
            }
            prop_assert!((env.values[x] - best).abs() <= 1e-12);
            prop_assert!(env.values[x] >= vals[x]);
        }
    }

    #[test]
    fn planar_envelope_is_concave_majorant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let side = r.gen_range(3i64..9);
        let mut pts = Vec::new();
        for x in -side..=side {
            for y in -side..=side {
                if x * x + y * y <= side * side {
                    pts.push([x, y]);
                }
            }
        }
        let vals: Vec<f64> = pts.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::new(2, side as u64, pts.clone(), vals.clone()).unwrap();
        let env = concave_envelope(&f).unwrap();
        let at: HashMap<[i64; 2], f64> = pts.iter().copied().zip(env.values.iter().copied()).collect();
        for (v, e) in vals.iter().zip(&env.values) {
            prop_assert!(e >= v);
        }
        for p in &pts {
            for q in &pts {
                if (p[0] + q[0]) % 2 == 0 && (p[1] + q[1]) % 2 == 0 {
                    let mid = [(p[0] + q[0]) / 2, (p[1] + q[1]) / 2];
                    if let Some(m) = at.get(&mid) {
                        prop_assert!(*m >= 0.5 * (at[p] + at[q]) - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn four_point_residual_bounds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(4i64..24);
        let pts: Vec<[i64; 2]> = (0..n).map(|x| [x, 0]).collect();
        let f = GridFunction::new(1, 4, pts.clone(), (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
        let g = GridFunction::new(1, 4, pts, (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
        for t in [qf(1, 4), qf(1, 2), qf(3, 4)] {
            let res = four_point_residual(&f, &g, &t).unwrap();
            prop_assert!(res.f_bound_holds(&t));
            prop_assert!(res.g_bound_holds(&t));
        }
    }
}

#[test]
fn concave_envelope_reproduces_concave_data() {
    let pts: Vec<[i64; 2]> = (-6..=6).flat_map(|x| (-6..=6).map(move |y| [x, y])).collect();
    let vals: Vec<f64> = pts.iter().map(|p| -((p[0] * p[0]) as f64) / 36.0 - ((p[1] - 1).abs() as f64) / 6.0).collect();
    let f = GridFunction::new(2, 6, pts, vals.clone()).unwrap();
    let env = concave_envelope(&f).unwrap();
    for (a, b) in env.values.iter().zip(&vals) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn fit_error_is_zero_for_concave_input() {
    let pts: Vec<[i64; 2]> = (-8..=8).map(|x| [x, 0]).collect();
    let vals: Vec<f64> = (-8..=8).map(|x: i64| 0.5 - ((x * x) as f64) / 128.0).collect();
    let psi = GridFunction::new(1, 8, pts, vals).unwrap();
    let fit = concavity_fit(&psi, 1.0, 0.0, 0.0, 0.25, &qf(2, 3), &LevelIndex::default()).unwrap();
    assert!(fit.l1_error <= 1e-12);
    assert!(fit.round_ok);
    assert_eq!(fit.residual4, 0.0);
}

#[test]
fn linear_fit_deviation_of_tent() {
    let pts: Vec<[i64; 2]> = (-4..=4).map(|x| [x, 0]).collect();
    let vals: Vec<f64> = (-4..=4).map(|x: i64| 1.0 - (x.abs() as f64) / 4.0).collect();
    let f = GridFunction::new(1, 4, pts, vals).unwrap();
    let l = linear_fit(&f, -4, 4).unwrap();
    assert_eq!(l.slope, 0.0);
    assert_eq!(l.sup_deviation, 1.0);
}

#[test]
fn grid_csv_round_trip() {
    let f = GridFunction::new(2, 4, vec![[0, 0], [1, 2], [-3, 1]], vec![0.5, -1.25, 2.0]).unwrap();
    let g = GridFunction::from_csv(&f.to_csv(), 4).unwrap();
    assert_eq!(f, g);
}

#[test]
fn excess_of_l_shape() {
    let e = LatticeSet::from_cells(2, 1, [[0, 0, 0], [1, 0, 0], [0, 1, 0]]).unwrap();
    assert_eq!(hull_excess(&e).unwrap(), qf(1, 2));
}
