use std::collections::BTreeMap;

use modprod::arith::{divisors, is_discriminant, kronecker};
use modprod::borcherds::hurwitz;
use modprod::heegner::{cm_point, genus_character, reduce_forms, Bqf};
use modprod::qseries::rational::{format_rational, parse_rational};
use modprod::repth::{lambda_trace, LambdaSign, VirtualModuleTraces};
use modprod::weil::weil_rep;
use modprod::{QSeries, Rational};
use proptest::prelude::*;
use rug::Integer;

fn series(start: i64, coeffs: Vec<i64>, prec: i64) -> QSeries {
    QSeries::from_ints(start, &coeffs, Some(prec))
}

fn sl2() -> impl Strategy<Value = [[i64; 2]; 2]> {
    (-4i64..=4, -4i64..=4, -4i64..=4).prop_filter_map("needs an SL2 completion", |(a, b, c)| {
        if a == 0 || (1 + b * c) % a != 0 {
            return None;
        }
        Some([[a, b], [c, (1 + b * c) / a]])
    })
}

fn definite_form() -> impl Strategy<Value = Bqf> {
    (1i64..12, -12i64..12, 1i64..12).prop_filter("positive definite", |&(a, b, c)| b * b < 4 * a * c).prop_map(|(a, b, c)| Bqf::new(a, b, c))
}

/// Traces of `sum_d u_d C[Z/d]`, whose Frame shape is `prod b^(u_b)`.
fn traces_from_u(order: u64, u: &[i64]) -> VirtualModuleTraces {
    let divs = divisors(order);
    let mut t = BTreeMap::new();
    for &k in &divs {
        let mut s = Integer::new();
        for (&d, &ud) in divs.iter().zip(u) {
            if k % d == 0 {
                s += ud * d as i64;
            }
        }
        t.insert(k, s);
    }
    VirtualModuleTraces::new(order, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative(a in prop::collection::vec(-9i64..9, 1..6), b in prop::collection::vec(-9i64..9, 1..6), c in prop::collection::vec(-9i64..9, 1..6), s in -2i64..2) {
        let (x, y, z) = (series(s, a, 8), series(0, b, 8), series(1, c, 8));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
    }

    #[test]
    fn inverse_is_two_sided(tail in prop::collection::vec(-9i64..9, 0..6), lead in prop::sample::select(vec![-3i64, -1, 1, 2]), s in -2i64..3) {
        let mut c = vec![lead];
        c.extend(tail);
        let x = series(s, c, 10);
        let one = x.mul(&x.inv().unwrap());
        prop_assert_eq!(one.truncate_int(8 + s.min(0)), QSeries::one().truncate_int(8 + s.min(0)));
    }

    #[test]
    fn exp_and_log_are_inverse(c in prop::collection::vec(-5i64..5, 1..6)) {
        let x = series(1, c, 9);
        let e = x.exp().unwrap();
        prop_assert_eq!(e.log().unwrap(), x.clone());
        let y = x.scale(&Rational::from(2));
        prop_assert_eq!(y.exp().unwrap(), e.mul(&e));
    }

    #[test]
    fn rescale_composes(c in prop::collection::vec(-5i64..5, 1..6), p in 1i64..4, q in 1i64..4) {
        let x = series(-1, c, 6);
        let s = Rational::from((p, q));
        let t = Rational::from((q, p));
        prop_assert_eq!(x.rescale(&s).rescale(&t), x.clone());
        prop_assert_eq!(x.rescale(&s).mul(&x.rescale(&s)), x.mul(&x).rescale(&s));
    }

    #[test]
    fn series_json_round_trip(c in prop::collection::vec(-50i64..50, 1..8), s in -3i64..3) {
        let x = series(s, c, 12).rescale(&Rational::from((1, 3)));
        prop_assert_eq!(QSeries::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let r = Rational::from((n, d));
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn reduction_is_an_invariant(q in definite_form(), g in sl2()) {
        let moved = q.act(g);
        prop_assert_eq!(moved.discriminant(), q.discriminant());
        prop_assert_eq!(moved.reduce(), q.reduce());
        prop_assert!(q.reduce().is_reduced());
        prop_assert_eq!(q.reduce().reduce(), q.reduce());
        prop_assert!(reduce_forms(q.discriminant()).unwrap().contains(&q.reduce()));
    }

    #[test]
    fn cm_points_are_equivariant(q in definite_form(), g in sl2()) {
        let p = cm_point(&q).unwrap();
        prop_assert_eq!(cm_point(&q.act(g)).unwrap(), p.act_inverse(g));
        prop_assert_eq!(p.act_inverse(g).reduce(), cm_point(&q.reduce()).unwrap());
    }

    #[test]
    fn genus_character_is_a_class_invariant(q in definite_form(), g in sl2(), d1 in prop::sample::select(vec![5i64, 8, 12, 13, 17, 21, 24])) {
        let d = q.discriminant();
        prop_assume!(d % d1 == 0 && is_discriminant(d / d1));
        let chi = genus_character(1, d1, &q).unwrap();
        prop_assert_eq!(genus_character(1, d1, &q.act(g)).unwrap(), chi);
        prop_assert!(chi.abs() <= 1);
    }

    #[test]
    fn kronecker_is_multiplicative(d in -60i64..60, a in 1i64..80, b in 1i64..80) {
        prop_assume!(is_discriminant(d) && d != 0);
        prop_assert_eq!(kronecker(d, a * b), kronecker(d, a) * kronecker(d, b));
    }

    #[test]
    fn frame_shape_round_trip(order in 1u64..13, u in prop::collection::vec(-4i64..5, 6)) {
        let t = traces_from_u(order, &u);
        let fs = t.frame_shape().unwrap();
        for (i, &b) in divisors(order).iter().enumerate() {
            prop_assert_eq!(fs.get(b), Integer::from(u[i]));
        }
        let ext = lambda_trace(&t, LambdaSign::Exterior, 12).unwrap();
        let sym = lambda_trace(&t, LambdaSign::Symmetric, 12).unwrap();
        prop_assert_eq!(ext.mul(&sym), QSeries::one().truncate_int(12));
        prop_assert_eq!(t.add(&t.neg()).unwrap().frame_shape().unwrap().to_string(), "1");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weil_relations_hold(m in prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]), n in 1u64..4) {
        let rep = weil_rep(m, n).unwrap().check_relations();
        prop_assert!(rep.passed(), "{:?}", rep.first_failure());
    }
}

#[test]
fn class_number_sums_match_hurwitz() {
    for n in (3..=400i64).filter(|n| is_discriminant(-n)) {
        let total: Rational = reduce_forms(-n)
            .unwrap()
            .iter()
            .map(|q| Rational::from((1, q.stabilizer_order() as i64)))
            .sum();
        assert_eq!(total, hurwitz(n as u64));
    }
}
