use std::sync::Arc;

use bartool::bars::{CSet, PathModulus};
use bartool::continuity::{
    cbar_uniform_depth, coordinate, cset_fails_at_level, fn_from_cbar, uniform_modulus_near_fan,
    uniform_modulus_via_embedding, Lambda, NbhdFn, RealLine, RealPoint,
};
use bartool::instances::random::{random_fan, rng};
use bartool::rational::pow2;
use bartool::trees::{level, Fan, KaryFan, Limits};
use num::{BigInt, BigRational, Signed};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `x` given by approximations off by `wobble` times the allowed error, alternating in sign.
fn wobbly(x: BigRational, wobble: i64) -> RealPoint {
    RealPoint::approximated(move |k| {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        Ok(&x + pow2(-(k as i64)) * q(sign * wobble, 1000))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lambda_dichotomy(
        x in -1000i64..1000,
        d in -4000i64..4000,
        wx in 0i64..1000,
        wy in 0i64..1000,
    ) {
        let (a, b) = (q(x, 1000), q(x, 1000) + q(d, 10_000));
        let gap = (&a - &b).abs();
        for eps in [q(1, 1), q(1, 10), q(1, 100)] {
            let l = Lambda::new(&eps).unwrap();
            let close = l.compare(&RealLine, &wobbly(a.clone(), wx), &wobbly(b.clone(), wy)).unwrap();
            if close {
                prop_assert!(gap < &eps / BigRational::from_integer(BigInt::from(3)));
            } else {
                prop_assert!(gap > &eps / BigRational::from_integer(BigInt::from(6)));
            }
        }
    }
}

#[test]
fn cbar_functions_recover_their_cset() {
    let lim = Limits::default();
    let fans: Vec<Arc<dyn Fan>> = vec![Arc::new(KaryFan::binary()), Arc::new(KaryFan::new(3))];
    for t in &fans {
        for k in 1..=5usize {
            let qset = CSet::new(move |a| a.len() >= k);
            let f = fn_from_cbar(&qset, PathModulus::constant(k));
            let c = uniform_modulus_near_fan(t.as_ref(), &f, 10, 20, &lim).unwrap();
            assert_eq!(c.n, k, "{} k={k}", t.label());
            let m = cbar_uniform_depth(t.as_ref(), &f, c.n, &lim).unwrap();
            assert_eq!(m, k + 1);
            assert_eq!(
                cset_fails_at_level(t.as_ref(), &qset, m, 500, &lim).unwrap(),
                None
            );
        }
    }
}

#[test]
fn coordinate_moduli_on_random_fans() {
    let lim = Limits::default();
    let mut r = rng(7);
    for i in 0..10 {
        let t: Arc<dyn Fan> = Arc::new(random_fan(&mut r, 2, 4));
        for k in 0..3 {
            let f = coordinate(k);
            let c = uniform_modulus_near_fan(t.as_ref(), &f, 10, 20, &lim).unwrap();
            // Least depth at which all level nodes commit and the bar is met.
            assert!(c.n <= k + 1, "instance {i} k={k}");
            for a in level(t.as_ref(), c.n, &lim).unwrap() {
                assert!(f.committed_prefix(&a).unwrap().is_some());
            }
            let via = uniform_modulus_via_embedding(t.clone(), &f, 24, 20, &lim).unwrap();
            assert!(via.n >= c.n, "instance {i} k={k}");
        }
    }
}

#[test]
fn constant_functions_need_no_entries() {
    let lim = Limits::default();
    let c = uniform_modulus_near_fan(&KaryFan::new(4), &NbhdFn::constant(2), 5, 20, &lim).unwrap();
    assert_eq!((c.n, c.minimality), (0, None));
}
