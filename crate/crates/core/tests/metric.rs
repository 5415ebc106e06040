use std::sync::Arc;

use bartool::instances::random::rng;
use bartool::metric::cantor::{sample_check, CantorFunction, CantorNets, CantorSpace};
use bartool::metric::dyadic::{grid_check, DyadicReals, IntervalNets, RealFunction};
use bartool::metric::{splice_check, uniform_modulus_near_compact, CompactSpace};
use bartool::rational::pow2;
use bartool::trees::Limits;
use bartool::FinSeq;
use num::{BigInt, BigRational};
use rand::Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn unit() -> CompactSpace<DyadicReals, IntervalNets> {
    CompactSpace::new(DyadicReals, IntervalNets::unit())
}

#[test]
fn unit_interval_moduli_pass_the_grid() {
    let lim = Limits::default();
    let cs = unit();
    // Least grid-passing depths, computed independently.
    let floor = [
        (RealFunction::Identity, [1, 3]),
        (RealFunction::Square, [3, 4]),
        (RealFunction::ClippedAbs, [1, 3]),
    ];
    for (f, least) in floor {
        let mut prev = 0;
        for (eps, least) in [q(1, 4), q(1, 10)].into_iter().zip(least) {
            let m = uniform_modulus_near_compact(&cs, Arc::new(f.clone()), &eps, 16, 200, &lim)
                .unwrap();
            assert!(
                m.n <= 16 && m.n >= least && m.n >= prev,
                "{f:?} {eps}: {}",
                m.n
            );
            assert!(m.searched <= m.n);
            prev = m.n;
            let delta = pow2(-(m.n as i64 + 1));
            let report = grid_check(&f, &q(0, 1), &q(1, 1), &q(1, 200), &delta, &eps);
            assert!(report.passed(), "{f:?} {eps}: {report:?}");
        }
    }
}

#[test]
fn constant_needs_no_precision() {
    let lim = Limits::default();
    let m = uniform_modulus_near_compact(
        &unit(),
        Arc::new(RealFunction::Constant(q(2, 3))),
        &q(1, 100),
        4,
        50,
        &lim,
    )
    .unwrap();
    assert_eq!(m.n, 0);
    assert!(m.exact);
}

#[test]
fn splices_stay_in_the_spread() {
    let cs = unit();
    let mut r = rng(3);
    for k in 0..=10u32 {
        let scale = 1i64 << 20;
        for _ in 0..100 {
            let x = q(r.random_range(0..=scale), scale);
            // `|x - y| < 2^-(k+1)`
            let reach = scale >> (k + 1);
            let y = &x + q(r.random_range(-reach + 1..reach), scale);
            let check = splice_check(&cs, &x, &y, k, 3).unwrap();
            assert!(check.passed(), "k={k} x={x} y={y}: {check:?}");
        }
    }
}

#[test]
fn cantor_binary_value() {
    let lim = Limits::default();
    let cs = CompactSpace::new(CantorSpace, CantorNets);
    for (eps, width) in [(q(1, 4), 8), (q(1, 10), 10)] {
        let m = uniform_modulus_near_compact(
            &cs,
            Arc::new(CantorFunction::BinaryValue),
            &eps,
            16,
            200,
            &lim,
        )
        .unwrap();
        let report = sample_check(&CantorFunction::BinaryValue, m.n, width, &eps);
        assert!(report.passed(), "{eps}: {report:?}");
    }
    let mut r = rng(4);
    for k in 0..=10u32 {
        for _ in 0..100 {
            let x: Vec<u64> = (0..16).map(|_| r.random_range(0..2)).collect();
            let mut y = x.clone();
            for b in y.iter_mut().skip(k as usize + 2) {
                *b = r.random_range(0..2);
            }
            let check = splice_check(&cs, &FinSeq::new(x), &FinSeq::new(y), k, 3).unwrap();
            assert!(check.passed(), "k={k}: {check:?}");
        }
    }
}

#[test]
fn binary_value_of_a_point() {
    let v = CantorFunction::BinaryValue.eval(&[1, 0, 1]);
    assert_eq!(v, BigRational::new(BigInt::from(5), BigInt::from(8)));
}
