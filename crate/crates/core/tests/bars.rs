use std::sync::Arc;

use bartool::bars::{
    cbar_to_pi01, find_uniform_bound, is_uniform_at, monotonize, pi01_to_cbar, pullback_bar,
    BarRep, CSet, DecBar, Pi01Bar, Verdict,
};
use bartool::instances::random::{nodes_up_to, random_dec_bar, random_fan, random_pi01_bar, rng};
use bartool::seqcode::FinSeq;
use bartool::trees::{gamma_star, Fan, KaryFan, Limits, Path, Spread, UniversalSpread};
use bartool::Error;
use rand::Rng;

/// Least `N` such that every node of length `N` has a prefix in the bar.
fn brute_force_bound(t: &dyn Fan, holds: &dyn Fn(&[u64]) -> bool, max: usize) -> Option<usize> {
    let mut frontier: Vec<Vec<u64>> = vec![vec![]];
    for n in 0..=max {
        if frontier.iter().all(|a| (0..=n).any(|k| holds(&a[..k]))) {
            return Some(n);
        }
        let mut next = Vec::new();
        for a in &frontier {
            for c in 0..=t.branch_bound(a) {
                if t.extends(a, c) {
                    let mut b = a.clone();
                    b.push(c);
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    None
}

#[test]
fn search_matches_the_definition() {
    let lim = Limits::default();
    let mut r = rng(20);
    for i in 0..50 {
        let depth = r.random_range(1..=6);
        let t = random_fan(&mut r, 3, depth);
        let p = random_dec_bar(&mut r, &t, depth, 0.3);
        let bar = p.bar.clone();
        let expect = brute_force_bound(&t, &|a| bar.holds(a).unwrap(), depth).unwrap();
        let got = find_uniform_bound(&t, &BarRep::Dec(p.bar), 8, 0, &lim).unwrap();
        assert_eq!(got.n, expect, "instance {i}");
        assert_eq!(got.minimality.is_some(), expect > 0);
    }
}

#[test]
fn frozen_bounds() {
    let lim = Limits::default();
    let sum2: BarRep = DecBar::new(|a| a.iter().sum::<u64>() >= 2).into();
    assert_eq!(
        find_uniform_bound(&KaryFan::binary(), &sum2, 8, 0, &lim).unwrap_err(),
        Error::NotFoundWithinBudget { max_depth: 8 }
    );
    let two_or_long: BarRep = DecBar::new(|a| a.contains(&2) || a.len() >= 4).into();
    let b = find_uniform_bound(&KaryFan::new(3), &two_or_long, 8, 0, &lim).unwrap();
    assert_eq!(b.n, 4);
    assert_eq!(b.level_sizes, vec![1, 3, 9, 27, 81]);
}

#[test]
fn monotonize_examples() {
    let exact = |s: &'static [u64]| monotonize(&DecBar::new(move |a| a == s));
    assert!(exact(&[0]).holds(&[0, 1]).unwrap());
    assert!(!exact(&[1]).holds(&[0, 1]).unwrap());
    let long = monotonize(&DecBar::new(|a| a.len() >= 2));
    for a in nodes_up_to(&KaryFan::new(3), 4) {
        assert_eq!(long.holds(&a).unwrap(), a.len() >= 2);
    }
}

#[test]
fn cset_below_a_pi01_bar() {
    let lim = Limits::default();
    let budget = 200;
    let mut r = rng(32);
    for i in 0..10 {
        let depth = r.random_range(2..=5);
        let t: Arc<dyn Fan> = Arc::new(random_fan(&mut r, 3, depth));
        let p = random_pi01_bar(&mut r, t.as_ref(), depth, 0.3, 20);
        let q = pi01_to_cbar(t.clone(), &p.bar);
        for a in nodes_up_to(t.as_ref(), 6) {
            let q_holds = q.first_failure(&a, budget).unwrap().is_none();
            let p_holds = p.bar.first_failure(&a, budget).unwrap().is_none();
            assert!(
                !q_holds || p_holds,
                "instance {i}: Q holds but P fails at {a}"
            );
        }
        let pb =
            find_uniform_bound(t.as_ref(), &BarRep::Pi01(p.bar.clone()), 8, budget, &lim).unwrap();
        let verdict = is_uniform_at(t.as_ref(), &BarRep::CSet(q), pb.n + 1, budget, &lim).unwrap();
        assert!(verdict.holds(), "instance {i}: {verdict:?}");
    }
}

#[test]
fn pi01_to_cbar_examples() {
    let t: Arc<dyn Spread> = Arc::new(KaryFan::binary());
    let q = pi01_to_cbar(t, &Pi01Bar::new(|_, a| a.len() >= 2));
    assert!(q.d(&[]).unwrap());
    for n in 0..50 {
        assert!(q.d(&[0, 1, n]).unwrap());
    }
    assert!(q.first_failure(&[0, 0, 0], 200).unwrap().is_none());
    assert!(q.first_failure(&[0], 200).unwrap().is_some());
}

#[test]
fn cbar_to_pi01_is_exact() {
    let q = CSet::new(|a| a.len() >= 2 || a.first() == Some(&1));
    let p = cbar_to_pi01(&q);
    assert!(p.family(0, &[1, 1]).unwrap());
    for a in nodes_up_to(&KaryFan::binary(), 6) {
        assert_eq!(
            q.first_failure(&a, 500).unwrap().is_none(),
            p.first_failure(&a, 500).unwrap().is_none(),
            "{a}"
        );
    }
}

#[test]
fn pullback_bars_the_universal_spread() {
    let t: Arc<dyn Spread> = Arc::new(KaryFan::binary());
    let p: BarRep = DecBar::new(|a| a.len() >= 3 || a.first() == Some(&1)).into();
    let pulled = pullback_bar(t, &p).unwrap();
    let mut r = rng(5);
    for _ in 0..100 {
        let len = r.random_range(0..8);
        let a = FinSeq::new((0..len).map(|_| r.random_range(0..10)).collect());
        let alpha = Path::finite_support(a);
        let met = (0..=8).any(|n| pulled.check(&alpha.prefix(n), 0).unwrap().is_none());
        assert!(met, "{alpha:?}");
    }
    let u: Arc<dyn Spread> = Arc::new(UniversalSpread);
    let g = gamma_star(Arc::new(KaryFan::binary()), Path::finite_support([5, 0, 7]));
    assert_eq!(g.prefix(4).unwrap(), FinSeq::from([0, 0, 0, 0]));
    assert!(matches!(
        pullback_bar(u, &BarRep::CSet(CSet::new(|_| true))),
        Err(Error::KindNotSupported { .. })
    ));
}

#[test]
fn uniformity_verdicts() {
    let lim = Limits::default();
    let t = KaryFan::binary();
    let q: BarRep = CSet::new(|a| a.len() >= 2).into();
    assert_eq!(
        is_uniform_at(&t, &q, 2, 100, &lim).unwrap(),
        Verdict::Holds { exact: false }
    );
    assert!(!is_uniform_at(&t, &q, 1, 100, &lim).unwrap().holds());
}
