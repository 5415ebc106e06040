//! The real line presented by an enumeration of the dyadic rationals, with
//! compact intervals `[lo, hi]` netted at dyadic resolution.
//!
//! `pₙ = unzig(z) / 2^e` where `(z, e)` unpairs `n` and `unzig` lists the
//! integers as `0, -1, 1, -2, 2, …`. Distances are exact.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{CompactNets, DenseFn, MetricPresentation};
use crate::error::{Error, Result};
use crate::rational::pow2;
use crate::seqcode::{cantor_pair_small, cantor_unpair};

pub fn zig(v: i128) -> Option<u64> {
    let z = if v >= 0 {
        v.checked_mul(2)?
    } else {
        v.checked_mul(-2)? - 1
    };
    u64::try_from(z).ok()
}

pub fn unzig(z: u64) -> i128 {
    let z = z as i128;
    if z % 2 == 0 {
        z / 2
    } else {
        -(z + 1) / 2
    }
}

/// The index of `v / 2^e` in the enumeration.
pub fn dyadic_index(v: i128, e: u32) -> Result<u64> {
    zig(v)
        .and_then(|z| cantor_pair_small(z, e as u64))
        .ok_or_else(|| Error::Precision(format!("index of {v}/2^{e} does not fit in 64 bits")))
}

/// `(v, e)` with `pᵢ = v / 2^e`.
pub fn dyadic_parts(i: u64) -> (i128, u64) {
    let (z, e) = cantor_unpair(i);
    (unzig(z), e)
}

pub fn dyadic_value(i: u64) -> BigRational {
    let (v, e) = dyadic_parts(i);
    BigRational::new(BigInt::from(v), BigInt::one() << e)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DyadicReals;

impl DyadicReals {
    fn step_ok_fast(&self, i: u64, j: u64, k: u32) -> Option<bool> {
        let (vi, ei) = dyadic_parts(i);
        let (vj, ej) = dyadic_parts(j);
        let t = ei.max(ej).max(k as u64);
        if t > 60 || vi.abs() >= 1 << 62 || vj.abs() >= 1 << 62 {
            return None;
        }
        let a = vi << (t - ei);
        let b = vj << (t - ej);
        Some((a - b).abs() < 1i128 << (t + 1 - k as u64))
    }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl MetricPresentation for DyadicReals {
    type Point = BigRational;

    fn alpha_q(&self, i: u64, j: u64, _k: u32) -> BigRational {
        (dyadic_value(i) - dyadic_value(j)).abs()
    }

    fn step_ok(&self, i: u64, j: u64, k: u32) -> bool {
        self.step_ok_fast(i, j, k)
            .unwrap_or_else(|| self.alpha_q(i, j, k + 1) < pow2(1 - k as i64))
    }

    fn least_step(&self, i: u64, k: u32) -> Result<u64> {
        let (v, s) = dyadic_parts(i);
        let v = BigInt::from(v);
        // |p| < 2^(1-k): zero is a step, and index 0 is the least there is.
        if (v.abs() << k as usize) < (BigInt::one() << (s as usize + 1)) {
            return Ok(0);
        }
        let mut best: Option<u64> = None;
        for e in 0u64.. {
            let t = e.max(s).max(k as u64) as usize;
            let c = &v << (t - s as usize);
            let r = BigInt::one() << (t + 1 - k as usize);
            let step = BigInt::one() << (t - e as usize);
            // Below every later exponent: zig(w) >= 2|w| - 1 and |w| >= 2^e(|p| - r).
            let reach = ceil_div(&(c.abs() - &r), &step);
            let zlb = (reach * 2u32 - 1u32).to_u64().unwrap_or(u64::MAX);
            let lower = cantor_pair_small(zlb, e).unwrap_or(u64::MAX);
            if best.is_some_and(|b| lower > b) {
                break;
            }
            let lo = floor_div(&(&c - &r), &step) + 1u32;
            let hi = ceil_div(&(&c + &r), &step) - 1u32;
            if lo > hi {
                continue;
            }
            let w = if lo.is_positive() {
                lo
            } else if hi.is_negative() {
                hi
            } else {
                BigInt::zero()
            };
            let w = w
                .to_i128()
                .ok_or_else(|| Error::Precision("dyadic numerator overflow".into()))?;
            let idx = dyadic_index(w, e as u32)?;
            best = Some(best.map_or(idx, |b| b.min(idx)));
        }
        Ok(best.expect("loop exits only after a candidate"))
    }

    fn dist_upper(&self, x: &BigRational, i: u64, _k: u32) -> Result<BigRational> {
        Ok((x - dyadic_value(i)).abs())
    }

    fn point_dist_upper(&self, x: &BigRational, y: &BigRational, _k: u32) -> Result<BigRational> {
        Ok((x - y).abs())
    }

    fn approximating_index(&self, y: &BigRational, n: u32) -> Result<u64> {
        let e = n + 2;
        let scaled = y * pow2(e as i64);
        let v = scaled
            .round()
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::Precision(format!("{y} is too large")))?;
        dyadic_index(v, e)
    }

    fn label(&self) -> String {
        "reals".into()
    }
}

/// `I(k) = {v / 2^k | lo·2^k <= v <= hi·2^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalNets {
    lo: i64,
    hi: i64,
}

impl IntervalNets {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Schema(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(IntervalNets { lo, hi })
    }

    pub fn unit() -> Self {
        IntervalNets { lo: 0, hi: 1 }
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    fn range(&self, k: u32) -> (i128, i128) {
        ((self.lo as i128) << k, (self.hi as i128) << k)
    }
}

impl CompactNets<DyadicReals> for IntervalNets {
    fn net(&self, _space: &DyadicReals, k: u32) -> Vec<u64> {
        let (a, b) = self.range(k);
        (a..=b)
            .map(|v| dyadic_index(v, k).expect("net index fits"))
            .collect()
    }

    fn contains(&self, _space: &DyadicReals, k: u32, i: u64) -> bool {
        let (v, e) = dyadic_parts(i);
        let (a, b) = self.range(k);
        e == k as u64 && a <= v && v <= b
    }

    fn steps_into(&self, space: &DyadicReals, i: u64, k: u32) -> Vec<u64> {
        // A step moves less than 2^(1-k) = 8 units at resolution 2^-(k+2).
        let scaled = dyadic_value(i) * pow2(k as i64 + 2);
        let centre = scaled.floor().to_integer().to_i128().unwrap_or(0);
        let (a, b) = self.range(k + 2);
        let mut v: Vec<u64> = (centre - 8..=centre + 9)
            .filter(|v| a <= *v && *v <= b)
            .map(|v| dyadic_index(v, k + 2).expect("net index fits"))
            .filter(|&j| space.step_ok(i, j, k))
            .collect();
        v.sort_unstable();
        v
    }

    fn label(&self) -> String {
        format!("[{},{}]", self.lo, self.hi)
    }
}

/// Functions on the reals with exact rational values at rational points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealFunction {
    Identity,
    Square,
    /// `min(|x - 1/2|, 1/4)`
    ClippedAbs,
    Constant(BigRational),
}

impl RealFunction {
    pub fn eval(&self, x: &BigRational) -> BigRational {
        match self {
            RealFunction::Identity => x.clone(),
            RealFunction::Square => x * x,
            RealFunction::ClippedAbs => {
                let d = (x - BigRational::new(1.into(), 2.into())).abs();
                d.min(BigRational::new(1.into(), 4.into()))
            }
            RealFunction::Constant(c) => c.clone(),
        }
    }
}

/// The least `t >= 0` with `b <= 2^t`.
fn ceil_log2(b: &BigRational) -> u32 {
    let mut t = 0;
    while *b > pow2(t as i64) {
        t += 1;
    }
    t
}

impl DenseFn<DyadicReals> for RealFunction {
    fn value(&self, _space: &DyadicReals, i: u64) -> Result<BigRational> {
        Ok(self.eval(&dyadic_value(i)))
    }

    fn modulus(&self, _space: &DyadicReals, center: u64, radius_exp: i64, k: u32) -> Result<u32> {
        Ok(match self {
            RealFunction::Identity | RealFunction::ClippedAbs => k,
            RealFunction::Constant(_) => 0,
            // |x² - y²| = |x - y|·|x + y| and |x + y| <= 2(|c| + r) on the ball.
            RealFunction::Square => {
                let bound = (dyadic_value(center).abs() + pow2(radius_exp))
                    * BigRational::from_integer(2.into());
                k + ceil_log2(&bound)
            }
        })
    }

    fn oscillation(
        &self,
        _space: &DyadicReals,
        center: u64,
        radius: &BigRational,
    ) -> Result<Option<BigRational>> {
        let two = BigRational::from_integer(2.into());
        let width = radius * &two;
        Ok(Some(match self {
            RealFunction::Identity => width,
            RealFunction::ClippedAbs => width.min(BigRational::new(1.into(), 4.into())),
            RealFunction::Constant(_) => BigRational::zero(),
            RealFunction::Square => width * (dyadic_value(center).abs() + radius) * two,
        }))
    }

    fn global_oscillation(&self) -> Option<BigRational> {
        match self {
            RealFunction::ClippedAbs => Some(BigRational::new(1.into(), 4.into())),
            RealFunction::Constant(_) => Some(BigRational::zero()),
            _ => None,
        }
    }

    fn label(&self) -> String {
        match self {
            RealFunction::Identity => "identity".into(),
            RealFunction::Square => "square".into(),
            RealFunction::ClippedAbs => "clipped_abs".into(),
            RealFunction::Constant(c) => format!("constant:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridReport {
    pub points: usize,
    pub pairs: usize,
    pub violations: usize,
    /// `(x, u)` of the first violation in grid order.
    pub first_violation: Option<(String, String)>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `|x - u| < δ ⇒ |f(x) - f(u)| < ε` for `x` on the grid
/// `lo, lo + step, …, hi` and `u` among the grid points within `δ` of `x`
/// together with `x ± δ/2` and `x ± δ(1 - 2^-10)`.
pub fn grid_check(
    f: &RealFunction,
    lo: &BigRational,
    hi: &BigRational,
    step: &BigRational,
    delta: &BigRational,
    epsilon: &BigRational,
) -> GridReport {
    let count = ((hi - lo) / step)
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0)
        + 1;
    let near = pow2(-10);
    let half = BigRational::new(1.into(), 2.into());
    let probes = [
        delta * &half,
        -(delta * &half),
        delta * (BigRational::one() - &near),
        -(delta * (BigRational::one() - &near)),
    ];
    let per_point: Vec<(usize, Option<(String, String)>)> = (0..count)
        .into_par_iter()
        .map(|n| {
            let x = lo + step * BigRational::from_integer(n.into());
            let fx = f.eval(&x);
            let mut us: Vec<BigRational> = probes.iter().map(|p| &x + p).collect();
            let mut t = 1i64;
            while step * BigRational::from_integer(t.into()) < *delta {
                us.push(&x + step * BigRational::from_integer(t.into()));
                us.push(&x - step * BigRational::from_integer(t.into()));
                t += 1;
            }
            let mut first = None;
            for u in &us {
                debug_assert!((&x - u).abs() < *delta);
                if (&fx - f.eval(u)).abs() >= *epsilon && first.is_none() {
                    first = Some((x.to_string(), u.to_string()));
                }
            }
            (us.len(), first)
        })
        .collect();
    let pairs = per_point.iter().map(|(n, _)| n).sum();
    let violations: Vec<&(String, String)> =
        per_point.iter().filter_map(|(_, v)| v.as_ref()).collect();
    GridReport {
        points: count,
        pairs,
        violations: violations.len(),
        first_violation: violations.first().map(|v| (*v).clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{point_to_path, validate_nets, CompactSpace};
    use crate::trees::{in_spread, Fan, Path, Spread};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn unit() -> CompactSpace<DyadicReals, IntervalNets> {
        CompactSpace::new(DyadicReals, IntervalNets::unit())
    }

    #[test]
    fn enumeration_round_trips() {
        for v in -40..=40i128 {
            for e in 0..6u32 {
                let i = dyadic_index(v, e).unwrap();
                assert_eq!(dyadic_parts(i), (v, e as u64));
            }
        }
        assert_eq!(dyadic_value(0), q(0, 1));
        assert_eq!(dyadic_value(1), q(-1, 1));
    }

    #[test]
    fn least_step_matches_scan() {
        let x = DyadicReals;
        for i in 0..400u64 {
            for k in 0..5u32 {
                let fast = x.least_step(i, k).unwrap();
                let slow = (0..)
                    .find(|&j| x.alpha_q(i, j, k + 1) < pow2(1 - k as i64))
                    .unwrap();
                assert_eq!(fast, slow, "i={i} k={k}");
            }
        }
    }

    #[test]
    fn step_ok_fast_path_agrees() {
        let x = DyadicReals;
        for i in 0..200u64 {
            for j in 0..200u64 {
                for k in 0..4 {
                    let exact = x.alpha_q(i, j, k + 1) < pow2(1 - k as i64);
                    assert_eq!(x.step_ok(i, j, k), exact);
                }
            }
        }
    }

    #[test]
    fn spread_examples() {
        let cs = unit();
        let t1 = cs.t1();
        let mut root = t1.children(&[]);
        root.sort_unstable();
        let mut net = cs.nets.net(&cs.space, 1);
        net.sort_unstable();
        assert_eq!(root, net);
        let t0 = cs.t0();
        for i in 0..50 {
            assert!(t0.member(&[i]));
        }
        let zero = dyadic_index(0, 0).unwrap();
        let ten = dyadic_index(10, 0).unwrap();
        assert!(!t0.member(&[zero, ten]));
    }

    #[test]
    fn children_match_filter() {
        let cs = unit();
        let t1 = cs.t1();
        for k in 0..4u32 {
            for i in cs.nets.net(&cs.space, k + 1) {
                let mut expect: Vec<u64> = cs
                    .nets
                    .net(&cs.space, k + 2)
                    .into_iter()
                    .filter(|&j| cs.space.step_ok(i, j, k))
                    .collect();
                expect.sort_unstable();
                assert_eq!(cs.nets.steps_into(&cs.space, i, k), expect);
            }
        }
        assert!(t1.member(&[]));
    }

    #[test]
    fn point_to_path_examples() {
        let cs = unit();
        let g = point_to_path(&cs, &q(0, 1), 8).unwrap();
        for (k, &i) in g.iter().enumerate() {
            assert_eq!(dyadic_value(i), q(0, 1), "depth {k}");
        }
        let g = point_to_path(&cs, &q(1, 3), 10).unwrap();
        assert!(in_spread(&cs.t1(), &Path::finite_support(g.clone()), 10));
        for (k, &i) in g.iter().enumerate() {
            assert!((dyadic_value(i) - q(1, 3)).abs() < pow2(-(k as i64 + 1)));
        }
        assert_eq!(
            point_to_path(&cs, &q(2, 1), 3),
            Err(Error::NoNetCandidate { level: 1 })
        );
    }

    #[test]
    fn nets_validate() {
        validate_nets(&unit(), 5).unwrap();
        validate_nets(
            &CompactSpace::new(DyadicReals, IntervalNets::new(-2, 3).unwrap()),
            3,
        )
        .unwrap();
    }

    #[test]
    fn grid_check_detects_violations() {
        let f = RealFunction::Identity;
        let ok = grid_check(&f, &q(0, 1), &q(1, 1), &q(1, 20), &q(1, 8), &q(1, 4));
        assert!(ok.passed());
        let bad = grid_check(&f, &q(0, 1), &q(1, 1), &q(1, 20), &q(1, 2), &q(1, 4));
        assert!(!bad.passed());
    }

    #[test]
    fn square_modulus_is_sound_on_samples() {
        let f = RealFunction::Square;
        let x = DyadicReals;
        for v in -8..=8 {
            let c = dyadic_index(v, 2).unwrap();
            let m = f.modulus(&x, c, 0, 6).unwrap();
            let cv = dyadic_value(c);
            let h = pow2(-(m as i64)) * q(99, 100);
            for s in [-1i64, 1] {
                let a = &cv + q(s, 2);
                let b = &a + &h;
                assert!((f.eval(&a) - f.eval(&b)).abs() < pow2(-6));
            }
        }
    }
}
