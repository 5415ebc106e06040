//! Cantor space with `d(α, β) = inf{2^-n | ᾱn = β̄n}`, presented by the
//! finite-support points: `pᵢ` has the binary digits of `i` (least
//! significant first) followed by zeros. The whole space is compact, netted
//! by `I(k) = {0, …, 2^(k+1) - 1}`.

use num::{BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{CompactNets, DenseFn, MetricPresentation};
use crate::error::{Error, Result};
use crate::rational::{pow2, precision_below};
use crate::seqcode::FinSeq;

fn bit(i: u64, t: usize) -> u64 {
    if t < 64 {
        (i >> t) & 1
    } else {
        0
    }
}

fn low_mask(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `d` between two finite-support points, each given by its support.
fn seq_dist(x: &[u64], y: &[u64]) -> BigRational {
    let n = x.len().max(y.len());
    (0..n)
        .find(|&t| x.get(t).copied().unwrap_or(0) != y.get(t).copied().unwrap_or(0))
        .map_or_else(
            || BigRational::from_integer(0.into()),
            |t| pow2(-(t as i64)),
        )
}

pub fn cantor_point(i: u64) -> FinSeq {
    let len = 64 - i.leading_zeros() as usize;
    FinSeq::new((0..len).map(|t| bit(i, t)).collect())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CantorSpace;

impl MetricPresentation for CantorSpace {
    /// A finite-support binary sequence.
    type Point = FinSeq;

    fn alpha_q(&self, i: u64, j: u64, _k: u32) -> BigRational {
        if i == j {
            BigRational::from_integer(0.into())
        } else {
            pow2(-((i ^ j).trailing_zeros() as i64))
        }
    }

    fn step_ok(&self, i: u64, j: u64, k: u32) -> bool {
        (i ^ j) & low_mask(k) == 0
    }

    fn least_step(&self, i: u64, k: u32) -> Result<u64> {
        Ok(i & low_mask(k))
    }

    fn dist_upper(&self, x: &FinSeq, i: u64, _k: u32) -> Result<BigRational> {
        Ok(seq_dist(x, &cantor_point(i)))
    }

    fn point_dist_upper(&self, x: &FinSeq, y: &FinSeq, _k: u32) -> Result<BigRational> {
        Ok(seq_dist(x, y))
    }

    fn approximating_index(&self, y: &FinSeq, n: u32) -> Result<u64> {
        let len = n as usize + 2;
        if len > 64 {
            return Err(Error::Precision(format!(
                "{len} binary digits do not fit an index"
            )));
        }
        if y.iter().any(|&b| b > 1) {
            return Err(Error::validation("not a binary sequence", y));
        }
        Ok((0..len).map(|t| y.get(t).copied().unwrap_or(0) << t).sum())
    }

    fn label(&self) -> String {
        "cantor".into()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CantorNets;

impl CompactNets<CantorSpace> for CantorNets {
    fn net(&self, _space: &CantorSpace, k: u32) -> Vec<u64> {
        (0..=low_mask(k + 1)).collect()
    }

    fn contains(&self, _space: &CantorSpace, k: u32, i: u64) -> bool {
        i <= low_mask(k + 1)
    }

    fn steps_into(&self, _space: &CantorSpace, i: u64, k: u32) -> Vec<u64> {
        let base = i & low_mask(k);
        (0..8u64).map(|t| base + (t << k)).collect()
    }

    fn label(&self) -> String {
        "all".into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CantorFunction {
    /// `α ↦ Σ α(t)·2^-(t+1)`
    BinaryValue,
    Constant(BigRational),
}

impl CantorFunction {
    pub fn eval(&self, x: &[u64]) -> BigRational {
        match self {
            CantorFunction::BinaryValue => x
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(|(t, _)| pow2(-(t as i64 + 1)))
                .sum(),
            CantorFunction::Constant(c) => c.clone(),
        }
    }
}

impl DenseFn<CantorSpace> for CantorFunction {
    fn value(&self, _space: &CantorSpace, i: u64) -> Result<BigRational> {
        Ok(self.eval(&cantor_point(i)))
    }

    fn modulus(&self, _space: &CantorSpace, _center: u64, _radius_exp: i64, k: u32) -> Result<u32> {
        Ok(match self {
            // d < 2^-m means the first m+1 digits agree, moving the value by at most 2^-(m+1).
            CantorFunction::BinaryValue => k,
            CantorFunction::Constant(_) => 0,
        })
    }

    fn oscillation(
        &self,
        _space: &CantorSpace,
        _center: u64,
        radius: &BigRational,
    ) -> Result<Option<BigRational>> {
        // Points closer than `radius` share their first `n` digits, `n` least with `2^-n < radius`.
        Ok(Some(match self {
            CantorFunction::BinaryValue => match precision_below(radius) {
                Ok(n) => pow2(-(n as i64)),
                Err(_) => BigRational::zero(),
            },
            CantorFunction::Constant(_) => BigRational::zero(),
        }))
    }

    fn global_oscillation(&self) -> Option<BigRational> {
        Some(match self {
            CantorFunction::BinaryValue => BigRational::one(),
            CantorFunction::Constant(_) => BigRational::zero(),
        })
    }

    fn label(&self) -> String {
        match self {
            CantorFunction::BinaryValue => "binary_value".into(),
            CantorFunction::Constant(c) => format!("constant:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub points: usize,
    pub pairs: usize,
    pub violations: usize,
    pub first_violation: Option<(FinSeq, FinSeq)>,
}

impl SampleReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `d(x, u) < 2^-(n+1) ⇒ |f(x) - f(u)| < ε` for `x` ranging over the
/// points with support below `width` digits, and `u` agreeing with `x` on the
/// first `n + 2` digits and arbitrary on the next four.
pub fn sample_check(
    f: &CantorFunction,
    n: usize,
    width: u32,
    epsilon: &BigRational,
) -> SampleReport {
    let keep = n + 2;
    let results: Vec<(usize, Option<(FinSeq, FinSeq)>)> = (0..1u64 << width)
        .into_par_iter()
        .map(|i| {
            let mut x = cantor_point(i).into_vec();
            x.resize(keep.max(width as usize), 0);
            let fx = f.eval(&x);
            let mut first = None;
            let mut pairs = 0;
            for tail in 0..16u64 {
                let mut u = x[..keep].to_vec();
                u.extend((0..4).map(|t| bit(tail, t)));
                pairs += 1;
                if (&fx - f.eval(&u)).abs() >= *epsilon && first.is_none() {
                    first = Some((FinSeq::new(x.clone()), FinSeq::new(u)));
                }
            }
            (pairs, first)
        })
        .collect();
    let violations: Vec<_> = results.iter().filter_map(|(_, v)| v.clone()).collect();
    SampleReport {
        points: results.len(),
        pairs: results.iter().map(|(p, _)| p).sum(),
        violations: violations.len(),
        first_violation: violations.into_iter().next(),
    }
}
