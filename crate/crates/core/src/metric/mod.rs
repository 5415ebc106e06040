//! Presented complete separable metric spaces and compact subsets, the spread
//! `T₀` and fan `T₁` representing them, and moduli of uniform continuity
//! near a compact subset.
//!
//! A presentation gives a dense sequence `(pₙ)` through indices only, with
//! rational approximations `α_Q(i, j, k)` of `d(pᵢ, pⱼ)` to within `2^-k`.
//! `γ ∈ T₀` iff `α_Q(γₖ, γₖ₊₁, k+1) < 2^(-k+1)` for all `k`; `T₁` also asks
//! `γₖ ∈ I(k+1)` where `I(k)` indexes a `2^-k`-net of the compact subset.

pub mod cantor;
pub mod dyadic;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::bars::{Refutation, Witness};
use crate::continuity::{
    lambda_predicate, values_within_third, Lambda, PathFunction, RealLine, RealPoint,
};
use crate::error::{Error, Result};
use crate::rational::pow2;
use crate::seqcode::{extensions_up_to, FinSeq};
use crate::trees::{Fan, Limits, Path, Spread};

pub trait MetricPresentation: Send + Sync + 'static {
    /// Points of the space, given by enough data to approximate distances to `pᵢ`.
    type Point: Clone + fmt::Debug + Send + Sync;

    /// `q` with `|d(pᵢ, pⱼ) - q| < 2^-k`.
    fn alpha_q(&self, i: u64, j: u64, k: u32) -> BigRational;

    /// The `T₀` condition between `γₖ = i` and `γₖ₊₁ = j`.
    fn step_ok(&self, i: u64, j: u64, k: u32) -> bool {
        self.alpha_q(i, j, k + 1) < pow2(1 - k as i64)
    }

    /// The least `j` with `step_ok(i, j, k)`.
    fn least_step(&self, i: u64, k: u32) -> Result<u64>;

    /// An upper bound on `d(x, pᵢ)` exceeding it by at most `2^-k`.
    fn dist_upper(&self, x: &Self::Point, i: u64, k: u32) -> Result<BigRational>;

    /// An upper bound on `d(x, y)` exceeding it by at most `2^-k`.
    fn point_dist_upper(&self, x: &Self::Point, y: &Self::Point, k: u32) -> Result<BigRational>;

    /// Some `i` with `d(y, pᵢ) < 2^-(n+1)`.
    fn approximating_index(&self, y: &Self::Point, n: u32) -> Result<u64>;

    fn label(&self) -> String;
}

/// Finite index sets `I(k)` whose points form `2^-k`-nets of a compact subset.
pub trait CompactNets<X: MetricPresentation>: Send + Sync + 'static {
    /// `I(k)` in a fixed order.
    fn net(&self, space: &X, k: u32) -> Vec<u64>;

    fn contains(&self, space: &X, k: u32, i: u64) -> bool;

    /// The `j ∈ I(k+2)` with `step_ok(i, j, k)`, ascending.
    fn steps_into(&self, space: &X, i: u64, k: u32) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .net(space, k + 2)
            .into_iter()
            .filter(|&j| space.step_ok(i, j, k))
            .collect();
        v.sort_unstable();
        v
    }

    fn label(&self) -> String;
}

/// A presentation together with nets of a compact subset.
pub struct CompactSpace<X, K> {
    pub space: Arc<X>,
    pub nets: Arc<K>,
}

impl<X, K> Clone for CompactSpace<X, K> {
    fn clone(&self) -> Self {
        CompactSpace {
            space: self.space.clone(),
            nets: self.nets.clone(),
        }
    }
}

impl<X: MetricPresentation, K: CompactNets<X>> CompactSpace<X, K> {
    pub fn new(space: X, nets: K) -> Self {
        CompactSpace {
            space: Arc::new(space),
            nets: Arc::new(nets),
        }
    }

    pub fn t0(&self) -> T0Spread<X> {
        T0Spread {
            space: self.space.clone(),
        }
    }

    pub fn t1(&self) -> T1Fan<X, K> {
        T1Fan {
            space: self.space.clone(),
            nets: self.nets.clone(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.space.label(), self.nets.label())
    }
}

/// The spread `T₀`.
pub struct T0Spread<X> {
    space: Arc<X>,
}

impl<X: MetricPresentation> Spread for T0Spread<X> {
    fn member(&self, a: &[u64]) -> bool {
        a.windows(2)
            .enumerate()
            .all(|(k, w)| self.space.step_ok(w[0], w[1], k as u32))
    }

    fn extends(&self, parent: &[u64], n: u64) -> bool {
        match parent.last() {
            None => true,
            Some(&i) => self.space.step_ok(i, n, parent.len() as u32 - 1),
        }
    }

    fn successor_hint(&self, a: &[u64]) -> u64 {
        a.last().copied().unwrap_or(0)
    }

    fn least_child(&self, parent: &[u64], _cap: u64) -> Result<u64> {
        match parent.last() {
            None => Ok(0),
            Some(&i) => self.space.least_step(i, parent.len() as u32 - 1),
        }
    }

    fn label(&self) -> String {
        format!("t0:{}", self.space.label())
    }
}

/// The fan `T₁`.
pub struct T1Fan<X, K> {
    space: Arc<X>,
    nets: Arc<K>,
}

impl<X: MetricPresentation, K: CompactNets<X>> Spread for T1Fan<X, K> {
    fn member(&self, a: &[u64]) -> bool {
        a.iter()
            .enumerate()
            .all(|(k, &i)| self.nets.contains(&self.space, k as u32 + 1, i))
            && a.windows(2)
                .enumerate()
                .all(|(k, w)| self.space.step_ok(w[0], w[1], k as u32))
    }

    fn extends(&self, parent: &[u64], n: u64) -> bool {
        let k = parent.len() as u32;
        self.nets.contains(&self.space, k + 1, n)
            && parent
                .last()
                .is_none_or(|&i| self.space.step_ok(i, n, k - 1))
    }

    fn successor_hint(&self, a: &[u64]) -> u64 {
        self.children(a).first().copied().unwrap_or(0)
    }

    fn least_child(&self, parent: &[u64], _cap: u64) -> Result<u64> {
        self.children(parent)
            .first()
            .copied()
            .ok_or_else(|| Error::SearchCapExceeded {
                node: FinSeq::from(parent),
                cap: 0,
            })
    }

    fn as_fan(&self) -> Option<&dyn Fan> {
        Some(self)
    }

    fn label(&self) -> String {
        format!("t1:{}/{}", self.space.label(), self.nets.label())
    }
}

impl<X: MetricPresentation, K: CompactNets<X>> Fan for T1Fan<X, K> {
    fn branch_bound(&self, a: &[u64]) -> u64 {
        self.nets
            .net(&self.space, a.len() as u32 + 1)
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    fn children(&self, a: &[u64]) -> Vec<u64> {
        match a.last() {
            None => {
                let mut v = self.nets.net(&self.space, 1);
                v.sort_unstable();
                v
            }
            Some(&i) => self.nets.steps_into(&self.space, i, a.len() as u32 - 1),
        }
    }
}

/// A path `γ ∈ T₁` with `d(x, p_γₖ) < 2^-(k+1)` for `k < depth`.
pub fn point_to_path<X: MetricPresentation, K: CompactNets<X>>(
    cs: &CompactSpace<X, K>,
    x: &X::Point,
    depth: usize,
) -> Result<FinSeq> {
    let mut gamma = Vec::with_capacity(depth);
    for k in 0..depth as u32 {
        let bound = pow2(-(k as i64 + 1));
        let mut found = None;
        for j in cs.nets.net(&cs.space, k + 1) {
            if cs.space.dist_upper(x, j, k + 4)? < bound {
                found = Some(j);
                break;
            }
        }
        gamma.push(found.ok_or(Error::NoNetCandidate { level: k + 1 })?);
    }
    Ok(FinSeq::new(gamma))
}

/// `Γ*_{T₀}` of `s * 0^ω`, up to and including position `upto`.
fn repair_walk<X: MetricPresentation>(space: &X, s: &[u64], upto: usize) -> Result<Vec<u64>> {
    let mut gamma: Vec<u64> = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        let want = s.get(n).copied().unwrap_or(0);
        let next = match gamma.last() {
            None => want,
            Some(&i) => {
                let k = n as u32 - 1;
                if space.step_ok(i, want, k) {
                    want
                } else {
                    space.least_step(i, k)?
                }
            }
        };
        gamma.push(next);
    }
    Ok(gamma)
}

/// The index `γ'ₖ` for `γ' = Γ*_{T₀}(α)`; `p_γ'ₖ` is within `2^(-k+3)` of `Φ_{T₀,X}(α)`.
pub fn phi_t0x<X: MetricPresentation>(space: &X, alpha: &Path, k: usize) -> Result<u64> {
    let s = alpha.prefix(k + 1);
    Ok(repair_walk(space, &s, k)?[k])
}

/// A function on the dense points with local moduli of continuity.
pub trait DenseFn<X: MetricPresentation>: Send + Sync {
    /// `f(pᵢ)`.
    fn value(&self, space: &X, i: u64) -> Result<BigRational>;

    /// Some `m` such that `x, y` within `2^radius_exp` of `p_center` and
    /// `d(x, y) < 2^-m` give `|f(x) - f(y)| < 2^-k`.
    fn modulus(&self, space: &X, center: u64, radius_exp: i64, k: u32) -> Result<u32>;

    /// An upper bound on `|f(x) - f(y)|` for `x, y` closer than `radius` to `p_center`.
    fn oscillation(
        &self,
        _space: &X,
        _center: u64,
        _radius: &BigRational,
    ) -> Result<Option<BigRational>> {
        Ok(None)
    }

    /// An upper bound on `|f(x) - f(y)|` over the whole space.
    fn global_oscillation(&self) -> Option<BigRational> {
        None
    }

    fn label(&self) -> String;
}

/// `g = f ∘ Φ_{T₀,X}`, valued in the reals.
pub struct Composite<X, F: ?Sized> {
    space: Arc<X>,
    f: Arc<F>,
}

impl<X, F: ?Sized> Composite<X, F> {
    pub fn new(space: Arc<X>, f: Arc<F>) -> Self {
        Composite { space, f }
    }
}

impl<X: MetricPresentation, F: DenseFn<X> + ?Sized + 'static> Composite<X, F> {
    /// `q` with `|g(s * 0^ω) - q| < 2^-k`.
    ///
    /// The limit point lies within `5·2^-c < 2^(3-c)` of `p_γc`, `c = |s| - 1`.
    /// With `m` the modulus of `f` on that ball, `p_γj` for `j >= m + 3` is
    /// within `2^-m` of the limit.
    pub fn approximate(&self, s: &[u64], k: u32) -> Result<BigRational> {
        let c = s.len().max(1) - 1;
        let head = repair_walk(self.space.as_ref(), s, c)?;
        let m = self.f.modulus(&self.space, head[c], 3 - c as i64, k)?;
        let j = c.max(m as usize + 3);
        let gamma = if j == c {
            head
        } else {
            repair_walk(self.space.as_ref(), s, j)?
        };
        self.f.value(&self.space, gamma[j])
    }
}

impl<X: MetricPresentation, F: DenseFn<X> + ?Sized + 'static> PathFunction<RealPoint>
    for Composite<X, F>
{
    fn eval_at(&self, a: &[u64]) -> Result<RealPoint> {
        let me = Composite {
            space: self.space.clone(),
            f: self.f.clone(),
        };
        let s = FinSeq::from(a);
        Ok(RealPoint::approximated(move |k| me.approximate(&s, k)))
    }

    /// Every limit below `a` lies within `5·2^-c` of `p_γc`, `c = |a| - 1`.
    fn spread_below(&self, a: &[u64]) -> Result<Option<BigRational>> {
        if a.is_empty() {
            return Ok(self.f.global_oscillation());
        }
        let c = a.len() - 1;
        let head = repair_walk(self.space.as_ref(), a, c)?;
        let radius = pow2(-(c as i64)) * BigRational::from_integer(5.into());
        self.f.oscillation(&self.space, head[c], &radius)
    }
}

/// Result of the modulus search near a compact subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompactModulus {
    pub space: String,
    pub function: String,
    pub epsilon: String,
    pub n: usize,
    /// `δ = 2^-(n+1)`.
    pub delta: String,
    /// Precision used by `λ`.
    pub lambda_precision: u32,
    /// Least depth where the `λ` bar holds on every representative.
    pub searched: usize,
    /// Distinct last entries of `T₁` nodes scanned at each depth `0..=n`.
    pub representatives: Vec<usize>,
    /// A node one level above `n` where the values still spread too far.
    pub minimality: Option<Witness>,
    /// Whether every representative at depth `n` had its spread bounded exactly.
    pub exact: bool,
}

/// Searches the least `N` at which `P(a) :⟺ ∀b, c λ(a * b, a * c) = 1`
/// holds on every node of `T₁` for `g = f ∘ Φ_{T₀,X}`, then steps `N` up
/// until the values below every level-`N` node are within `ε/3`, and
/// returns `δ = 2^-(N+1)`.
///
/// Values of `g` below a `T₁` node depend only on its depth and last entry,
/// so each level is scanned through one representative per last entry.
pub fn uniform_modulus_near_compact<X, K, F>(
    cs: &CompactSpace<X, K>,
    f: Arc<F>,
    epsilon: &BigRational,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<CompactModulus>
where
    X: MetricPresentation,
    K: CompactNets<X>,
    F: DenseFn<X> + ?Sized + 'static,
{
    let function = f.label();
    let g = Composite::new(cs.space.clone(), f);
    let lambda = Lambda::new(epsilon)?;
    let exts: Vec<FinSeq> = extensions_up_to(budget).collect();
    let t1 = cs.t1();
    let mut reps = vec![FinSeq::empty()];
    let mut counts = Vec::new();
    let mut minimality = None;
    let mut searched = None;
    for n in 0..=max_depth {
        if n > 0 {
            reps = next_representatives(&t1, &reps, n, limits)?;
        }
        counts.push(reps.len());
        if searched.is_none() {
            let failure = reps
                .par_iter()
                .map(|a| -> Result<Option<Witness>> {
                    Ok(
                        lambda_predicate(&g, &RealLine, &lambda, a, &exts)?.map(|(b, c)| Witness {
                            node: a.clone(),
                            refutation: Refutation::Pair(b, c),
                        }),
                    )
                })
                .find_first(|r| !matches!(r, Ok(None)));
            match failure {
                Some(w) => {
                    minimality = Some(w?.expect("filtered to failures"));
                    continue;
                }
                None => searched = Some(n),
            }
        }
        let certified = reps
            .par_iter()
            .map(|a| values_within_third(&g, &RealLine, &lambda, a, &exts))
            .collect::<Result<Vec<(bool, bool)>>>()?;
        if certified.iter().all(|(ok, _)| *ok) {
            let searched = searched.expect("set before certifying");
            return Ok(CompactModulus {
                space: cs.label(),
                function,
                epsilon: epsilon.to_string(),
                n,
                delta: pow2(-(n as i64 + 1)).to_string(),
                lambda_precision: lambda.precision(),
                searched,
                representatives: counts,
                minimality: if n == searched { minimality } else { None },
                exact: certified.iter().all(|(_, exact)| *exact),
            });
        }
    }
    match searched {
        None => Err(Error::NotFoundWithinBudget { max_depth }),
        Some(searched) => Err(Error::VerificationFailed {
            searched,
            max_depth,
        }),
    }
}

fn next_representatives<X: MetricPresentation, K: CompactNets<X>>(
    t1: &T1Fan<X, K>,
    reps: &[FinSeq],
    depth: usize,
    limits: &Limits,
) -> Result<Vec<FinSeq>> {
    let mut seen = HashSet::new();
    let mut next = Vec::new();
    for a in reps {
        for c in t1.children(a) {
            if seen.insert(c) {
                next.push(a.child(c));
            }
        }
        if next.len() > limits.level_cap {
            return Err(Error::LevelCapExceeded {
                depth,
                cap: limits.level_cap,
            });
        }
    }
    next.sort_by_key(|a| a.last());
    Ok(next)
}

/// The numeric chain behind the ball cover at depth `k`: for `x ∈ K` and
/// `d(x, y) < 2^-(k+1)`, the splice `γ̄(k+1) * β` stays in `T₀`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpliceCheck {
    pub k: u32,
    pub gamma_k: u64,
    pub beta_k1: u64,
    /// Upper bounds on `d(p_γk, x)`, `d(x, y)`, `d(y, p_βk+1)` each below `2^-(k+1)`.
    pub legs_ok: bool,
    /// `3·2^-(k+1) + 2^-(k+1) = 2^(-k+1)`.
    pub chain_identity: bool,
    /// `α_Q(γₖ, βₖ₊₁, k+1) < 3·2^-(k+1) + 2^-(k+1)`.
    pub alpha_ok: bool,
    /// The spliced node passes the `T₀` check through `depth`.
    pub splice_in_t0: bool,
}

impl SpliceCheck {
    pub fn passed(&self) -> bool {
        self.legs_ok && self.chain_identity && self.alpha_ok && self.splice_in_t0
    }
}

pub fn splice_check<X: MetricPresentation, K: CompactNets<X>>(
    cs: &CompactSpace<X, K>,
    x: &X::Point,
    y: &X::Point,
    k: u32,
    tail: usize,
) -> Result<SpliceCheck> {
    let depth = k as usize + 1 + tail;
    let gamma = point_to_path(cs, x, k as usize + 1)?;
    let beta = (0..depth as u32)
        .map(|n| cs.space.approximating_index(y, n))
        .collect::<Result<Vec<u64>>>()?;
    let half = pow2(-(k as i64 + 1));
    let guard = k + 12;
    let legs = [
        cs.space.dist_upper(x, gamma[k as usize], guard)?,
        cs.space.point_dist_upper(x, y, guard)?,
        cs.space.dist_upper(y, beta[k as usize + 1], guard)?,
    ];
    let legs_ok = legs.iter().all(|l| *l < half);
    let three_halves = &half * BigRational::from_integer(3.into());
    let chain_sum = &three_halves + &half;
    let chain_identity = chain_sum == pow2(1 - k as i64);
    let alpha = cs
        .space
        .alpha_q(gamma[k as usize], beta[k as usize + 1], k + 1);
    let alpha_ok = alpha < chain_sum;
    let mut spliced = gamma[..=k as usize].to_vec();
    spliced.extend_from_slice(&beta[k as usize + 1..]);
    let splice_in_t0 = cs.t0().member(&spliced);
    Ok(SpliceCheck {
        k,
        gamma_k: gamma[k as usize],
        beta_k1: beta[k as usize + 1],
        legs_ok,
        chain_identity,
        alpha_ok,
        splice_in_t0,
    })
}

/// Checks the nets at levels up to `max_level`: chaining (`I(k+1)` steps into
/// `I(k+2)`) and density enough for the strict margin of [`point_to_path`].
pub fn validate_nets<X: MetricPresentation, K: CompactNets<X>>(
    cs: &CompactSpace<X, K>,
    max_level: u32,
) -> Result<()> {
    let space = cs.space.as_ref();
    for k in 0..max_level {
        for i in cs.nets.net(space, k + 1) {
            if cs.nets.steps_into(space, i, k).is_empty() {
                return Err(Error::validation(
                    format!("net I({}) has no successor in I({})", k + 1, k + 2),
                    i,
                ));
            }
        }
        // Every point of K is within 2^-(k+3) of I(k+3); a member of I(k+1)
        // within 3·2^-(k+3) of it leaves the margin 2^-(k+1).
        let coarse = cs.nets.net(space, k + 1);
        let slack = pow2(-(k as i64 + 4));
        let limit = pow2(-(k as i64 + 3)) * BigRational::from_integer(3.into());
        for i in cs.nets.net(space, k + 3) {
            let close = coarse
                .iter()
                .any(|&j| space.alpha_q(i, j, k + 4) + &slack < limit);
            if !close {
                return Err(Error::validation(
                    format!("net I({}) is too coarse for the margin 2^-{}", k + 1, k + 1),
                    i,
                ));
            }
        }
    }
    Ok(())
}
