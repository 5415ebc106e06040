//! Pointwise continuous functions on Baire space, the passage between such
//! functions and bars, and moduli of uniform continuity near a fan.
//!
//! A function is given by its finite commitments: `commit(a) = Some(v)` means
//! every path through `a` is sent to `v`. Values at finite-support paths
//! `a * 0^ω` are read off the first committing prefix.

use std::sync::{Arc, Mutex};

use num::{BigRational, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bars::{
    cbar_to_pi01, find_uniform_bound, BarRep, CSet, DecBar, PathModulus, Pi01Bar, Witness,
};
use crate::error::{Error, Result};
use crate::fan_embed::transfer_uniform_bound;
use crate::rational::{pow2, precision_below};
use crate::seqcode::{decode_small, extensions_up_to, FinSeq};
use crate::trees::{level, Fan, Limits, Path};

/// Commitment depth assumed when a function declares none.
pub const DEFAULT_DEPTH_BOUND: usize = 64;

/// Evaluation of a function at finite-support paths `a * 0^ω`.
pub trait PathFunction<V>: Send + Sync {
    fn eval_at(&self, a: &[u64]) -> Result<V>;

    /// The value on every path through `a`, when `a` already determines it.
    fn committed(&self, _a: &[u64]) -> Result<Option<V>> {
        Ok(None)
    }

    /// An upper bound on the distance between values on paths through `a`.
    fn spread_below(&self, a: &[u64]) -> Result<Option<BigRational>> {
        Ok(self.committed(a)?.map(|_| BigRational::zero()))
    }
}

pub type Commit<V> = Arc<dyn Fn(&[u64]) -> Result<Option<V>> + Send + Sync>;

/// A neighbourhood function: a monotone partial map from nodes to values.
pub struct NbhdFn<V> {
    commit: Commit<V>,
    depth_bound: usize,
}

impl<V> Clone for NbhdFn<V> {
    fn clone(&self) -> Self {
        NbhdFn {
            commit: self.commit.clone(),
            depth_bound: self.depth_bound,
        }
    }
}

impl<V: Clone + Send + Sync + 'static> NbhdFn<V> {
    pub fn new(
        depth_bound: usize,
        commit: impl Fn(&[u64]) -> Option<V> + Send + Sync + 'static,
    ) -> Self {
        NbhdFn {
            commit: Arc::new(move |a| Ok(commit(a))),
            depth_bound,
        }
    }

    pub fn fallible(
        depth_bound: usize,
        commit: impl Fn(&[u64]) -> Result<Option<V>> + Send + Sync + 'static,
    ) -> Self {
        NbhdFn {
            commit: Arc::new(commit),
            depth_bound,
        }
    }

    pub fn constant(v: V) -> Self {
        NbhdFn::new(0, move |_| Some(v.clone()))
    }

    pub fn commit(&self, a: &[u64]) -> Result<Option<V>> {
        (self.commit)(a)
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    /// The value at the first committing prefix of `a` itself.
    pub fn committed_prefix(&self, a: &[u64]) -> Result<Option<V>> {
        for n in 0..=a.len() {
            if let Some(v) = self.commit(&a[..n])? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// The value at `α`, inspecting prefixes up to the declared depth bound.
    pub fn eval_path(&self, alpha: &Path) -> Result<V> {
        let p = alpha.prefix(self.depth_bound);
        self.committed_prefix(&p)?.ok_or(Error::NoCommitment {
            node: FinSeq::empty(),
            depth: self.depth_bound,
        })
    }

    /// Checks `commit(a) = v ⇒ commit(a * b) = v` for every node of code at
    /// most `nodes` and every `b` of code at most `exts`.
    pub fn monotonicity_violation(&self, nodes: u64, exts: u64) -> Result<Option<(FinSeq, FinSeq)>>
    where
        V: PartialEq,
    {
        for code in 0..=nodes {
            let a = decode_small(code);
            let Some(v) = self.commit(&a)? else { continue };
            for b in extensions_up_to(exts) {
                let ab = a.concat(&b);
                if self.commit(&ab)?.as_ref() != Some(&v) {
                    return Ok(Some((a, ab)));
                }
            }
        }
        Ok(None)
    }
}

impl<V: Clone + Send + Sync + 'static> PathFunction<V> for NbhdFn<V> {
    fn eval_at(&self, a: &[u64]) -> Result<V> {
        let depth = a.len().max(self.depth_bound);
        let mut p = Vec::with_capacity(depth);
        p.extend_from_slice(a);
        p.resize(depth, 0);
        self.committed_prefix(&p)?
            .ok_or_else(|| Error::NoCommitment {
                node: FinSeq::from(a),
                depth,
            })
    }

    fn committed(&self, a: &[u64]) -> Result<Option<V>> {
        self.committed_prefix(a)
    }
}

/// `α ↦ α(k)`, committing at depth `k + 1`.
pub fn coordinate(k: usize) -> NbhdFn<u64> {
    NbhdFn::new(k + 1, move |a| a.get(k).copied())
}

/// `f(α) = max({n | ¬D(ᾱn)} ∪ {1})`, committing once the path modulus is
/// reached.
pub fn fn_from_cbar(q: &CSet, mu: PathModulus) -> NbhdFn<u64> {
    let q = q.clone();
    let depth_bound = mu.max_depth().unwrap_or(DEFAULT_DEPTH_BOUND);
    NbhdFn::fallible(depth_bound, move |a| {
        let m = mu.at(&Path::finite_support(a))?;
        if m > a.len() {
            return Ok(None);
        }
        let mut value = 1;
        for n in 0..=m {
            if !q.d(&a[..n])? {
                value = value.max(n as u64);
            }
        }
        Ok(Some(value))
    })
}

/// `Bₙ(a) :⟺ f(a * 0^ω) = f(a * n̂ * 0^ω)`.
pub fn bar_from_fn<V, F>(f: Arc<F>) -> Pi01Bar
where
    V: PartialEq,
    F: PathFunction<V> + ?Sized + 'static,
{
    Pi01Bar::fallible(move |n, a| {
        let b = decode_small(n);
        Ok(f.eval_at(a)? == f.eval_at(&FinSeq::from(a).concat(&b))?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FanSearch,
    Transferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniformityCertificate {
    pub fan: String,
    /// Absent for functions into the naturals.
    pub epsilon: Option<String>,
    pub n: usize,
    pub method: Method,
    /// Bound produced by the bar search, before the commitment check.
    pub searched: usize,
    /// Refutation of the bar one level above the searched bound.
    pub minimality: Option<Witness>,
    pub level_size: usize,
    /// Whether every level-`n` node commits, making the bound exact rather than budgeted.
    pub exact: bool,
}

/// The first node of `level(t, n)` with no committing prefix.
pub fn uncommitted_node<V, F>(
    t: &dyn Fan,
    f: &F,
    n: usize,
    limits: &Limits,
) -> Result<(usize, Option<FinSeq>)>
where
    V: Send,
    F: PathFunction<V> + ?Sized,
{
    let nodes = level(t, n, limits)?;
    let first = nodes
        .par_iter()
        .map(|a| f.committed(a).map(|v| v.is_none().then(|| a.clone())))
        .find_first(|r| !matches!(r, Ok(None)));
    Ok((nodes.len(), first.transpose()?.flatten()))
}

/// Uniform continuity near `t` for a function into the naturals.
///
/// Runs the bar search on [`bar_from_fn`] and then accepts the first depth
/// from the searched bound upward at which every node of `t` commits.
pub fn uniform_modulus_near_fan(
    t: &dyn Fan,
    f: &NbhdFn<u64>,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<UniformityCertificate> {
    let bar: BarRep = bar_from_fn(Arc::new(f.clone())).into();
    let found = find_uniform_bound(t, &bar, max_depth, budget, limits)?;
    certify_by_commitment(
        t,
        f,
        found.n,
        found.minimality,
        Method::FanSearch,
        max_depth,
        limits,
    )
}

/// As [`uniform_modulus_near_fan`], but the bar search runs on the binary
/// image of `t` and the bound is transferred back.
pub fn uniform_modulus_via_embedding(
    t: Arc<dyn Fan>,
    f: &NbhdFn<u64>,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<UniformityCertificate> {
    let bar: BarRep = bar_from_fn(Arc::new(f.clone())).into();
    let transferred = transfer_uniform_bound(t.clone(), &bar, max_depth, budget, limits)?;
    certify_by_commitment(
        t.as_ref(),
        f,
        transferred.m,
        None,
        Method::Transferred,
        max_depth,
        limits,
    )
}

fn certify_by_commitment(
    t: &dyn Fan,
    f: &NbhdFn<u64>,
    searched: usize,
    minimality: Option<Witness>,
    method: Method,
    max_depth: usize,
    limits: &Limits,
) -> Result<UniformityCertificate> {
    for n in searched..=max_depth {
        let (level_size, missing) = uncommitted_node(t, f, n, limits)?;
        if missing.is_none() {
            return Ok(UniformityCertificate {
                fan: t.label(),
                epsilon: None,
                n,
                method,
                searched,
                // The searched level refutation only witnesses minimality when it is kept.
                minimality: if n == searched { minimality } else { None },
                level_size,
                exact: true,
            });
        }
    }
    Err(Error::VerificationFailed {
        searched,
        max_depth,
    })
}

/// `max{N, max{f(a * 0^ω) | a ∈ level(t, N)}} + 1`, a depth at which the
/// c-set behind `f` holds everywhere on `t`.
pub fn cbar_uniform_depth(
    t: &dyn Fan,
    f: &NbhdFn<u64>,
    n: usize,
    limits: &Limits,
) -> Result<usize> {
    let mut m = n as u64;
    for a in level(t, n, limits)? {
        m = m.max(f.eval_at(&a)?);
    }
    Ok(m as usize + 1)
}

/// Distances between values, approximated to any precision.
pub trait ApproxPointOracle<V>: Send + Sync {
    /// Some `q` with `|d(v, w) - q| < 2^-k`.
    fn dist_q(&self, v: &V, w: &V, k: u32) -> Result<BigRational>;
}

/// A real number, exact or given by approximations.
#[derive(Clone)]
pub enum RealPoint {
    Exact(BigRational),
    Approx(Arc<ApproxReal>),
}

/// `k ↦ q` with `|x - q| < 2^-k`, remembering the finest approximation computed so far.
pub struct ApproxReal {
    approx: Box<dyn Fn(u32) -> Result<BigRational> + Send + Sync>,
    best: Mutex<Option<(u32, BigRational)>>,
}

impl RealPoint {
    pub fn approximated(f: impl Fn(u32) -> Result<BigRational> + Send + Sync + 'static) -> Self {
        RealPoint::Approx(Arc::new(ApproxReal {
            approx: Box::new(f),
            best: Mutex::new(None),
        }))
    }

    pub fn approx(&self, k: u32) -> Result<BigRational> {
        match self {
            RealPoint::Exact(q) => Ok(q.clone()),
            RealPoint::Approx(a) => {
                if let Some((kk, q)) = a.best.lock().expect("poisoned").as_ref() {
                    if *kk >= k {
                        return Ok(q.clone());
                    }
                }
                let q = (a.approx)(k)?;
                *a.best.lock().expect("poisoned") = Some((k, q.clone()));
                Ok(q)
            }
        }
    }
}

impl std::fmt::Debug for RealPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RealPoint::Exact(q) => write!(f, "{q}"),
            RealPoint::Approx(_) => f.write_str("RealPoint(<approx>)"),
        }
    }
}

impl From<BigRational> for RealPoint {
    fn from(q: BigRational) -> Self {
        RealPoint::Exact(q)
    }
}

/// The real line with `d(x, y) = |x - y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RealLine;

impl ApproxPointOracle<RealPoint> for RealLine {
    fn dist_q(&self, v: &RealPoint, w: &RealPoint, k: u32) -> Result<BigRational> {
        Ok((v.approx(k + 1)? - w.approx(k + 1)?).abs())
    }
}

impl ApproxPointOracle<BigRational> for RealLine {
    fn dist_q(&self, v: &BigRational, w: &BigRational, _k: u32) -> Result<BigRational> {
        Ok((v - w).abs())
    }
}

/// The thresholds used by `λ` at a given `ε`.
#[derive(Debug, Clone)]
pub struct Lambda {
    epsilon: BigRational,
    k: u32,
    threshold: BigRational,
}

impl Lambda {
    /// Precision `k` is the least with `2^-k < ε/24`; the test is `dist_q < ε/4`.
    pub fn new(epsilon: &BigRational) -> Result<Self> {
        let k = precision_below(&(epsilon / BigRational::from_integer(24.into())))?;
        Ok(Lambda {
            epsilon: epsilon.clone(),
            k,
            threshold: epsilon / BigRational::from_integer(4.into()),
        })
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// 1 ⇒ `d(v, w) < ε/3`; 0 ⇒ `d(v, w) > ε/6`.
    pub fn compare<V>(&self, oracle: &dyn ApproxPointOracle<V>, v: &V, w: &V) -> Result<bool> {
        Ok(oracle.dist_q(v, w, self.k)? < self.threshold)
    }

    /// A certified upper bound on `d(v, w)`.
    pub fn dist_upper<V>(
        &self,
        oracle: &dyn ApproxPointOracle<V>,
        v: &V,
        w: &V,
    ) -> Result<BigRational> {
        Ok(oracle.dist_q(v, w, self.k)? + pow2(-(self.k as i64)))
    }
}

/// `λ(a, b)` on the values at `a * 0^ω` and `b * 0^ω`.
pub fn lambda_compare<V>(
    f: &dyn PathFunction<V>,
    oracle: &dyn ApproxPointOracle<V>,
    a: &[u64],
    b: &[u64],
    epsilon: &BigRational,
) -> Result<bool> {
    Lambda::new(epsilon)?.compare(oracle, &f.eval_at(a)?, &f.eval_at(b)?)
}

/// Whether `λ(a * b, a * c) = 1` for all `b, c` among `exts`; on failure the
/// offending pair of extensions.
pub fn lambda_predicate<V: Sync>(
    f: &dyn PathFunction<V>,
    oracle: &dyn ApproxPointOracle<V>,
    lambda: &Lambda,
    a: &[u64],
    exts: &[FinSeq],
) -> Result<Option<(FinSeq, FinSeq)>> {
    let values = exts
        .iter()
        .map(|b| f.eval_at(&FinSeq::from(a).concat(b)))
        .collect::<Result<Vec<V>>>()?;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if !lambda.compare(oracle, &values[i], &values[j])? {
                return Ok(Some((exts[i].clone(), exts[j].clone())));
            }
        }
    }
    Ok(None)
}

/// Whether the values on `a * b` (`b` among `exts`) are pairwise certified
/// within `ε/3`.
pub fn values_within_third<V>(
    f: &dyn PathFunction<V>,
    oracle: &dyn ApproxPointOracle<V>,
    lambda: &Lambda,
    a: &[u64],
    exts: &[FinSeq],
) -> Result<(bool, bool)> {
    let third = lambda.epsilon() / BigRational::from_integer(3.into());
    if let Some(spread) = f.spread_below(a)? {
        return Ok((spread < third, true));
    }
    let values = exts
        .iter()
        .map(|b| f.eval_at(&FinSeq::from(a).concat(b)))
        .collect::<Result<Vec<V>>>()?;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if lambda.dist_upper(oracle, &values[i], &values[j])? >= third {
                return Ok((false, false));
            }
        }
    }
    Ok((true, false))
}

/// Uniform continuity near `t` for a metric-valued function.
///
/// The bar is `P(a) :⟺ ∀b, c λ(a * b, a * c) = 1` with `b, c` ranging over
/// codes up to `budget`. The least uniform depth is then re-checked with
/// certified distance bounds.
pub fn uniform_modulus_near_fan_metric<V: Send + Sync + 'static>(
    t: &dyn Fan,
    f: Arc<dyn PathFunction<V>>,
    oracle: Arc<dyn ApproxPointOracle<V>>,
    epsilon: &BigRational,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<UniformityCertificate> {
    let lambda = Lambda::new(epsilon)?;
    let exts: Arc<Vec<FinSeq>> = Arc::new(extensions_up_to(budget).collect());
    let bar: BarRep = {
        let (f, oracle, lambda, exts) = (f.clone(), oracle.clone(), lambda.clone(), exts.clone());
        DecBar::fallible(move |a| {
            Ok(lambda_predicate(f.as_ref(), oracle.as_ref(), &lambda, a, &exts)?.is_none())
        })
        .into()
    };
    let found = find_uniform_bound(t, &bar, max_depth, 0, limits)?;
    for n in found.n..=max_depth {
        let nodes = level(t, n, limits)?;
        let outcomes = nodes
            .par_iter()
            .map(|a| -> Result<(bool, bool)> {
                values_within_third(f.as_ref(), oracle.as_ref(), &lambda, a, &exts)
            })
            .collect::<Result<Vec<_>>>()?;
        if outcomes.iter().all(|(ok, _)| *ok) {
            return Ok(UniformityCertificate {
                fan: t.label(),
                epsilon: Some(epsilon.to_string()),
                n,
                method: Method::FanSearch,
                searched: found.n,
                minimality: if n == found.n { found.minimality } else { None },
                level_size: nodes.len(),
                exact: outcomes.iter().all(|(_, c)| *c),
            });
        }
    }
    Err(Error::VerificationFailed {
        searched: found.n,
        max_depth,
    })
}

/// Checks the c-set behind [`fn_from_cbar`] at every node of `level(t, m)`
/// with extensions up to `budget`. Returns the first failing node.
pub fn cset_fails_at_level(
    t: &dyn Fan,
    q: &CSet,
    m: usize,
    budget: u64,
    limits: &Limits,
) -> Result<Option<FinSeq>> {
    let p = cbar_to_pi01(q);
    let nodes = level(t, m, limits)?;
    let first = nodes
        .par_iter()
        .map(|a| p.first_failure(a, budget).map(|r| r.map(|_| a.clone())))
        .find_first(|r| !matches!(r, Ok(None)));
    Ok(first.transpose()?.flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::KaryFan;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn eval_examples() {
        let f = coordinate(0);
        assert_eq!(f.eval_at(&[7]).unwrap(), 7);
        assert_eq!(f.eval_at(&[]).unwrap(), 0);
        let c = NbhdFn::constant(1u64);
        assert_eq!(c.eval_at(&[4, 4, 4]).unwrap(), 1);
        let never: NbhdFn<u64> = NbhdFn::new(3, |_| None);
        assert_eq!(
            never.eval_at(&[1]),
            Err(Error::NoCommitment {
                node: FinSeq::from([1]),
                depth: 3
            })
        );
    }

    #[test]
    fn fn_from_cbar_examples() {
        for k in 1..=5 {
            let qset = CSet::new(move |a| a.len() >= k);
            let f = fn_from_cbar(&qset, PathModulus::constant(k));
            for code in 0..200 {
                assert_eq!(
                    f.eval_at(&decode_small(code)).unwrap(),
                    (k as u64 - 1).max(1)
                );
            }
        }
    }

    #[test]
    fn bar_from_fn_examples() {
        let p = bar_from_fn(Arc::new(NbhdFn::constant(3u64)));
        assert!(p.family(17, &[1, 2]).unwrap());
        let p = bar_from_fn(Arc::new(coordinate(0)));
        assert!(!p.family(3, &[]).unwrap());
        for n in 0..=500 {
            assert!(p.family(n, &[5]).unwrap());
        }
    }

    #[test]
    fn discrete_modulus_examples() {
        let lim = Limits::default();
        let bin = KaryFan::binary();
        let c = uniform_modulus_near_fan(&bin, &coordinate(0), 10, 50, &lim).unwrap();
        assert_eq!(c.n, 1);
        let c =
            uniform_modulus_near_fan(&KaryFan::new(3), &NbhdFn::constant(9), 10, 50, &lim).unwrap();
        assert_eq!(c.n, 0);
        let c = uniform_modulus_near_fan(&bin, &coordinate(3), 10, 50, &lim).unwrap();
        assert_eq!(c.n, 4);
        assert_eq!(c.level_size, 16);
    }

    #[test]
    fn discrete_modulus_via_embedding() {
        let lim = Limits::default();
        let t: Arc<dyn Fan> = Arc::new(KaryFan::new(3));
        let c = uniform_modulus_via_embedding(t, &coordinate(1), 20, 50, &lim).unwrap();
        assert_eq!(c.method, Method::Transferred);
        assert!(c.n >= 2);
    }

    #[test]
    fn prop_loop_small() {
        let lim = Limits::default();
        let bin = KaryFan::binary();
        for k in 1..=5usize {
            let qset = CSet::new(move |a| a.len() >= k);
            let f = fn_from_cbar(&qset, PathModulus::constant(k));
            let c = uniform_modulus_near_fan(&bin, &f, 10, 20, &lim).unwrap();
            assert_eq!(c.n, k);
            let m = cbar_uniform_depth(&bin, &f, c.n, &lim).unwrap();
            assert_eq!(
                cset_fails_at_level(&bin, &qset, m, 500, &lim).unwrap(),
                None
            );
        }
    }

    #[test]
    fn lambda_examples() {
        let zero: RealPoint = q(0, 1).into();
        let one: RealPoint = q(1, 1).into();
        let small: RealPoint = q(1, 100).into();
        let eps = q(1, 1);
        let l = Lambda::new(&eps).unwrap();
        assert!(l.compare(&RealLine, &one, &one).unwrap());
        assert!(!l.compare(&RealLine, &zero, &one).unwrap());
        assert!(l.compare(&RealLine, &zero, &small).unwrap());
    }

    fn real_fn(
        depth: usize,
        f: impl Fn(&[u64]) -> BigRational + Send + Sync + 'static,
    ) -> Arc<dyn PathFunction<RealPoint>> {
        Arc::new(NbhdFn::new(depth, move |a: &[u64]| {
            (a.len() >= depth).then(|| RealPoint::Exact(f(&a[..depth])))
        }))
    }

    #[test]
    fn metric_modulus_examples() {
        let lim = Limits::default();
        let bin = KaryFan::binary();
        let oracle: Arc<dyn ApproxPointOracle<RealPoint>> = Arc::new(RealLine);
        let c = uniform_modulus_near_fan_metric(
            &bin,
            real_fn(0, |_| q(3, 7)),
            oracle.clone(),
            &q(1, 2),
            8,
            20,
            &lim,
        )
        .unwrap();
        assert_eq!(c.n, 0);
        let pow = real_fn(1, |a| pow2(-(a[0] as i64)));
        let c = uniform_modulus_near_fan_metric(&bin, pow, oracle.clone(), &q(1, 10), 8, 20, &lim)
            .unwrap();
        assert_eq!(c.n, 1);
        // Entry 4 still moves the value by 1/16 > ε/4, so five entries are needed.
        let sum = real_fn(5, |a| {
            a.iter()
                .enumerate()
                .map(|(i, &x)| BigRational::from_integer(x.into()) * pow2(-(i as i64)))
                .sum()
        });
        let c = uniform_modulus_near_fan_metric(&bin, sum, oracle, &q(1, 8), 8, 20, &lim).unwrap();
        assert_eq!(c.n, 5);
    }
}
