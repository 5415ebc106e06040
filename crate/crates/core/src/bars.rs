//! Bar representations, uniformity checks over fans, and the translations
//! between decidable, monotone Π⁰₁ and c-set presentations of bars.
//!
//! Π⁰₁ and c-set membership are not decidable. Every check on them takes an
//! explicit quantifier budget: family indices `n <= budget` for Π⁰₁ bars and
//! extensions `b` with `code(b) <= budget` for c-sets.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcode::{decode_small, extensions_up_to, FinSeq};
use crate::trees::{gamma, level, Fan, Limits, Path, Spread};

pub type Predicate = Arc<dyn Fn(&[u64]) -> Result<bool> + Send + Sync>;
pub type IndexedPredicate = Arc<dyn Fn(u64, &[u64]) -> Result<bool> + Send + Sync>;

/// A decidable set of nodes.
#[derive(Clone)]
pub struct DecBar {
    holds: Predicate,
}

impl DecBar {
    pub fn new(f: impl Fn(&[u64]) -> bool + Send + Sync + 'static) -> Self {
        DecBar {
            holds: Arc::new(move |a| Ok(f(a))),
        }
    }

    pub fn fallible(f: impl Fn(&[u64]) -> Result<bool> + Send + Sync + 'static) -> Self {
        DecBar { holds: Arc::new(f) }
    }

    pub fn holds(&self, a: &[u64]) -> Result<bool> {
        (self.holds)(a)
    }
}

/// `P = ⋂ₙ Bₙ` for a decidable family `(n, a) ↦ Bₙ(a)`.
#[derive(Clone)]
pub struct Pi01Bar {
    family: IndexedPredicate,
}

impl Pi01Bar {
    pub fn new(f: impl Fn(u64, &[u64]) -> bool + Send + Sync + 'static) -> Self {
        Pi01Bar {
            family: Arc::new(move |n, a| Ok(f(n, a))),
        }
    }

    pub fn fallible(f: impl Fn(u64, &[u64]) -> Result<bool> + Send + Sync + 'static) -> Self {
        Pi01Bar {
            family: Arc::new(f),
        }
    }

    pub fn family(&self, n: u64, a: &[u64]) -> Result<bool> {
        (self.family)(n, a)
    }

    /// The least `n <= budget` with `¬Bₙ(a)`, if any.
    pub fn first_failure(&self, a: &[u64], budget: u64) -> Result<Option<u64>> {
        for n in 0..=budget {
            if !self.family(n, a)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }
}

/// A c-set: `P(a) ⟺ ∀b D(a * b)` for a decidable `D`.
#[derive(Clone)]
pub struct CSet {
    d: Predicate,
}

impl CSet {
    pub fn new(f: impl Fn(&[u64]) -> bool + Send + Sync + 'static) -> Self {
        CSet {
            d: Arc::new(move |a| Ok(f(a))),
        }
    }

    pub fn fallible(f: impl Fn(&[u64]) -> Result<bool> + Send + Sync + 'static) -> Self {
        CSet { d: Arc::new(f) }
    }

    pub fn d(&self, a: &[u64]) -> Result<bool> {
        (self.d)(a)
    }

    /// The first extension `b` (in code order, `code(b) <= budget`) with `¬D(a * b)`.
    pub fn first_failure(&self, a: &[u64], budget: u64) -> Result<Option<FinSeq>> {
        let exts: Vec<FinSeq> = extensions_up_to(budget).collect();
        self.first_failure_among(a, &exts)
    }

    fn first_failure_among(&self, a: &[u64], exts: &[FinSeq]) -> Result<Option<FinSeq>> {
        let mut buf = Vec::with_capacity(a.len() + 8);
        for b in exts {
            buf.clear();
            buf.extend_from_slice(a);
            buf.extend_from_slice(b);
            if !self.d(&buf)? {
                return Ok(Some(b.clone()));
            }
        }
        Ok(None)
    }
}

#[derive(Clone)]
pub enum BarRep {
    Dec(DecBar),
    Pi01(Pi01Bar),
    CSet(CSet),
}

impl BarRep {
    pub fn kind(&self) -> &'static str {
        match self {
            BarRep::Dec(_) => "dec",
            BarRep::Pi01(_) => "pi01",
            BarRep::CSet(_) => "cset",
        }
    }

    /// Decidable bars are checked exactly; the others only up to a budget.
    pub fn is_exact(&self) -> bool {
        matches!(self, BarRep::Dec(_))
    }

    /// Whether the bar holds at `a` (up to `budget`), with the reason if not.
    pub fn check(&self, a: &[u64], budget: u64) -> Result<Option<Refutation>> {
        match self {
            BarRep::CSet(_) => {
                let exts: Vec<FinSeq> = extensions_up_to(budget).collect();
                self.check_with(a, budget, &exts)
            }
            _ => self.check_with(a, budget, &[]),
        }
    }

    fn check_with(&self, a: &[u64], budget: u64, exts: &[FinSeq]) -> Result<Option<Refutation>> {
        Ok(match self {
            BarRep::Dec(p) => (!p.holds(a)?).then_some(Refutation::Predicate),
            BarRep::Pi01(p) => p.first_failure(a, budget)?.map(Refutation::Index),
            BarRep::CSet(q) => q.first_failure_among(a, exts)?.map(Refutation::Extension),
        })
    }
}

impl From<DecBar> for BarRep {
    fn from(b: DecBar) -> Self {
        BarRep::Dec(b)
    }
}

impl From<Pi01Bar> for BarRep {
    fn from(b: Pi01Bar) -> Self {
        BarRep::Pi01(b)
    }
}

impl From<CSet> for BarRep {
    fn from(b: CSet) -> Self {
        BarRep::CSet(b)
    }
}

/// Why a bar fails at a node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Refutation {
    /// The decidable predicate is false.
    Predicate,
    /// `¬Bₙ(a)` for this `n`.
    Index(u64),
    /// `¬D(a * b)` for this `b`.
    Extension(FinSeq),
    /// The values below `a * b` and `a * c` are too far apart.
    Pair(FinSeq, FinSeq),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub node: FinSeq,
    pub refutation: Refutation,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.refutation {
            Refutation::Predicate => write!(f, "{}", self.node),
            Refutation::Index(n) => write!(f, "{} (index {n})", self.node),
            Refutation::Extension(b) => write!(f, "{} (extension {b})", self.node),
            Refutation::Pair(b, c) => write!(f, "{} (extensions {b} and {c})", self.node),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every level node passes. `exact` is false when the check was budget-truncated.
    Holds {
        exact: bool,
    },
    Refuted(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

/// Whether a monotone bar is uniform at depth `n` on `t`: it holds at every
/// node of `level(t, n)`.
pub fn is_uniform_at(
    t: &dyn Fan,
    p: &BarRep,
    n: usize,
    budget: u64,
    limits: &Limits,
) -> Result<Verdict> {
    let nodes = level(t, n, limits)?;
    check_nodes(p, &nodes, budget)
}

fn check_nodes(p: &BarRep, nodes: &[FinSeq], budget: u64) -> Result<Verdict> {
    let exts: Vec<FinSeq> = match p {
        BarRep::CSet(_) => extensions_up_to(budget).collect(),
        _ => Vec::new(),
    };
    let first = nodes
        .par_iter()
        .map(|a| {
            p.check_with(a, budget, &exts).map(|r| {
                r.map(|refutation| Witness {
                    node: a.clone(),
                    refutation,
                })
            })
        })
        .find_first(|r| !matches!(r, Ok(None)));
    match first {
        None => Ok(Verdict::Holds {
            exact: p.is_exact(),
        }),
        Some(r) => Ok(Verdict::Refuted(r?.expect("filtered to refutations"))),
    }
}

/// The least uniform depth of a monotone bar, with the refutation one level
/// above it certifying minimality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniformBound {
    pub n: usize,
    /// Refutation at depth `n - 1`; absent when `n = 0`.
    pub minimality: Option<Witness>,
    /// Number of fan nodes scanned at each depth `0..=n`.
    pub level_sizes: Vec<usize>,
    pub exact: bool,
}

pub fn find_uniform_bound(
    t: &dyn Fan,
    p: &BarRep,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<UniformBound> {
    let mut minimality = None;
    let mut level_sizes = Vec::new();
    let mut nodes = vec![FinSeq::empty()];
    for n in 0..=max_depth {
        if n > 0 {
            nodes = next_level(t, &nodes, n, limits)?;
        }
        level_sizes.push(nodes.len());
        match check_nodes(p, &nodes, budget)? {
            Verdict::Holds { exact } => {
                return Ok(UniformBound {
                    n,
                    minimality,
                    level_sizes,
                    exact,
                })
            }
            Verdict::Refuted(w) => minimality = Some(w),
        }
    }
    Err(Error::NotFoundWithinBudget { max_depth })
}

pub(crate) fn next_level(
    t: &dyn Fan,
    nodes: &[FinSeq],
    depth: usize,
    limits: &Limits,
) -> Result<Vec<FinSeq>> {
    let mut next = Vec::new();
    for a in nodes {
        for c in t.children(a) {
            next.push(a.child(c));
        }
        if next.len() > limits.level_cap {
            return Err(Error::LevelCapExceeded {
                depth,
                cap: limits.level_cap,
            });
        }
    }
    Ok(next)
}

/// Looks for a node of `t` (depth `< depth`) where `p` holds but fails at a
/// child. Returns the offending `(node, child)` pair.
pub fn monotonicity_violation(
    t: &dyn Fan,
    p: &BarRep,
    depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<Option<(FinSeq, FinSeq)>> {
    let mut nodes = vec![FinSeq::empty()];
    for d in 0..depth {
        for a in &nodes {
            if p.check(a, budget)?.is_some() {
                continue;
            }
            for c in t.children(a) {
                let child = a.child(c);
                if p.check(&child, budget)?.is_some() {
                    return Ok(Some((a.clone(), child)));
                }
            }
        }
        nodes = next_level(t, &nodes, d + 1, limits)?;
    }
    Ok(None)
}

/// `Q(a) :⟺ P(Γ_T(a))`. Kind-preserving for decidable and Π⁰₁ bars.
pub fn pullback_bar(t: Arc<dyn Spread>, p: &BarRep) -> Result<BarRep> {
    match p {
        BarRep::Dec(b) => {
            let b = b.clone();
            Ok(BarRep::Dec(DecBar::fallible(move |a| {
                b.holds(&gamma(t.as_ref(), a)?)
            })))
        }
        BarRep::Pi01(b) => {
            let b = b.clone();
            Ok(BarRep::Pi01(Pi01Bar::fallible(move |n, a| {
                b.family(n, &gamma(t.as_ref(), a)?)
            })))
        }
        BarRep::CSet(_) => Err(Error::KindNotSupported {
            op: "pullback",
            kind: "cset",
        }),
    }
}

/// `Q := P ∩ T`.
pub fn restrict(t: Arc<dyn Spread>, p: &BarRep) -> Result<BarRep> {
    match p {
        BarRep::Dec(b) => {
            let b = b.clone();
            Ok(BarRep::Dec(DecBar::fallible(move |a| {
                Ok(t.member(a) && b.holds(a)?)
            })))
        }
        BarRep::Pi01(b) => {
            let b = b.clone();
            Ok(BarRep::Pi01(Pi01Bar::fallible(move |n, a| {
                Ok(t.member(a) && b.family(n, a)?)
            })))
        }
        BarRep::CSet(_) => Err(Error::KindNotSupported {
            op: "restrict",
            kind: "cset",
        }),
    }
}

/// The c-set below a monotone Π⁰₁ bar of `t`:
/// `D(<>)` and `D(a * <n>) :⟺ Bₙ(Γ_T(a))`.
pub fn pi01_to_cbar(t: Arc<dyn Spread>, p: &Pi01Bar) -> CSet {
    let p = p.clone();
    CSet::fallible(move |c| match c.split_last() {
        None => Ok(true),
        Some((&n, a)) => p.family(n, &gamma(t.as_ref(), a)?),
    })
}

/// `Bₙ(a) :⟺ D(a * n̂)`. The intersection is exactly the c-set.
pub fn cbar_to_pi01(q: &CSet) -> Pi01Bar {
    let q = q.clone();
    Pi01Bar::fallible(move |n, a| q.d(&FinSeq::from(a).concat(&decode_small(n))))
}

/// The least monotone set containing `p`: `∃n <= |a|. P(ān)`.
pub fn monotonize(p: &DecBar) -> DecBar {
    let p = p.clone();
    DecBar::fallible(move |a| {
        for n in 0..=a.len() {
            if p.holds(&a[..n])? {
                return Ok(true);
            }
        }
        Ok(false)
    })
}

type ModulusFn = dyn Fn(&Path) -> Result<usize> + Send + Sync;

/// Evidence that a c-set is a bar: some depth along each path at which it holds.
#[derive(Clone)]
pub struct PathModulus {
    mu: Arc<ModulusFn>,
    /// Largest value `mu` can return, when known.
    max_depth: Option<usize>,
}

impl PathModulus {
    pub fn new(mu: impl Fn(&Path) -> Result<usize> + Send + Sync + 'static) -> Self {
        PathModulus {
            mu: Arc::new(mu),
            max_depth: None,
        }
    }

    pub fn constant(k: usize) -> Self {
        PathModulus {
            mu: Arc::new(move |_| Ok(k)),
            max_depth: Some(k),
        }
    }

    /// The least `m <= max_depth` with `D(ᾱm * b)` for every `code(b) <= budget`.
    pub fn search(q: &CSet, max_depth: usize, budget: u64) -> Self {
        let q = q.clone();
        let exts: Arc<Vec<FinSeq>> = Arc::new(extensions_up_to(budget).collect());
        PathModulus {
            mu: Arc::new(move |alpha| {
                for m in 0..=max_depth {
                    if q.first_failure_among(&alpha.prefix(m), &exts)?.is_none() {
                        return Ok(m);
                    }
                }
                Err(Error::validation(
                    format!("c-set does not hold along the path within depth {max_depth}"),
                    format!("{alpha:?}"),
                ))
            }),
            max_depth: Some(max_depth),
        }
    }

    pub fn at(&self, alpha: &Path) -> Result<usize> {
        (self.mu)(alpha)
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.max_depth
    }

    /// Spot-check `D(ᾱm)` for `mu(α) <= m <= mu(α) + lookahead` on the given paths.
    pub fn validate<'p>(
        &self,
        q: &CSet,
        paths: impl IntoIterator<Item = &'p Path>,
        lookahead: usize,
    ) -> Result<()> {
        for alpha in paths {
            let m = self.at(alpha)?;
            let p = alpha.prefix(m + lookahead);
            for k in m..=m + lookahead {
                if !q.d(&p[..k])? {
                    return Err(Error::validation(
                        "the c-set does not hold past the path modulus",
                        format!("{alpha:?} at depth {k}"),
                    ));
                }
            }
        }
        Ok(())
    }
}
