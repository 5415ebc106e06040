//! Spreads, fans, paths, and the retraction `Γ_T` of `ℕ*` onto a spread.
//!
//! Paths are never materialised. A [`Path`] is an oracle from positions to
//! entries and every operation inspects an explicit finite prefix of it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::seqcode::FinSeq;

/// Default cap for the least-child search on spreads without a branching bound.
pub const DEFAULT_SEARCH_CAP: u64 = 1 << 16;

/// Default cap on the number of nodes in a single level.
pub const DEFAULT_LEVEL_CAP: usize = 1 << 20;

/// Combinatorial caps shared by every level scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub level_cap: usize,
    pub search_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            level_cap: DEFAULT_LEVEL_CAP,
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// An inhabited, prefix-closed, decidable set of finite sequences in which
/// every node has a child.
///
/// Implementations must be pure: the same node always gets the same answer.
pub trait Spread: Send + Sync {
    fn member(&self, a: &[u64]) -> bool;

    /// Whether `parent * <n>` is a member, assuming `parent` is one.
    ///
    /// Override when a child can be checked without re-checking the parent.
    fn extends(&self, parent: &[u64], n: u64) -> bool {
        let mut v = Vec::with_capacity(parent.len() + 1);
        v.extend_from_slice(parent);
        v.push(n);
        self.member(&v)
    }

    /// Some `n` with `a * <n>` a member, for every member `a`.
    fn successor_hint(&self, a: &[u64]) -> u64;

    /// `min { n | parent * <n> ∈ T }` for a member `parent`.
    ///
    /// Fans search up to their branching bound. Other spreads search at
    /// most `cap` candidates, which always suffices when the successor hint
    /// is below the cap.
    fn least_child(&self, parent: &[u64], cap: u64) -> Result<u64> {
        let limit = match self.as_fan() {
            Some(fan) => fan.branch_bound(parent).saturating_add(1),
            None => cap,
        };
        (0..limit)
            .find(|&n| self.extends(parent, n))
            .ok_or_else(|| Error::SearchCapExceeded {
                node: FinSeq::from(parent),
                cap: limit,
            })
    }

    /// `Some(self)` for spreads that are fans.
    fn as_fan(&self) -> Option<&dyn Fan> {
        None
    }

    /// Short human-readable name, used in certificates.
    fn label(&self) -> String;
}

/// A finitely branching spread: every member child of `a` is at most
/// `branch_bound(a)`.
pub trait Fan: Spread {
    fn branch_bound(&self, a: &[u64]) -> u64;

    /// Member children of a member node, in increasing order.
    fn children(&self, a: &[u64]) -> Vec<u64> {
        (0..=self.branch_bound(a))
            .filter(|&n| self.extends(a, n))
            .collect()
    }
}

/// An infinite sequence of naturals, inspected only through finite prefixes.
#[derive(Clone)]
pub enum Path {
    /// `a * 0^ω`, carrying its support explicitly.
    FiniteSupport(FinSeq),
    Oracle(Arc<dyn Fn(usize) -> u64 + Send + Sync>),
}

impl Path {
    pub fn zeros() -> Path {
        Path::FiniteSupport(FinSeq::empty())
    }

    pub fn finite_support(a: impl Into<FinSeq>) -> Path {
        Path::FiniteSupport(a.into())
    }

    pub fn from_fn(f: impl Fn(usize) -> u64 + Send + Sync + 'static) -> Path {
        Path::Oracle(Arc::new(f))
    }

    pub fn sample(&self, n: usize) -> u64 {
        match self {
            Path::FiniteSupport(a) => a.get(n).copied().unwrap_or(0),
            Path::Oracle(f) => f(n),
        }
    }

    /// `ᾱn`
    pub fn prefix(&self, n: usize) -> FinSeq {
        FinSeq::new((0..n).map(|i| self.sample(i)).collect())
    }

    pub fn support(&self) -> Option<&FinSeq> {
        match self {
            Path::FiniteSupport(a) => Some(a),
            Path::Oracle(_) => None,
        }
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::FiniteSupport(a) => write!(f, "{a}*0^w"),
            Path::Oracle(_) => f.write_str("Path(<oracle>)"),
        }
    }
}

/// Whether `ᾱk ∈ T` for every `k <= depth`.
pub fn in_spread(t: &dyn Spread, alpha: &Path, depth: usize) -> bool {
    let p = alpha.prefix(depth);
    (0..=depth).all(|k| t.member(&p[..k]))
}

/// The members of `t` of length `n`, in lexicographic order.
pub fn level(t: &dyn Fan, n: usize, limits: &Limits) -> Result<Vec<FinSeq>> {
    let mut current = vec![FinSeq::empty()];
    for depth in 1..=n {
        let mut next = Vec::new();
        for a in &current {
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
        current = next;
    }
    Ok(current)
}

/// `Γ_T(a)`: keep each entry while it stays inside `t`, otherwise take the
/// least child. Identity on members; the result is always a member of the
/// same length.
pub fn gamma(t: &dyn Spread, a: &[u64]) -> Result<FinSeq> {
    gamma_capped(t, a, DEFAULT_SEARCH_CAP)
}

pub fn gamma_capped(t: &dyn Spread, a: &[u64], cap: u64) -> Result<FinSeq> {
    let mut out = FinSeq::new(Vec::with_capacity(a.len()));
    for &n in a {
        let next = if t.extends(&out, n) {
            n
        } else {
            t.least_child(&out, cap)?
        };
        out.push(next);
    }
    Ok(out)
}

/// `Γ*_T(α)`, the path with `n`-th entry `Γ_T(ᾱ(n+1))(n)`.
#[derive(Clone)]
pub struct GammaStar {
    spread: Arc<dyn Spread>,
    source: Path,
    cap: u64,
}

impl GammaStar {
    pub fn sample(&self, n: usize) -> Result<u64> {
        let g = gamma_capped(self.spread.as_ref(), &self.source.prefix(n + 1), self.cap)?;
        Ok(g[n])
    }

    /// The first `n` entries. Since `Γ_T(a)` is an initial segment of
    /// `Γ_T(a * b)`, this is `Γ_T(ᾱn)`.
    pub fn prefix(&self, n: usize) -> Result<FinSeq> {
        gamma_capped(self.spread.as_ref(), &self.source.prefix(n), self.cap)
    }

    pub fn source(&self) -> &Path {
        &self.source
    }
}

pub fn gamma_star(t: Arc<dyn Spread>, alpha: Path) -> GammaStar {
    gamma_star_capped(t, alpha, DEFAULT_SEARCH_CAP)
}

pub fn gamma_star_capped(t: Arc<dyn Spread>, alpha: Path, cap: u64) -> GammaStar {
    GammaStar {
        spread: t,
        source: alpha,
        cap,
    }
}

/// `{0, …, k-1}*`; `k = 2` is the binary fan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KaryFan {
    k: u64,
}

impl KaryFan {
    pub fn new(k: u64) -> Self {
        assert!(k >= 1, "a k-ary fan needs k >= 1");
        KaryFan { k }
    }

    pub fn binary() -> Self {
        KaryFan { k: 2 }
    }

    pub fn arity(&self) -> u64 {
        self.k
    }
}

impl Spread for KaryFan {
    fn member(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x < self.k)
    }

    fn extends(&self, _parent: &[u64], n: u64) -> bool {
        n < self.k
    }

    fn successor_hint(&self, _a: &[u64]) -> u64 {
        0
    }

    fn least_child(&self, _parent: &[u64], _cap: u64) -> Result<u64> {
        Ok(0)
    }

    fn as_fan(&self) -> Option<&dyn Fan> {
        Some(self)
    }

    fn label(&self) -> String {
        if self.k == 2 {
            "binary".into()
        } else {
            format!("kary:{}", self.k)
        }
    }
}

impl Fan for KaryFan {
    fn branch_bound(&self, _a: &[u64]) -> u64 {
        self.k - 1
    }

    fn children(&self, _a: &[u64]) -> Vec<u64> {
        (0..self.k).collect()
    }
}

/// The universal spread `ℕ*`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniversalSpread;

impl Spread for UniversalSpread {
    fn member(&self, _a: &[u64]) -> bool {
        true
    }

    fn extends(&self, _parent: &[u64], _n: u64) -> bool {
        true
    }

    fn successor_hint(&self, _a: &[u64]) -> u64 {
        0
    }

    fn label(&self) -> String {
        "universal".into()
    }
}
