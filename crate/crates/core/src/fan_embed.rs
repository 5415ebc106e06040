//! Embedding an arbitrary fan into the binary fan by unary block coding,
//! and transferring uniform bounds back along the embedding.
//!
//! An entry `i` is written as the block `0 1^(i+1)`. A block is only decoded
//! once the next block has started, so `Ψ(Φ(a))` drops the last entry of `a`
//! while `Ψ(Φ(a) * <0>) = a`.

use std::sync::Arc;

use serde::Serialize;

use crate::bars::{
    find_uniform_bound, is_uniform_at, BarRep, DecBar, Pi01Bar, UniformBound, Verdict,
};
use crate::error::{Error, Result};
use crate::seqcode::FinSeq;
use crate::trees::{level, Fan, Limits, Path, Spread};

/// `Φ(a)`
pub fn phi(a: &[u64]) -> FinSeq {
    let mut out = Vec::with_capacity(a.iter().map(|&i| i as usize + 2).sum());
    for &i in a {
        out.push(0);
        out.extend(std::iter::repeat_n(1, i as usize + 1));
    }
    FinSeq::new(out)
}

/// `Φ*(α)`: the binary path spelled by the blocks of `α`.
pub fn phi_path(alpha: &Path) -> Path {
    let alpha = alpha.clone();
    Path::from_fn(move |n| {
        let mut pos = 0usize;
        let mut k = 0usize;
        loop {
            let width = alpha.sample(k) as usize + 2;
            if n < pos + width {
                return u64::from(n > pos);
            }
            pos += width;
            k += 1;
        }
    })
}

/// Splits a block code into its completed entries and the length of the
/// trailing incomplete block (`None` when there is none).
fn parse_blocks(c: &[u64]) -> Result<(FinSeq, Option<usize>)> {
    let malformed = |reason| Error::MalformedCode {
        code: FinSeq::from(c),
        reason,
    };
    let mut entries = Vec::new();
    // Number of ones in the block being read, if one is open.
    let mut open: Option<usize> = None;
    for &bit in c {
        match (bit, open) {
            (0, None) => open = Some(0),
            (0, Some(0)) => return Err(malformed("empty block")),
            (0, Some(ones)) => {
                entries.push(ones as u64 - 1);
                open = Some(0);
            }
            (1, Some(ones)) => open = Some(ones + 1),
            (1, None) => return Err(malformed("code starts with 1")),
            _ => return Err(malformed("entry is not a bit")),
        }
    }
    Ok((FinSeq::new(entries), open))
}

/// `Ψ(c)`: the entries of the completed blocks of `c`.
pub fn psi(c: &[u64]) -> Result<FinSeq> {
    Ok(parse_blocks(c)?.0)
}

/// `T′`, the closure of `Φ[T]` under initial segments. Membership is decided
/// on demand from `T`.
#[derive(Clone)]
pub struct BinaryImage {
    source: Arc<dyn Fan>,
}

/// The closure of the image of `Φ` on `t`.
pub fn closure_image(t: Arc<dyn Fan>) -> BinaryImage {
    BinaryImage { source: t }
}

impl BinaryImage {
    pub fn source(&self) -> &dyn Fan {
        self.source.as_ref()
    }

    fn largest_child(&self, a: &[u64]) -> Option<u64> {
        self.source.children(a).last().copied()
    }
}

impl Spread for BinaryImage {
    fn member(&self, c: &[u64]) -> bool {
        let Ok((a, open)) = parse_blocks(c) else {
            return false;
        };
        if !self.source.member(&a) {
            return false;
        }
        match open {
            None | Some(0) => true,
            // A block of `ones` ones is a prefix of the code of child `i` iff `ones <= i + 1`.
            Some(ones) => self.largest_child(&a).is_some_and(|i| ones as u64 <= i + 1),
        }
    }

    fn successor_hint(&self, c: &[u64]) -> u64 {
        u64::from(!self.extends(c, 0))
    }

    fn as_fan(&self) -> Option<&dyn Fan> {
        Some(self)
    }

    fn label(&self) -> String {
        format!("image:{}", self.source.label())
    }
}

impl Fan for BinaryImage {
    fn branch_bound(&self, _c: &[u64]) -> u64 {
        1
    }
}

/// `φ(n) = Σ_{i=1..n} max{a(i-1) | a ∈ T, |a| = i} + 2n + 1`, the modulus of
/// `Ψ*`. The `i = 0` summand is taken to be 0.
pub fn phi_modulus(t: &dyn Fan, n: usize, limits: &Limits) -> Result<u64> {
    let mut sum: u64 = 0;
    let mut nodes = vec![FinSeq::empty()];
    for i in 1..=n {
        let mut next = Vec::new();
        let mut max_last = 0;
        for a in &nodes {
            for c in t.children(a) {
                max_last = max_last.max(c);
                next.push(a.child(c));
            }
            if next.len() > limits.level_cap {
                return Err(Error::LevelCapExceeded {
                    depth: i,
                    cap: limits.level_cap,
                });
            }
        }
        sum += max_last;
        nodes = next;
    }
    Ok(sum + 2 * n as u64 + 1)
}

/// The first `n` entries of `Ψ*(β)` for a path `β` of `T′`, read off `β̄φ(n)`.
pub fn psi_star_prefix(
    img: &BinaryImage,
    beta: &Path,
    n: usize,
    limits: &Limits,
) -> Result<FinSeq> {
    let m = phi_modulus(img.source(), n, limits)?;
    psi(&beta.prefix(m as usize))?.prefix(n)
}

/// `M = max{|Ψ(c)| | c ∈ T′, |c| = N}`.
pub fn transfer_bound(img: &BinaryImage, n: usize, limits: &Limits) -> Result<usize> {
    let mut m = 0;
    for c in level(img, n, limits)? {
        m = m.max(psi(&c)?.len());
    }
    Ok(m)
}

/// `P′(c) = P(Ψ(c))`, the bar of `T′` induced by a bar of `T`.
pub fn pull_through_psi(p: &BarRep) -> Result<BarRep> {
    match p {
        BarRep::Dec(b) => {
            let b = b.clone();
            Ok(BarRep::Dec(DecBar::fallible(move |c| b.holds(&psi(c)?))))
        }
        BarRep::Pi01(b) => {
            let b = b.clone();
            Ok(BarRep::Pi01(Pi01Bar::fallible(move |n, c| {
                b.family(n, &psi(c)?)
            })))
        }
        BarRep::CSet(_) => Err(Error::KindNotSupported {
            op: "pull through the embedding",
            kind: "cset",
        }),
    }
}

/// A uniform bound found on `T′` and carried back to `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferredBound {
    /// The search result on `T′` for `P ∘ Ψ`.
    pub image: UniformBound,
    /// `M` computed from the image bound.
    pub m: usize,
}

/// Finds the uniform bound of `P ∘ Ψ` on `T′`, transfers it to `M` and checks
/// that `P` is uniform at `M` on `T`.
pub fn transfer_uniform_bound(
    t: Arc<dyn Fan>,
    p: &BarRep,
    max_depth: usize,
    budget: u64,
    limits: &Limits,
) -> Result<TransferredBound> {
    let img = closure_image(t.clone());
    let pulled = pull_through_psi(p)?;
    let image = find_uniform_bound(&img, &pulled, max_depth, budget, limits)?;
    let m = transfer_bound(&img, image.n, limits)?;
    match is_uniform_at(t.as_ref(), p, m, budget, limits)? {
        Verdict::Holds { .. } => Ok(TransferredBound { image, m }),
        Verdict::Refuted(_) => Err(Error::VerificationFailed {
            searched: image.n,
            max_depth: m,
        }),
    }
}
