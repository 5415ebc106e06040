//! Finite sequences of naturals and their bijective numeric coding.
//!
//! The coding is built from the Cantor pairing function:
//!
//! ```text
//! code(<>)       = 0
//! code(a * <m>)  = pair(code(a), m) + 1,   pair(x, y) = (x + y)(x + y + 1)/2 + y
//! ```
//!
//! Codes grow doubly exponentially in the length of the sequence, so
//! [`encode`] produces a [`BigUint`]. Quantifiers over "all extensions
//! `b` with `code(b) <= budget`" only ever need small codes, for which
//! [`decode_small`] avoids big-integer arithmetic.

use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;

use num::integer::Roots;
use num::{BigUint, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sequence of naturals.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinSeq(Vec<u64>);

impl FinSeq {
    pub fn empty() -> Self {
        FinSeq(Vec::new())
    }

    pub fn new(entries: Vec<u64>) -> Self {
        FinSeq(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    /// `self * other`
    pub fn concat(&self, other: &[u64]) -> FinSeq {
        let mut v = Vec::with_capacity(self.0.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        FinSeq(v)
    }

    /// `self * <n>`
    pub fn child(&self, n: u64) -> FinSeq {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(n);
        FinSeq(v)
    }

    pub fn push(&mut self, n: u64) {
        self.0.push(n);
    }

    /// The initial segment of length `n`.
    pub fn prefix(&self, n: usize) -> Result<FinSeq> {
        prefix(&self.0, n)
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }
}

impl Borrow<[u64]> for FinSeq {
    fn borrow(&self) -> &[u64] {
        &self.0
    }
}

impl Deref for FinSeq {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for FinSeq {
    fn from(v: Vec<u64>) -> Self {
        FinSeq(v)
    }
}

impl From<&[u64]> for FinSeq {
    fn from(v: &[u64]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl<const N: usize> From<[u64; N]> for FinSeq {
    fn from(v: [u64; N]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `a * b`
pub fn concat(a: &[u64], b: &[u64]) -> FinSeq {
    FinSeq::from(a).concat(b)
}

/// The initial segment of `a` of length `n`; asking for more than `a` has is an error.
pub fn prefix(a: &[u64], n: usize) -> Result<FinSeq> {
    if n > a.len() {
        return Err(Error::PrefixOutOfRange { len: a.len(), n });
    }
    Ok(FinSeq(a[..n].to_vec()))
}

pub fn cantor_pair(x: &BigUint, y: u64) -> BigUint {
    let s = x + BigUint::from(y);
    let tri = (&s * (&s + BigUint::one())) >> 1u32;
    tri + BigUint::from(y)
}

/// Inverse of the Cantor pairing on `u64`.
pub fn cantor_unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let w = ((8 * z + 1).sqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let y = z - t;
    ((w - y) as u64, y as u64)
}

/// Cantor pairing on `u64`, `None` on overflow.
pub fn cantor_pair_small(x: u64, y: u64) -> Option<u64> {
    let s = x as u128 + y as u128;
    let v = s.checked_mul(s + 1)? / 2 + y as u128;
    u64::try_from(v).ok()
}

fn cantor_unpair_big(z: &BigUint) -> (BigUint, BigUint) {
    let w: BigUint = ((z * 8u32 + 1u32).sqrt() - 1u32) >> 1u32;
    let t = (&w * (&w + 1u32)) >> 1u32;
    let y = z - t;
    (w - &y, y)
}

pub fn encode(a: &[u64]) -> BigUint {
    let mut n = BigUint::zero();
    for &m in a {
        n = cantor_pair(&n, m) + 1u32;
    }
    n
}

/// The code of `a` if it fits in a `u64`.
pub fn encode_small(a: &[u64]) -> Option<u64> {
    let mut n: u64 = 0;
    for &m in a {
        n = cantor_pair_small(n, m)?.checked_add(1)?;
    }
    Some(n)
}

/// Decode an arbitrary code. Fails only when an entry would not fit in a `u64`.
pub fn decode(n: &BigUint) -> Result<FinSeq> {
    if let Some(small) = n.to_u64() {
        return Ok(decode_small(small));
    }
    let mut rev = Vec::new();
    let mut n = n.clone();
    while !n.is_zero() {
        let (x, y) = cantor_unpair_big(&(n - 1u32));
        rev.push(y.to_u64().ok_or(Error::EntryOverflow)?);
        n = x;
    }
    rev.reverse();
    Ok(FinSeq(rev))
}

/// Decode a code that fits in a `u64`. Total.
pub fn decode_small(mut n: u64) -> FinSeq {
    let mut rev = Vec::new();
    while n > 0 {
        let (x, y) = cantor_unpair(n - 1);
        rev.push(y);
        n = x;
    }
    rev.reverse();
    FinSeq(rev)
}

/// All sequences with code at most `budget`, in code order.
pub fn extensions_up_to(budget: u64) -> impl Iterator<Item = FinSeq> {
    (0..=budget).map(decode_small)
}
