//! Seeded generators for randomized fans and bars.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TableFan;
use crate::bars::{DecBar, Pi01Bar};
use crate::seqcode::FinSeq;
use crate::trees::Fan;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A fan whose nodes up to `depth` have `1..=max_branch` children; deeper
/// nodes have one child.
pub fn random_fan(rng: &mut impl Rng, max_branch: u64, depth: usize) -> TableFan {
    let mut table = BTreeMap::new();
    let mut nodes = vec![FinSeq::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for a in nodes {
            let bound = rng.random_range(0..max_branch.max(1));
            next.extend((0..=bound).map(|c| a.child(c)));
            table.insert(a, bound);
        }
        nodes = next;
    }
    TableFan::new(0, table, None)
}

/// Every node of `t` up to `depth`, in level order.
pub fn nodes_up_to(t: &dyn Fan, depth: usize) -> Vec<FinSeq> {
    let mut out = vec![FinSeq::empty()];
    let mut frontier = vec![FinSeq::empty()];
    for _ in 0..depth {
        frontier = frontier
            .iter()
            .flat_map(|a| t.children(a).into_iter().map(move |c| a.child(c)))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// A monotone decidable bar: `a` is in the bar when some prefix is flagged
/// or `|a| >= depth`.
#[derive(Clone)]
pub struct RandomDecBar {
    pub flagged: Arc<BTreeSet<FinSeq>>,
    pub depth: usize,
    pub bar: DecBar,
}

/// Flags each node of `t` above `depth` with probability `p`.
pub fn random_dec_bar(rng: &mut impl Rng, t: &dyn Fan, depth: usize, p: f64) -> RandomDecBar {
    let flagged: BTreeSet<FinSeq> = nodes_up_to(t, depth.saturating_sub(1))
        .into_iter()
        .filter(|_| rng.random_bool(p))
        .collect();
    let flagged = Arc::new(flagged);
    let bar = {
        let flagged = flagged.clone();
        DecBar::new(move |a| a.len() >= depth || (0..=a.len()).any(|n| flagged.contains(&a[..n])))
    };
    RandomDecBar {
        flagged,
        depth,
        bar,
    }
}

/// A monotone Π⁰₁ bar. A flagged node `c` carries a delay `t(c)`:
/// `Bₙ(a)` holds when `|a| >= depth`, when `a` has a flagged proper
/// prefix, or when `a` is flagged itself and `n < t(a)`. So the bar is
/// "some proper prefix is flagged", but deciding it at a flagged node takes
/// `t(c)` steps of the family.
#[derive(Clone)]
pub struct RandomPi01Bar {
    pub delays: Arc<BTreeMap<FinSeq, u64>>,
    pub depth: usize,
    pub bar: Pi01Bar,
}

pub fn random_pi01_bar(
    rng: &mut impl Rng,
    t: &dyn Fan,
    depth: usize,
    p: f64,
    max_delay: u64,
) -> RandomPi01Bar {
    let mut delays = BTreeMap::new();
    for a in nodes_up_to(t, depth.saturating_sub(1)) {
        if rng.random_bool(p) {
            delays.insert(a, rng.random_range(0..=max_delay));
        }
    }
    let delays = Arc::new(delays);
    let bar = {
        let delays = delays.clone();
        Pi01Bar::new(move |n, a| {
            a.len() >= depth
                || (0..a.len()).any(|k| delays.contains_key(&a[..k]))
                || delays.get(a).is_some_and(|&d| n < d)
        })
    };
    RandomPi01Bar { delays, depth, bar }
}
