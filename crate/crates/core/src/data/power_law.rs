//! Reciprocated preferential-attachment graphs with a tunable degree exponent.
//!
//! Growth starts from a single node. Each later node links to `m` distinct earlier nodes,
//! chosen with probability proportional to `degree + offset`, and every link becomes a pair
//! of opposite directed edges. With mean out-link count `m̄`, an offset of `m̄ (γ − 3)`
//! yields a degree tail `P(k) ∝ k^−γ`; `γ = 3` is plain linear attachment.

use rand::Rng;

use super::{DataError, Preset};
use crate::model::DicNetwork;
use crate::streams::{stream, tag};

/// Tail exponent used by [`generate_power_law`].
pub const DEFAULT_EXPONENT: f64 = 2.1;

/// Smallest sampling weight, keeping every node reachable when the offset is negative.
const MIN_WEIGHT: f64 = 1e-3;

/// Binary indexed tree over sampling weights.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0.0; n + 1],
        }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self, upto: usize) -> f64 {
        let mut i = upto;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose prefix sum exceeds `target`, within the first `len` entries.
    fn find(&self, mut target: f64, len: usize) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(len - 1)
    }
}

/// Link counts for nodes `1..n`: node `t` links to `links[t - 1] ≤ t` earlier nodes and the
/// counts sum to `pairs`. Counts are spread evenly, with any shortfall of the earliest nodes
/// carried forward to later ones.
fn link_schedule(n: usize, pairs: usize) -> Option<Vec<usize>> {
    let k = n.checked_sub(1).filter(|&k| k > 0)?;
    if pairs < k || pairs > n * (n - 1) / 2 {
        return None;
    }
    let mut carry = 0;
    let links: Vec<usize> = (0..k)
        .map(|i| {
            let want = (i + 1) * pairs / k - i * pairs / k + carry;
            let got = want.min(i + 1);
            carry = want - got;
            got
        })
        .collect();
    (carry == 0).then_some(links)
}

/// Topology only: `n` nodes and roughly `edges_target` directed edges in reciprocated pairs.
pub fn power_law_topology(
    n: usize,
    edges_target: usize,
    exponent: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>, DataError> {
    let fail = |reason| DataError::Unachievable {
        nodes: n,
        target: edges_target,
        reason,
    };
    if n < 2 {
        return Err(fail("need at least two nodes"));
    }
    if exponent.is_nan() || exponent <= 2.0 {
        return Err(fail("exponent must exceed 2"));
    }
    let pairs = edges_target.div_ceil(2);
    if pairs < n - 1 {
        return Err(fail("too few edges to connect every node"));
    }
    if pairs > n * (n - 1) / 2 {
        return Err(fail("more edges than a complete graph"));
    }
    let links = link_schedule(n, pairs).ok_or_else(|| fail("no link schedule fits"))?;
    let mean_links = pairs as f64 / links.len() as f64;
    let offset = mean_links * (exponent - 3.0);
    let weight = |deg: usize| (deg as f64 + offset).max(MIN_WEIGHT);

    let mut rng = stream(seed, &[tag::GENERATOR]);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(2 * pairs);
    let mut weights = Fenwick::new(n);
    weights.add(0, weight(0));
    let mut chosen = Vec::new();
    for (i, &m) in links.iter().enumerate() {
        let t = i + 1;
        chosen.clear();
        // Sample without replacement by zeroing chosen weights until all picks are made.
        while chosen.len() < m {
            let total = weights.total(t);
            let u = weights.find(rng.random::<f64>() * total, t);
            // Rounding can leave a sliver of weight on a removed node.
            if chosen.contains(&u) {
                continue;
            }
            weights.add(u, -weight(degree[u]));
            chosen.push(u);
        }
        for &u in &chosen {
            degree[u] += 1;
            weights.add(u, weight(degree[u]));
            edges.push((t, u));
            edges.push((u, t));
        }
        degree[t] = m;
        weights.add(t, weight(m));
    }
    Ok(edges)
}

/// Power-law network with [`DEFAULT_EXPONENT`].
pub fn generate_power_law(
    n: usize,
    edges_target: usize,
    seed: u64,
    preset: &Preset,
    budget: usize,
) -> Result<DicNetwork, DataError> {
    generate_power_law_with(n, edges_target, DEFAULT_EXPONENT, seed, preset, budget)
}

pub fn generate_power_law_with(
    n: usize,
    edges_target: usize,
    exponent: f64,
    seed: u64,
    preset: &Preset,
    budget: usize,
) -> Result<DicNetwork, DataError> {
    let edges = power_law_topology(n, edges_target, exponent, seed)?;
    preset.apply(n, budget, edges)
}
