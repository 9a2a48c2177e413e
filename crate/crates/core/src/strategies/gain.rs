//! Marginal-gain estimation on common random numbers.
//!
//! A [`GainBatch`] fixes `R` sampled worlds through stateless coins keyed by sample index
//! and coordinate. Every candidate, at every seeding step, is scored on the same worlds, so
//! comparisons between candidates are noise-free relative to each other and a node's
//! estimated gain can only shrink as the active set grows.
//!
//! Seeding `v` in a quiescent state activates exactly the nodes reachable from `v` over live
//! edges inside the currently inactive subgraph. Edges among inactive nodes are never
//! observed, so sampling them fresh is the same as sampling from the conditional law.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use rayon::prelude::*;

use crate::model::{DicNetwork, EdgeId, NodeId};
use crate::streams::{coin, derive_seed, sample_key, unit32_pair, unit53};

const SEED_SALT: u64 = 1 << 40;
const EDGE_SALT: u64 = 2 << 40;

/// Largest network for which the all-candidate sweep keeps per-component bitsets.
const SWEEP_NODE_LIMIT: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GainBatch {
    seed: u64,
    samples: u32,
}

impl GainBatch {
    pub fn new(seed: u64, samples: u32) -> Self {
        assert!(samples >= 1, "a gain batch needs at least one sample");
        GainBatch { seed, samples }
    }

    /// Batch derived from a master seed and a purpose path.
    pub fn derived(master: u64, path: &[u64], samples: u32) -> Self {
        GainBatch::new(derive_seed(master, path), samples)
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    #[inline]
    fn key(&self, k: u32) -> u64 {
        sample_key(self.seed, k as u64)
    }

    /// Whether seeding `v` succeeds in sample `k`. Keyed by node only: every attempt is an
    /// independent draw, so the next attempt of a failed node has the same law.
    #[inline]
    pub fn seed_succeeds(&self, net: &DicNetwork, k: u32, v: NodeId) -> bool {
        let p = net.activation(v);
        p >= 1.0 || unit53(coin(self.key(k), SEED_SALT | v.0 as u64)) < p
    }

    #[inline]
    fn edge_live_keyed(net: &DicNetwork, key: u64, e: usize) -> bool {
        let dist = &net.edges()[e].dist;
        let (u_draw, u_live) = unit32_pair(coin(key, EDGE_SALT | e as u64));
        let value = if dist.len() == 1 {
            dist.value(0)
        } else {
            dist.value(dist.atom_for(u_draw))
        };
        u_live < value
    }

    /// Whether edge `e` would transmit in sample `k`.
    pub fn edge_live(&self, net: &DicNetwork, k: u32, e: EdgeId) -> bool {
        Self::edge_live_keyed(net, self.key(k), e.index())
    }

    /// Sum over samples of the number of nodes newly activated by seeding `v`, where
    /// `blocked(k, u)` marks nodes already active in sample `k`.
    pub fn total_gain_with<F>(
        &self,
        net: &DicNetwork,
        v: NodeId,
        scratch: &mut Scratch,
        blocked: F,
    ) -> u64
    where
        F: Fn(u32, usize) -> bool,
    {
        let mut total = 0u64;
        for k in 0..self.samples {
            if blocked(k, v.index()) || !self.seed_succeeds(net, k, v) {
                continue;
            }
            total += scratch.reach(net, self.key(k), v, |u| blocked(k, u)) as u64;
        }
        total
    }

    /// Nodes reachable from `v` in sample `k` without entering blocked nodes, seed
    /// success not checked.
    pub fn reach_set<'s, F>(
        &self,
        net: &DicNetwork,
        k: u32,
        v: NodeId,
        scratch: &'s mut Scratch,
        blocked: F,
    ) -> &'s [u32]
    where
        F: Fn(usize) -> bool,
    {
        scratch.reach(net, self.key(k), v, blocked);
        &scratch.queue
    }

    /// [`Self::total_gain_with`] for a single active set shared by every sample.
    pub fn total_gain(
        &self,
        net: &DicNetwork,
        active: &[bool],
        v: NodeId,
        scratch: &mut Scratch,
    ) -> u64 {
        self.total_gain_with(net, v, scratch, |_, u| active[u])
    }

    pub fn mean(&self, total: u64) -> f64 {
        total as f64 / self.samples as f64
    }

    /// Totals for every node at once; blocked nodes get 0. Equal to calling
    /// [`Self::total_gain`] per node, computed by one reachability sweep per sample.
    pub fn sweep(&self, net: &DicNetwork, active: &[bool]) -> Vec<u64> {
        self.sweep_samples(net, active).0
    }

    /// Like [`Self::sweep`], also returning each sample's sum over nodes of the per-node
    /// spread, in sample order.
    pub fn sweep_samples(&self, net: &DicNetwork, active: &[bool]) -> (Vec<u64>, Vec<u64>) {
        let n = net.node_count();
        let per_sample: Vec<Vec<u32>> = (0..self.samples)
            .into_par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, k| {
                    let key = self.key(k);
                    let reach = if n <= SWEEP_NODE_LIMIT {
                        closure_sizes(net, key, active)
                    } else {
                        net.nodes()
                            .map(|v| {
                                if active[v.index()] {
                                    0
                                } else {
                                    scratch.reach(net, key, v, |u| active[u])
                                }
                            })
                            .collect()
                    };
                    net.nodes()
                        .map(|v| {
                            if self.seed_succeeds(net, k, v) {
                                reach[v.index()]
                            } else {
                                0
                            }
                        })
                        .collect()
                },
            )
            .collect();
        let mut totals = vec![0u64; n];
        let mut sample_sums = Vec::with_capacity(per_sample.len());
        for reach in &per_sample {
            let mut sum = 0u64;
            for (t, &r) in totals.iter_mut().zip(reach) {
                *t += r as u64;
                sum += r as u64;
            }
            sample_sums.push(sum);
        }
        (totals, sample_sums)
    }
}

/// Reusable BFS buffers.
#[derive(Clone, Debug)]
pub struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl Scratch {
    pub fn new(nodes: usize) -> Self {
        Scratch {
            stamp: vec![0; nodes],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Nodes reachable from `v` over live edges, never entering blocked nodes.
    fn reach<F: Fn(usize) -> bool>(
        &mut self,
        net: &DicNetwork,
        key: u64,
        v: NodeId,
        blocked: F,
    ) -> u32 {
        let epoch = self.next_epoch();
        let edges = net.edges();
        self.queue.clear();
        self.queue.push(v.0);
        self.stamp[v.index()] = epoch;
        let mut head = 0;
        while head < self.queue.len() {
            let u = NodeId(self.queue[head]);
            head += 1;
            for e in net.out_range(u) {
                let t = edges[e].dst.index();
                if self.stamp[t] == epoch || blocked(t) {
                    continue;
                }
                if GainBatch::edge_live_keyed(net, key, e) {
                    self.stamp[t] = epoch;
                    self.queue.push(t as u32);
                }
            }
        }
        self.queue.len() as u32
    }
}

/// Size of the live-edge reachable set of every unblocked node in one sample, through the
/// strongly connected component condensation.
fn closure_sizes(net: &DicNetwork, key: u64, active: &[bool]) -> Vec<u32> {
    let n = net.node_count();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    for _ in 0..n {
        graph.add_node(());
    }
    for (e, edge) in net.edges().iter().enumerate() {
        if active[edge.src.index()] || active[edge.dst.index()] {
            continue;
        }
        if GainBatch::edge_live_keyed(net, key, e) {
            graph.add_edge(edge.src.0.into(), edge.dst.0.into(), ());
        }
    }
    // Components come out sinks first, so successors are always finished.
    let components = tarjan_scc(&graph);
    let mut component_of = vec![0usize; n];
    for (c, members) in components.iter().enumerate() {
        for &m in members {
            component_of[m.index()] = c;
        }
    }
    let words = n.div_ceil(64);
    let mut sizes = vec![0u32; n];
    let mut reach: Vec<Option<Vec<u64>>> = vec![None; components.len()];
    for (c, members) in components.iter().enumerate() {
        let mut successors: Vec<usize> = members
            .iter()
            .flat_map(|&m| graph.neighbors(m))
            .map(|t| component_of[t.index()])
            .filter(|&d| d != c)
            .collect();
        successors.sort_unstable();
        successors.dedup();
        let size = if successors.is_empty() && members.len() == 1 {
            1
        } else {
            let mut bits = vec![0u64; words];
            for &m in members {
                bits[m.index() / 64] |= 1 << (m.index() % 64);
            }
            for d in successors {
                match &reach[d] {
                    Some(other) => bits.iter_mut().zip(other).for_each(|(a, b)| *a |= b),
                    None => {
                        let m = components[d][0].index();
                        bits[m / 64] |= 1 << (m % 64);
                    }
                }
            }
            let size = bits.iter().map(|w| w.count_ones()).sum();
            reach[c] = Some(bits);
            size
        };
        for &m in members {
            sizes[m.index()] = if active[m.index()] { 0 } else { size };
        }
    }
    sizes
}

/// Monte Carlo estimate of the expected number of nodes that seeding `v` now would
/// activate, given the quiescent observed state `active`.
pub fn marginal_gain<R: Rng + ?Sized>(
    net: &DicNetwork,
    active: &[bool],
    v: NodeId,
    samples: u32,
    rng: &mut R,
) -> f64 {
    let batch = GainBatch::new(rng.random(), samples);
    let total = batch.total_gain(net, active, v, &mut Scratch::new(net.node_count()));
    batch.mean(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{run_to_quiescence, start, step_round, SeedCommand};
    use crate::fixtures;
    use crate::model::{NetworkParts, PropagationDistribution};
    use crate::realization::condition_sample;
    use crate::streams::{stream, tag};
    use proptest::prelude::*;

    #[test]
    fn certain_failure_has_zero_gain() {
        let net = NetworkParts::new(2, 1)
            .uniform_activation(0.0)
            .edge(0, 1, PropagationDistribution::fixed(1.0).unwrap())
            .build()
            .unwrap();
        let mut rng = stream(1, &[]);
        assert_eq!(
            marginal_gain(&net, &[false, false], NodeId(0), 1000, &mut rng),
            0.0
        );
    }

    #[test]
    fn isolated_node_gain_is_its_activation() {
        let net = NetworkParts::new(1, 1)
            .uniform_activation(0.5)
            .build()
            .unwrap();
        let mut rng = stream(2, &[]);
        let r = 40_000;
        let g = marginal_gain(&net, &[false], NodeId(0), r, &mut rng);
        let sigma = (0.25 / r as f64).sqrt();
        assert!((g - 0.5).abs() < 3.0 * sigma, "{g}");
    }

    #[test]
    fn two_node_gain_matches_enumeration() {
        let net = fixtures::two_node();
        let mut rng = stream(3, &[]);
        let r = 200_000;
        let g = marginal_gain(&net, &[false, false], NodeId(0), r, &mut rng);
        // Gain is 1 + Bernoulli(0.48).
        let sigma = (0.48 * 0.52 / r as f64).sqrt();
        assert!((g - 1.48).abs() < 3.0 * sigma, "{g}");
    }

    #[test]
    fn gain_agrees_with_conditioned_simulation() {
        // Route 1: coin batch. Route 2: sample x from the conditional law given the observed
        // state and let the engine run the seeding to quiescence.
        let net = fixtures::g1().with_uniform_activation(0.7).unwrap();
        let x0 = crate::realization::FullRealization::all_success(&net);
        let (s, _) = step_round(&net, &x0, &start(&net), &SeedCommand::single(NodeId(3))).unwrap();
        let state = run_to_quiescence(&net, &x0, &s);
        let active = state.partial().active_mask().to_vec();
        let r = 100_000u32;
        let batch = GainBatch::derived(5, &[tag::GAIN_BATCH], r);
        let coin_gain =
            batch.mean(batch.total_gain(&net, &active, NodeId(0), &mut Scratch::new(6)));

        let mut rng = stream(6, &[]);
        let mut sum = 0usize;
        let mut sum_sq = 0usize;
        for _ in 0..r {
            let x = condition_sample(&net, state.partial(), &mut rng);
            let (s1, _) = step_round(&net, &x, &state, &SeedCommand::single(NodeId(0))).unwrap();
            let done = run_to_quiescence(&net, &x, &s1);
            let g = done.active_count() - state.active_count();
            sum += g;
            sum_sq += g * g;
        }
        let mean = sum as f64 / r as f64;
        let var = sum_sq as f64 / r as f64 - mean * mean;
        let tol = 4.0 * (2.0 * var / r as f64).sqrt();
        assert!((coin_gain - mean).abs() < tol, "{coin_gain} vs {mean}");
        // Exact value: 0.7 * (1 + q + q^2) with q = 0.48; the path stops at active node 3.
        let exact = 0.7 * (1.0 + 0.48 + 0.48 * 0.48);
        assert!((mean - exact).abs() < tol, "{mean} vs {exact}");
    }

    fn random_net(n: usize, edges: &[(usize, usize, u8)], act: f64) -> DicNetwork {
        let mut parts = NetworkParts::new(n, 1).uniform_activation(act);
        let mut seen = std::collections::HashSet::new();
        for &(a, b, p) in edges {
            let (a, b) = (a % n, b % n);
            if a != b && seen.insert((a, b)) {
                let d = PropagationDistribution::new([(p as f64 / 255.0, 0.5), (1.0, 0.5)])
                    .unwrap_or_else(|_| PropagationDistribution::fixed(1.0).unwrap());
                parts = parts.edge(a, b, d);
            }
        }
        parts.build().unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sweep_equals_per_node_search(
            n in 2usize..24,
            edges in prop::collection::vec((0usize..24, 0usize..24, 0u8..255), 0..80),
            active_bits in prop::collection::vec(any::<bool>(), 24),
            seed in any::<u64>(),
        ) {
            let net = random_net(n, &edges, 0.6);
            let active: Vec<bool> = active_bits[..n].to_vec();
            let batch = GainBatch::new(seed, 16);
            let swept = batch.sweep(&net, &active);
            let mut scratch = Scratch::new(n);
            for v in net.nodes() {
                let direct = if active[v.index()] { 0 } else { batch.total_gain(&net, &active, v, &mut scratch) };
                prop_assert_eq!(swept[v.index()], direct);
            }
        }

        #[test]
        fn gains_shrink_as_activity_grows(
            n in 2usize..16,
            edges in prop::collection::vec((0usize..16, 0usize..16, 0u8..255), 0..50),
            a in prop::collection::vec(any::<bool>(), 16),
            b in prop::collection::vec(any::<bool>(), 16),
            seed in any::<u64>(),
        ) {
            let net = random_net(n, &edges, 0.5);
            let small: Vec<bool> = a[..n].to_vec();
            let large: Vec<bool> = small.iter().zip(&b).map(|(&x, &y)| x || y).collect();
            let batch = GainBatch::new(seed, 8);
            let mut scratch = Scratch::new(n);
            for v in net.nodes().filter(|v| !large[v.index()]) {
                prop_assert!(
                    batch.total_gain(&net, &large, v, &mut scratch)
                        <= batch.total_gain(&net, &small, v, &mut scratch)
                );
            }
        }
    }
}
