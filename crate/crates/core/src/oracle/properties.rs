//! Randomized checks that spread over the expanded graph is monotone and submodular in the
//! chosen attempt nodes.
//!
//! Both properties hold realization by realization, since spread there is a reachability
//! count. Checking them pointwise on sampled realizations is therefore a sound test of the
//! expected-spread properties.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{DicNetwork, NetworkParts, PropagationDistribution};
use crate::oracle::auxiliary::{build_auxiliary, AuxNode};
use crate::realization::sample_full;
use crate::streams::{stream, tag};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub trials: u64,
    pub monotonicity_violations: u64,
    pub submodularity_violations: u64,
}

impl PropertyReport {
    pub fn violations(&self) -> u64 {
        self.monotonicity_violations + self.submodularity_violations
    }
}

/// Random network: each ordered pair is an edge with probability `density`, with one or two
/// support values per edge.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    nodes: usize,
    budget: usize,
    density: f64,
) -> DicNetwork {
    let mut parts = NetworkParts::new(nodes, budget);
    parts.activation = (0..nodes).map(|_| rng.random_range(0.1..=1.0)).collect();
    for u in 0..nodes {
        for v in 0..nodes {
            if u == v || !rng.random_bool(density) {
                continue;
            }
            let dist = if rng.random_bool(0.5) {
                PropagationDistribution::fixed(rng.random_range(0.0..=1.0))
            } else {
                let m = rng.random_range(0.05..0.95);
                PropagationDistribution::new([
                    (rng.random_range(0.0..0.5), m),
                    (rng.random_range(0.5..=1.0), 1.0 - m),
                ])
            };
            parts = parts.edge(u, v, dist.expect("generated distribution is valid"));
        }
    }
    parts.build().expect("generated network is valid")
}

/// `trials` draws of a realization and of attempt-node sets `S ⊆ T` and `a ∉ T`, checking
/// `f(S) ≤ f(T)` and `f(S ∪ {a}) − f(S) ≥ f(T ∪ {a}) − f(T)`.
pub fn check_properties(net: &DicNetwork, trials: u64, seed: u64) -> PropertyReport {
    let aux = build_auxiliary(net, net.budget());
    let attempts: Vec<AuxNode> = net
        .nodes()
        .flat_map(|v| (0..net.budget()).map(move |j| (v, j)))
        .map(|(v, j)| aux.attempt_node(v, j))
        .collect();
    let mut rng = stream(seed, &[tag::PROPERTY]);
    let mut report = PropertyReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let x = sample_full(net, &mut rng);
        let mut pool = attempts.clone();
        pool.shuffle(&mut rng);
        let (extra, rest) = pool.split_first().expect("network has at least one node");
        let big_len = rng.random_range(0..=rest.len());
        let small_len = rng.random_range(0..=big_len);
        let big = &rest[..big_len];
        let small = &rest[..small_len];
        let f = |set: &[AuxNode]| aux.spread(net, &x, set) as i64;
        let with = |set: &[AuxNode]| {
            let mut s = set.to_vec();
            s.push(*extra);
            f(&s)
        };
        if f(small) > f(big) {
            report.monotonicity_violations += 1;
        }
        if with(small) - f(small) < with(big) - f(big) {
            report.submodularity_violations += 1;
        }
    }
    report
}

/// `trials` checks, each on a freshly generated `nodes`-node network with budget 2.
pub fn check_random_properties(trials: u64, nodes: usize, seed: u64) -> PropertyReport {
    let mut rng = stream(seed, &[tag::PROPERTY, tag::GENERATOR]);
    let mut report = PropertyReport::default();
    for t in 0..trials {
        let net = random_instance(&mut rng, nodes, 2.min(nodes), 0.3);
        let one = check_properties(&net, 1, seed.wrapping_add(t));
        report.trials += one.trials;
        report.monotonicity_violations += one.monotonicity_violations;
        report.submodularity_violations += one.submodularity_violations;
    }
    report
}
