//! Small named networks used by tests, the oracle and the CLI.

use crate::model::{DicNetwork, NetworkParts, PropagationDistribution};

/// Two-point law shared by every edge of `G1`: 0.4 with mass 0.8, 0.8 with mass 0.2.
pub fn g1_distribution() -> PropagationDistribution {
    PropagationDistribution::new([(0.4, 0.8), (0.8, 0.2)]).expect("valid fixture distribution")
}

/// Six-node example network with budget 3 and seed activation 0.5.
///
/// A directed path; the edges are
/// v1→v2, v2→v3, v3→v4, v4→v5 and v5→v6 (nodes numbered from 0).
pub fn g1_parts() -> NetworkParts {
    let d = g1_distribution();
    NetworkParts::new(6, 3)
        .uniform_activation(0.5)
        .edge(0, 1, d.clone())
        .edge(1, 2, d.clone())
        .edge(2, 3, d.clone())
        .edge(3, 4, d.clone())
        .edge(4, 5, d)
}

pub fn g1() -> DicNetwork {
    g1_parts().build().expect("valid fixture")
}

/// `u → v` with certain seed activation, budget 1 and the `G1` edge law.
/// Seeding `u` yields an expected spread of `1 + 0.48`.
pub fn two_node() -> DicNetwork {
    NetworkParts::new(2, 1)
        .edge(0, 1, g1_distribution())
        .build()
        .expect("valid fixture")
}

/// Named small instances (N ≤ 4, B = 2, at most two support points per edge) for exact
/// backward-induction checks.
pub fn oracle_instances() -> Vec<(&'static str, DicNetwork)> {
    let two = |a: f64, b: f64, ma: f64| {
        PropagationDistribution::new([(a, ma), (b, 1.0 - ma)]).expect("valid fixture distribution")
    };
    let fixed = |p: f64| PropagationDistribution::fixed(p).expect("valid fixture distribution");
    let build = |parts: NetworkParts| parts.build().expect("valid fixture");

    vec![
        (
            "path3",
            build(
                NetworkParts::new(3, 2)
                    .uniform_activation(0.5)
                    .edge(0, 1, two(0.4, 0.8, 0.8))
                    .edge(1, 2, two(0.4, 0.8, 0.8)),
            ),
        ),
        (
            "star3",
            build(
                NetworkParts::new(3, 2)
                    .uniform_activation(0.5)
                    .edge(0, 1, two(0.2, 0.9, 0.5))
                    .edge(0, 2, two(0.2, 0.9, 0.5)),
            ),
        ),
        (
            "cycle3",
            build(
                NetworkParts::new(3, 2)
                    .uniform_activation(0.6)
                    .edge(0, 1, two(0.1, 0.7, 0.5))
                    .edge(1, 2, two(0.1, 0.7, 0.5))
                    .edge(2, 0, two(0.1, 0.7, 0.5)),
            ),
        ),
        (
            "sure-edge3",
            build(
                NetworkParts::new(3, 2)
                    .uniform_activation(0.5)
                    .edge(0, 1, fixed(1.0))
                    .edge(1, 2, fixed(1.0)),
            ),
        ),
        (
            "edgeless3",
            build({
                let mut p = NetworkParts::new(3, 2);
                p.activation = vec![0.9, 0.5, 0.1];
                p
            }),
        ),
        (
            "path4",
            build(
                NetworkParts::new(4, 2)
                    .uniform_activation(0.5)
                    .edge(0, 1, two(0.4, 0.8, 0.8))
                    .edge(1, 2, two(0.4, 0.8, 0.8))
                    .edge(2, 3, two(0.4, 0.8, 0.8)),
            ),
        ),
        (
            "diamond4",
            build(
                NetworkParts::new(4, 2)
                    .uniform_activation(0.7)
                    .edge(0, 1, two(0.3, 0.9, 0.6))
                    .edge(0, 2, two(0.3, 0.9, 0.6))
                    .edge(1, 3, fixed(0.5))
                    .edge(2, 3, fixed(0.5)),
            ),
        ),
        (
            "star4",
            build({
                let mut p = NetworkParts::new(4, 2)
                    .edge(0, 1, two(0.5, 1.0, 0.5))
                    .edge(0, 2, two(0.5, 1.0, 0.5))
                    .edge(0, 3, two(0.5, 1.0, 0.5));
                p.activation = vec![0.3, 0.9, 0.9, 0.9];
                p
            }),
        ),
        (
            "pairs4",
            build(
                NetworkParts::new(4, 2)
                    .uniform_activation(0.5)
                    .edge(0, 1, two(0.2, 1.0, 0.5))
                    .edge(2, 3, fixed(0.6)),
            ),
        ),
        (
            "reciprocal4",
            build(
                NetworkParts::new(4, 2)
                    .uniform_activation(0.4)
                    .edge(0, 1, two(0.3, 0.8, 0.5))
                    .edge(1, 0, two(0.3, 0.8, 0.5))
                    .edge(1, 2, fixed(0.5))
                    .edge(2, 3, two(0.0, 1.0, 0.5)),
            ),
        ),
        (
            "hetero3",
            build({
                let mut p = NetworkParts::new(3, 2)
                    .edge(0, 1, two(0.5, 1.0, 0.5))
                    .edge(0, 2, two(0.5, 1.0, 0.5))
                    .edge(1, 2, fixed(0.3));
                p.activation = vec![0.2, 0.8, 1.0];
                p
            }),
        ),
        (
            "fan-in4",
            build(
                NetworkParts::new(4, 2)
                    .uniform_activation(0.5)
                    .edge(0, 3, two(0.2, 0.9, 0.7))
                    .edge(1, 3, two(0.2, 0.9, 0.7))
                    .edge(2, 3, two(0.2, 0.9, 0.7))
                    .edge(3, 0, fixed(0.4)),
            ),
        ),
    ]
}
