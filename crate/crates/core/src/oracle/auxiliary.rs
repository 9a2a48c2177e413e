//! Expanded graph in which every random outcome becomes the state of one edge.
//!
//! Each node gets `B` attempt nodes feeding it, one per possible seeding, and each network
//! edge becomes one parallel edge per support value. Under a full realization, an attempt
//! edge is live iff that seeding succeeds, and exactly one parallel edge is live iff the
//! original edge transmits (the one matching the drawn value). Spread is then plain
//! reachability from the chosen attempt nodes.

use std::collections::VecDeque;

use crate::model::{DicNetwork, EdgeId, NodeId};
use crate::realization::FullRealization;

/// Index of a node in the expanded graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuxNode(pub usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub edge: EdgeId,
    pub atom: u16,
    pub value: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct AuxiliaryGraph {
    nodes: usize,
    budget: usize,
    /// `(attempt node, core node)`.
    attempt_edges: Vec<(AuxNode, AuxNode)>,
    value_edges: Vec<ValueEdge>,
    /// First value edge of each network edge.
    value_offsets: Vec<usize>,
}

/// Core node `i` is `i`; attempt `j` of node `i` is `N + i·B + j`.
pub fn build_auxiliary(net: &DicNetwork, budget: usize) -> AuxiliaryGraph {
    let n = net.node_count();
    let attempt_edges = net
        .nodes()
        .flat_map(|v| {
            (0..budget).map(move |j| (AuxNode(n + v.index() * budget + j), AuxNode(v.index())))
        })
        .collect();
    let value_edges = net
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, edge)| {
            edge.dist
                .atoms()
                .iter()
                .enumerate()
                .map(move |(k, atom)| ValueEdge {
                    src: edge.src,
                    dst: edge.dst,
                    edge: EdgeId(e as u32),
                    atom: k as u16,
                    value: atom.value,
                    mass: atom.mass,
                })
        })
        .collect();
    let value_offsets = net
        .edges()
        .iter()
        .scan(0, |acc, edge| {
            let start = *acc;
            *acc += edge.dist.len();
            Some(start)
        })
        .collect();
    AuxiliaryGraph {
        nodes: n,
        budget,
        attempt_edges,
        value_edges,
        value_offsets,
    }
}

impl AuxiliaryGraph {
    pub fn node_count(&self) -> usize {
        self.nodes * self.budget + self.nodes
    }

    pub fn core_node_count(&self) -> usize {
        self.nodes
    }

    pub fn attempt_edges(&self) -> &[(AuxNode, AuxNode)] {
        &self.attempt_edges
    }

    pub fn value_edges(&self) -> &[ValueEdge] {
        &self.value_edges
    }

    pub fn attempt_node(&self, v: NodeId, attempt: usize) -> AuxNode {
        assert!(attempt < self.budget, "attempt index out of range");
        AuxNode(self.nodes + v.index() * self.budget + attempt)
    }

    /// Inverse of [`Self::attempt_node`].
    pub fn attempt_of(&self, a: AuxNode) -> Option<(NodeId, usize)> {
        a.0.checked_sub(self.nodes)
            .filter(|&i| i < self.nodes * self.budget)
            .map(|i| (NodeId::new(i / self.budget), i % self.budget))
    }

    fn value_edge_live(e: &ValueEdge, x: &FullRealization) -> bool {
        let d = x.draw(e.edge);
        d.live && d.atom == e.atom
    }

    /// Number of core nodes connected to any of `seeds` (attempt nodes) over live edges.
    pub fn spread(&self, net: &DicNetwork, x: &FullRealization, seeds: &[AuxNode]) -> usize {
        assert_eq!(
            x.budget(),
            self.budget,
            "realization budget differs from graph budget"
        );
        let mut reached = vec![false; self.nodes];
        let mut queue = VecDeque::new();
        for &a in seeds {
            let (v, j) = self.attempt_of(a).expect("seeds must be attempt nodes");
            if x.seed_outcome(v, j) && !reached[v.index()] {
                reached[v.index()] = true;
                queue.push_back(v);
            }
        }
        let mut count = queue.len();
        while let Some(u) = queue.pop_front() {
            for e in net.out_edges(u) {
                let start = self.value_offsets[e.index()];
                let parallel = &self.value_edges[start..start + net.edge(e).dist.len()];
                let t = net.edge(e).dst;
                if !reached[t.index()] && parallel.iter().any(|ve| Self::value_edge_live(ve, x)) {
                    reached[t.index()] = true;
                    count += 1;
                    queue.push_back(t);
                }
            }
        }
        count
    }

    /// Attempt nodes for a seed multiset: a node listed `m` times uses its first `m` attempts.
    pub fn seed_set(&self, plan: &[NodeId]) -> Vec<AuxNode> {
        let mut used = vec![0usize; self.nodes];
        plan.iter()
            .map(|&v| {
                let j = used[v.index()];
                used[v.index()] += 1;
                self.attempt_node(v, j)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::spread_count;
    use crate::fixtures;
    use crate::model::NetworkParts;
    use crate::realization::sample_full;
    use crate::streams::stream;

    #[test]
    fn g1_counts() {
        let g = build_auxiliary(&fixtures::g1(), 3);
        assert_eq!(g.node_count(), 24);
        assert_eq!(g.attempt_edges().len(), 18);
        assert_eq!(g.value_edges().len(), 10);
    }

    #[test]
    fn single_node_counts() {
        let g = build_auxiliary(&NetworkParts::new(1, 1).build().unwrap(), 1);
        assert_eq!(
            (
                g.node_count(),
                g.attempt_edges().len(),
                g.value_edges().len()
            ),
            (2, 1, 0)
        );
    }

    #[test]
    fn attempt_numbering_round_trips() {
        let g = build_auxiliary(&fixtures::g1(), 3);
        assert_eq!(g.attempt_node(NodeId(0), 0), AuxNode(6));
        assert_eq!(g.attempt_node(NodeId(5), 2), AuxNode(23));
        for a in 6..24 {
            let (v, j) = g.attempt_of(AuxNode(a)).unwrap();
            assert_eq!(g.attempt_node(v, j), AuxNode(a));
        }
        assert_eq!(g.attempt_of(AuxNode(5)), None);
        assert!(g
            .attempt_edges()
            .iter()
            .all(|&(a, c)| g.attempt_of(a).unwrap().0.index() == c.0));
    }

    #[test]
    fn reachability_matches_spread_count() {
        let net = fixtures::g1();
        let g = build_auxiliary(&net, 3);
        let mut rng = stream(1, &[]);
        let plans: [&[u32]; 4] = [&[], &[2], &[0, 2, 2], &[1, 4, 5]];
        for _ in 0..2000 {
            let x = sample_full(&net, &mut rng);
            for plan in plans {
                let plan: Vec<NodeId> = plan.iter().map(|&i| NodeId(i)).collect();
                assert_eq!(
                    g.spread(&net, &x, &g.seed_set(&plan)),
                    spread_count(&net, &x, &plan).unwrap()
                );
            }
        }
    }
}
