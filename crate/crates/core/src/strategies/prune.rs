//! Candidate pruning by a lower one-sigma control on single-seed spread.

use crate::model::{DicNetwork, NodeId};
use crate::strategies::gain::GainBatch;

/// Which spread the one-sigma control limit is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PruneRule {
    /// Standard deviation across samples of the node-averaged spread `Σ_v H(v) / N`.
    #[default]
    AverageSpread,
    /// Standard deviation across nodes of the per-node estimates. On bimodal spread
    /// distributions the limit falls below zero and nothing is pruned.
    Population,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruneReport {
    /// Estimated expected single-seed spread of every node, seed failures included.
    pub spread: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub rule: PruneRule,
    /// Nodes whose estimate reaches `mean - std`.
    pub candidates: Vec<bool>,
}

impl PruneReport {
    pub fn threshold(&self) -> f64 {
        self.mean - self.std
    }

    pub fn kept(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.candidates
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| NodeId::new(i))
    }

    pub fn pruned_fraction(&self) -> f64 {
        let pruned = self.candidates.iter().filter(|&&c| !c).count();
        pruned as f64 / self.candidates.len() as f64
    }
}

fn mean_std(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Estimates every node's single-seed spread from the batch's samples and keeps the nodes
/// at or above the lower one-sigma control limit.
pub fn h_greedy_prune(net: &DicNetwork, batch: GainBatch, rule: PruneRule) -> PruneReport {
    let (totals, sample_sums) = batch.sweep_samples(net, &vec![false; net.node_count()]);
    let spread: Vec<f64> = totals.iter().map(|&t| batch.mean(t)).collect();
    let (mean, std) = match rule {
        PruneRule::Population => mean_std(spread.iter().copied()),
        PruneRule::AverageSpread => {
            let n = net.node_count() as f64;
            let (_, std) = mean_std(sample_sums.iter().map(|&s| s as f64 / n));
            (spread.iter().sum::<f64>() / n, std)
        }
    };
    // The largest estimate always clears mean - std; the tolerance guards rounding.
    let limit = mean - std - 1e-9;
    let candidates = spread.iter().map(|&h| h >= limit).collect();
    PruneReport {
        spread,
        mean,
        std,
        rule,
        candidates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NetworkParts, PropagationDistribution};

    fn ring(n: usize) -> DicNetwork {
        let mut parts = NetworkParts::new(n, 1);
        for i in 0..n {
            parts = parts.edge(i, (i + 1) % n, PropagationDistribution::fixed(1.0).unwrap());
        }
        parts.build().unwrap()
    }

    #[test]
    fn symmetric_ring_keeps_everything() {
        for rule in [PruneRule::Population, PruneRule::AverageSpread] {
            let report = h_greedy_prune(&ring(12), GainBatch::new(1, 100), rule);
            assert!(report.spread.iter().all(|&h| h == 12.0));
            assert_eq!(report.pruned_fraction(), 0.0);
        }
    }

    #[test]
    fn star_leaves_fall_below_the_limit() {
        // Center reaches 1 + k leaves surely; leaves reach only themselves.
        let k = 9;
        let mut parts = NetworkParts::new(k + 1, 1);
        for leaf in 1..=k {
            parts = parts.edge(0, leaf, PropagationDistribution::fixed(1.0).unwrap());
        }
        let net = parts.build().unwrap();
        let report = h_greedy_prune(&net, GainBatch::new(2, 50), PruneRule::Population);
        // Population: values {10, 1 x 9}, mean 1.9, std 2.7; nothing is below -0.8.
        assert!((report.mean - 1.9).abs() < 1e-12);
        assert!((report.std - 2.7).abs() < 1e-12);
        assert_eq!(report.pruned_fraction(), 0.0);
        let report = h_greedy_prune(&net, GainBatch::new(2, 50), PruneRule::AverageSpread);
        // Deterministic cascade: every sample has the same average, so the std is 0.
        assert!(report.std < 1e-12);
        assert_eq!(report.kept().collect::<Vec<_>>(), vec![NodeId(0)]);
    }

    #[test]
    fn maximum_is_always_kept() {
        let net = crate::fixtures::g1();
        for seed in 0..20 {
            for rule in [PruneRule::Population, PruneRule::AverageSpread] {
                let report = h_greedy_prune(&net, GainBatch::new(seed, 30), rule);
                let best = report
                    .spread
                    .iter()
                    .cloned()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap()
                    .0;
                assert!(report.candidates[best]);
            }
        }
    }
}
