//! Non-adaptive hill climbing on the mean-field network.

use crate::model::{DicNetwork, NodeId};
use crate::strategies::celf::CelfQueue;
use crate::strategies::gain::{GainBatch, Scratch};

/// Whether seed failures enter the static selection objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum GreedyObjective {
    /// Expected spread with each seed succeeding at its activation probability.
    #[default]
    WithActivation,
    /// Expected spread as if every seed succeeds.
    WithoutActivation,
}

/// Selects `count` distinct nodes by lazy greedy maximisation of the Monte Carlo expected
/// spread on the network whose edge probabilities are fixed at their means.
///
/// The selection is a greedy prefix: the first `k` nodes are the selection for budget `k`.
/// Returns the nodes and the number of gain evaluations performed.
pub fn static_greedy_select(
    net: &DicNetwork,
    count: usize,
    batch: GainBatch,
    objective: GreedyObjective,
) -> (Vec<NodeId>, u64) {
    let mut flat = net.mean_field();
    if objective == GreedyObjective::WithoutActivation {
        flat = flat
            .with_uniform_activation(1.0)
            .expect("activation 1 is valid");
    }
    let n = flat.node_count();
    let count = count.min(n);
    let samples = batch.samples() as usize;
    let words = n.div_ceil(64);
    // Per-sample coverage bitsets, sample-major.
    let mut covered = vec![0u64; samples * words];
    let is_covered = |covered: &[u64], k: u32, u: usize| {
        covered[k as usize * words + u / 64] >> (u % 64) & 1 == 1
    };

    let initial = batch.sweep(&flat, &vec![false; n]);
    let mut queue = CelfQueue::from_gains(flat.nodes().map(|v| (v, initial[v.index()])));
    let mut chosen = vec![false; n];
    let mut selection = Vec::with_capacity(count);
    let mut scratch = Scratch::new(n);

    for step in 0..count as u32 {
        let picked = queue.select(
            step,
            |v| !chosen[v.index()],
            |v| batch.total_gain_with(&flat, v, &mut scratch, |k, u| is_covered(&covered, k, u)),
        );
        let Some(entry) = picked else { break };
        let v = entry.node;
        chosen[v.index()] = true;
        selection.push(v);
        for k in 0..batch.samples() {
            if is_covered(&covered, k, v.index()) || !batch.seed_succeeds(&flat, k, v) {
                continue;
            }
            let reached: Vec<u32> = batch
                .reach_set(&flat, k, v, &mut scratch, |u| is_covered(&covered, k, u))
                .to_vec();
            for u in reached {
                covered[k as usize * words + u as usize / 64] |= 1 << (u % 64);
            }
        }
    }
    (selection, queue.evaluations())
}
