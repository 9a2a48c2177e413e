//! Adaptive greedy seeding: wait for quiescence, then seed the node with the largest
//! estimated marginal gain given everything observed so far.

use std::sync::{Arc, OnceLock};

use crate::diffusion::SeedCommand;
use crate::model::{DicNetwork, NodeId};
use crate::strategies::celf::{CelfEntry, CelfQueue};
use crate::strategies::gain::{GainBatch, Scratch};
use crate::strategies::{Decision, Observation, Policy, PolicyFactory};

/// How the argmax is found at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Lazy-forward: re-score only queue heads.
    Lazy,
    /// Re-score every candidate at every step.
    Exhaustive,
}

/// Candidates above this count are re-scored by one sweep instead of one search each.
const SWEEP_THRESHOLD: usize = 64;

type Shared = Arc<OnceLock<Vec<u64>>>;

#[derive(Clone)]
pub struct AdaptiveGreedy {
    batch: GainBatch,
    selection: Selection,
    candidates: Option<Arc<Vec<bool>>>,
    initial: Shared,
    queue: Option<CelfQueue>,
    step: u32,
    last_pick: Option<CelfEntry>,
    evaluations: u64,
    scratch: Option<Scratch>,
}

impl AdaptiveGreedy {
    pub fn new(batch: GainBatch, selection: Selection) -> Self {
        Self::with_parts(batch, selection, None, Shared::default())
    }

    /// Only nodes flagged in `candidates` are ever seeded.
    pub fn restricted(batch: GainBatch, selection: Selection, candidates: Vec<bool>) -> Self {
        Self::with_parts(
            batch,
            selection,
            Some(Arc::new(candidates)),
            Shared::default(),
        )
    }

    fn with_parts(
        batch: GainBatch,
        selection: Selection,
        candidates: Option<Arc<Vec<bool>>>,
        initial: Shared,
    ) -> Self {
        AdaptiveGreedy {
            batch,
            selection,
            candidates,
            initial,
            queue: None,
            step: 0,
            last_pick: None,
            evaluations: 0,
            scratch: None,
        }
    }

    fn is_candidate(&self, obs: &Observation<'_>, v: NodeId) -> bool {
        obs.is_eligible(v) && self.candidates.as_ref().is_none_or(|c| c[v.index()])
    }

    /// Step-0 totals for every node, computed once per shared cache.
    fn initial_totals(&self, net: &DicNetwork) -> &[u64] {
        self.initial
            .get_or_init(|| self.batch.sweep(net, &vec![false; net.node_count()]))
    }

    fn select_lazy(&mut self, obs: &Observation<'_>) -> Option<CelfEntry> {
        let net = obs.net();
        let active = obs.partial().active_mask();
        if self.queue.is_none() {
            let fresh = obs.partial().active_count() == 0;
            if !fresh {
                // Step-0 totals are only upper bounds once something is active.
                self.step = 1;
            }
            let totals = self.initial_totals(net);
            let queue = CelfQueue::from_gains(
                net.nodes()
                    .filter(|&v| self.is_candidate(obs, v))
                    .map(|v| (v, totals[v.index()])),
            );
            self.queue = Some(queue);
        }
        if let Some(prev) = self.last_pick.take() {
            // A failed seed stays a candidate with its old gain as the bound.
            if self.is_candidate(obs, prev.node) {
                self.queue.as_mut().expect("queue initialised").push(prev);
            }
        }
        let scratch = self
            .scratch
            .get_or_insert_with(|| Scratch::new(net.node_count()));
        let batch = self.batch;
        let candidates = self.candidates.clone();
        let keep =
            |v: NodeId| obs.is_eligible(v) && candidates.as_ref().is_none_or(|c| c[v.index()]);
        let gain = |v: NodeId| batch.total_gain(net, active, v, scratch);
        let picked = self
            .queue
            .as_mut()
            .expect("queue initialised")
            .select(self.step, keep, gain);
        self.last_pick = picked;
        picked
    }

    fn select_exhaustive(&mut self, obs: &Observation<'_>) -> Option<CelfEntry> {
        let net = obs.net();
        let active = obs.partial().active_mask();
        let candidates: Vec<NodeId> = net.nodes().filter(|&v| self.is_candidate(obs, v)).collect();
        self.evaluations += candidates.len() as u64;
        let totals: Vec<u64> = if obs.partial().active_count() == 0 {
            let all = self.initial_totals(net);
            candidates.iter().map(|v| all[v.index()]).collect()
        } else if candidates.len() > SWEEP_THRESHOLD {
            let all = self.batch.sweep(net, active);
            candidates.iter().map(|v| all[v.index()]).collect()
        } else {
            let scratch = self
                .scratch
                .get_or_insert_with(|| Scratch::new(net.node_count()));
            candidates
                .iter()
                .map(|&v| self.batch.total_gain(net, active, v, scratch))
                .collect()
        };
        candidates
            .iter()
            .zip(totals)
            .map(|(&node, cached_gain)| CelfEntry {
                node,
                cached_gain,
                computed_at: self.step,
            })
            .max()
    }
}

impl Policy for AdaptiveGreedy {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        if !obs.is_quiescent() {
            return Decision::Seed(SeedCommand::wait());
        }
        if obs.remaining_budget() == 0 {
            return Decision::Stop;
        }
        let picked = match self.selection {
            Selection::Lazy => self.select_lazy(obs),
            Selection::Exhaustive => self.select_exhaustive(obs),
        };
        self.step += 1;
        match picked {
            Some(entry) => Decision::Seed(SeedCommand::single(entry.node)),
            None => Decision::Stop,
        }
    }

    fn gain_evaluations(&self) -> u64 {
        match self.selection {
            Selection::Lazy => self.queue.as_ref().map_or(0, CelfQueue::evaluations),
            Selection::Exhaustive => self.evaluations,
        }
    }
}

/// Builds adaptive greedy policies that share one gain batch and one cache of step-0 gains.
#[derive(Clone)]
pub struct AdaptiveGreedyFactory {
    batch: GainBatch,
    selection: Selection,
    candidates: Option<Arc<Vec<bool>>>,
    initial: Shared,
}

impl AdaptiveGreedyFactory {
    pub fn new(batch: GainBatch, selection: Selection) -> Self {
        AdaptiveGreedyFactory {
            batch,
            selection,
            candidates: None,
            initial: Shared::default(),
        }
    }

    /// Same batch and cache, seeding only flagged nodes.
    pub fn restricted(&self, candidates: Vec<bool>) -> Self {
        AdaptiveGreedyFactory {
            candidates: Some(Arc::new(candidates)),
            ..self.clone()
        }
    }

    pub fn with_selection(&self, selection: Selection) -> Self {
        AdaptiveGreedyFactory {
            selection,
            ..self.clone()
        }
    }

    pub fn batch(&self) -> GainBatch {
        self.batch
    }

    /// Fills the step-0 cache ahead of time.
    pub fn warm(&self, net: &DicNetwork) {
        self.initial
            .get_or_init(|| self.batch.sweep(net, &vec![false; net.node_count()]));
    }
}

impl PolicyFactory for AdaptiveGreedyFactory {
    type Policy = AdaptiveGreedy;

    fn build(&self, _replication: u64) -> AdaptiveGreedy {
        AdaptiveGreedy::with_parts(
            self.batch,
            self.selection,
            self.candidates.clone(),
            self.initial.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::run_policy;
    use crate::model::NetworkParts;
    use crate::realization::{sample_full, FullRealization};
    use crate::streams::stream;

    #[test]
    fn edgeless_picks_follow_activation_order() {
        let mut parts = NetworkParts::new(5, 5);
        parts.activation = vec![0.3, 0.9, 0.1, 0.7, 0.5];
        let net = parts.build().unwrap();
        let x = FullRealization::all_success(&net);
        let mut policy = AdaptiveGreedy::new(GainBatch::new(1, 20_000), Selection::Lazy);
        let run = run_policy(&net, &mut policy, &x).unwrap();
        let order: Vec<u32> = run.seeds.iter().map(|v| v.0).collect();
        assert_eq!(order, vec![1, 3, 4, 0, 2]);
    }

    #[test]
    fn failed_seed_is_retried_when_still_best() {
        // A hub with four certain leaves dominates any leaf even after a failed attempt.
        let mut parts = NetworkParts::new(5, 2).uniform_activation(0.5);
        for leaf in 1..5 {
            parts = parts.edge(
                0,
                leaf,
                crate::model::PropagationDistribution::fixed(1.0).unwrap(),
            );
        }
        let net = parts.build().unwrap();
        let mut x = FullRealization::all_success(&net);
        x.set_seed_outcome(NodeId(0), 0, false);
        let mut policy = AdaptiveGreedy::new(GainBatch::new(2, 4_000), Selection::Lazy);
        let run = run_policy(&net, &mut policy, &x).unwrap();
        assert_eq!(run.seeds, vec![NodeId(0), NodeId(0)]);
        assert_eq!(run.spread, 5);
    }

    #[test]
    fn restricted_policy_never_leaves_its_candidates() {
        let net = crate::fixtures::g1().with_budget(3).unwrap();
        let allowed = vec![false, true, false, true, false, false];
        let mut rng = stream(3, &[]);
        for _ in 0..200 {
            let x = sample_full(&net, &mut rng);
            let mut policy = AdaptiveGreedy::restricted(
                GainBatch::new(4, 200),
                Selection::Lazy,
                allowed.clone(),
            );
            let run = run_policy(&net, &mut policy, &x).unwrap();
            assert!(run.seeds.iter().all(|v| allowed[v.index()]));
        }
    }

    #[test]
    fn lazy_and_exhaustive_agree_on_g1() {
        let net = crate::fixtures::g1();
        let batch = GainBatch::new(5, 500);
        let mut rng = stream(4, &[]);
        for _ in 0..100 {
            let x = sample_full(&net, &mut rng);
            let lazy =
                run_policy(&net, &mut AdaptiveGreedy::new(batch, Selection::Lazy), &x).unwrap();
            let full = run_policy(
                &net,
                &mut AdaptiveGreedy::new(batch, Selection::Exhaustive),
                &x,
            )
            .unwrap();
            assert_eq!(lazy.seeds, full.seeds);
        }
    }
}
