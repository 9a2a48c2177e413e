//! Engine-level invariants checked against independent reference computations.

use proptest::prelude::*;
use rand::Rng;

use dic_core::diffusion::{run_policy, spread_count};
use dic_core::fixtures;
use dic_core::model::{DicNetwork, EdgeId, NodeId};
use dic_core::oracle::random_instance;
use dic_core::realization::{sample_full, EdgeDraw, FullRealization, PartialRealization};
use dic_core::strategies::{
    AdaptiveGreedy, GainBatch, Policy, RandomPolicy, ScriptedPolicy, SeedingPattern, Selection,
};
use dic_core::streams::stream;

#[test]
fn single_step_runs_match_reachability() {
    let net = fixtures::g1();
    let mut rng = stream(31, &[]);
    for _ in 0..10_000 {
        let x = sample_full(&net, &mut rng);
        let k = rng.random_range(1..=3);
        let mut nodes: Vec<NodeId> = (0..k).map(|_| NodeId(rng.random_range(0..6))).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let run = run_policy(&net, &mut ScriptedPolicy::seed_all(nodes.clone()), &x).unwrap();
        assert_eq!(run.spread, spread_count(&net, &x, &nodes).unwrap());
    }
}

/// Replaces every coordinate the observation never saw with a fresh draw.
fn resample_unseen<R: Rng>(
    net: &DicNetwork,
    x: &FullRealization,
    seen: &PartialRealization,
    rng: &mut R,
) -> FullRealization {
    let fresh = sample_full(net, rng);
    let mut y = x.clone();
    for v in net.nodes() {
        for j in seen.attempts_used(v)..net.budget() {
            y.set_seed_outcome(v, j, fresh.seed_outcome(v, j));
        }
    }
    for e in (0..net.edge_count() as u32).map(EdgeId) {
        let atom = seen.draw(e).unwrap_or(fresh.draw(e).atom);
        let live = match seen.resolved(e) {
            Some(live) => live,
            None => rng.random::<f64>() < net.edge(e).dist.value(atom as usize),
        };
        y.set_edge(e, EdgeDraw { atom, live });
    }
    y
}

fn assert_blind<P: Policy + Clone>(net: &DicNetwork, policy: &P, seed: u64) {
    let mut rng = stream(seed, &[]);
    for _ in 0..300 {
        let x = sample_full(net, &mut rng);
        let run = run_policy(net, &mut policy.clone(), &x).unwrap();
        let y = resample_unseen(net, &x, run.final_state.partial(), &mut rng);
        let again = run_policy(net, &mut policy.clone(), &y).unwrap();
        assert_eq!(run.trace, again.trace);
        assert_eq!(run.spread, again.spread);
    }
}

#[test]
fn policies_only_see_observations() {
    let net = fixtures::g1();
    let batch = GainBatch::new(5, 200);
    assert_blind(&net, &AdaptiveGreedy::new(batch, Selection::Lazy), 1);
    assert_blind(&net, &AdaptiveGreedy::new(batch, Selection::Exhaustive), 2);
    let random = RandomPolicy::new(SeedingPattern::a0(3, 6).unwrap(), stream(9, &[]));
    assert_blind(&net, &random, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_respect_budget_and_size(seed in any::<u64>(), nodes in 2usize..8, budget in 1usize..3) {
        let mut rng = stream(seed, &[]);
        let net = random_instance(&mut rng, nodes, budget.min(nodes), 0.4);
        let x = sample_full(&net, &mut rng);
        let pattern = SeedingPattern::a0(net.budget(), nodes).unwrap();
        let mut policy = RandomPolicy::new(pattern, stream(seed, &[1]));
        let run = run_policy(&net, &mut policy, &x).unwrap();
        prop_assert!(run.spread <= nodes);
        prop_assert!(run.seeds.len() <= net.budget());
        prop_assert!(run.final_state.is_quiescent());
        prop_assert_eq!(run.final_state.partial().total_attempts(), run.seeds.len());
    }

    #[test]
    fn reachability_is_monotone_in_the_seed_set(seed in any::<u64>()) {
        let mut rng = stream(seed, &[]);
        let net = random_instance(&mut rng, 6, 2, 0.35);
        let x = sample_full(&net, &mut rng);
        let small = [NodeId(rng.random_range(0..6))];
        let large = [small[0], NodeId(rng.random_range(0..6))];
        prop_assert!(spread_count(&net, &x, &small).unwrap() <= spread_count(&net, &x, &large).unwrap());
    }
}
