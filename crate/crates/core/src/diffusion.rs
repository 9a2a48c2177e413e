//! Round-by-round diffusion engine.
//!
//! Within a round, seed attempts and frontier propagation happen simultaneously; nodes
//! activated in round `t` (seeded or infected) propagate in round `t + 1`. A node's outgoing
//! propagation probabilities are revealed the moment it becomes active.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{DicNetwork, NodeId};
use crate::realization::{FullRealization, Outcomes, PartialRealization, Unresolved};
use crate::strategies::{Decision, Observation, Policy};

/// Nodes seeded in one step. Kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SeedCommand {
    nodes: Vec<NodeId>,
}

impl SeedCommand {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        SeedCommand { nodes }
    }

    pub fn single(v: NodeId) -> Self {
        SeedCommand { nodes: vec![v] }
    }

    pub fn wait() -> Self {
        SeedCommand::default()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffusionError {
    #[error("null round: empty seed command while the network is quiescent")]
    NullRound,
    #[error("node {0} is already active")]
    SeedActive(NodeId),
    #[error("node {0} is not in the network")]
    UnknownNode(NodeId),
    #[error("seeding {requested} nodes exceeds the remaining budget {remaining}")]
    BudgetExceeded { requested: usize, remaining: usize },
}

/// Failure of a round against an outcome source that may be incomplete.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvanceError {
    #[error(transparent)]
    Invalid(#[from] DiffusionError),
    #[error(transparent)]
    Unresolved(#[from] Unresolved),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffusionState {
    partial: PartialRealization,
    /// Sorted nodes activated in the most recent round.
    frontier: Vec<NodeId>,
    budget_used: usize,
    quiescent: bool,
}

impl DiffusionState {
    pub fn partial(&self) -> &PartialRealization {
        &self.partial
    }

    pub fn frontier(&self) -> &[NodeId] {
        &self.frontier
    }

    pub fn budget_used(&self) -> usize {
        self.budget_used
    }

    pub fn remaining_budget(&self, net: &DicNetwork) -> usize {
        net.budget() - self.budget_used
    }

    pub fn is_quiescent(&self) -> bool {
        self.quiescent
    }

    pub fn round(&self) -> u32 {
        self.partial.round()
    }

    pub fn active_count(&self) -> usize {
        self.partial.active_count()
    }

    #[inline]
    pub fn is_eligible(&self, net: &DicNetwork, v: NodeId) -> bool {
        self.budget_used < net.budget() && self.partial.is_eligible(v, net.budget())
    }

    /// The same observations with the round counter cleared, for use as a memo key.
    pub(crate) fn canonical(&self) -> DiffusionState {
        let mut out = self.clone();
        out.partial.reset_round();
        out
    }

    /// Inactive nodes with seeding attempts left, in id order.
    pub fn eligible<'a>(&'a self, net: &'a DicNetwork) -> impl Iterator<Item = NodeId> + 'a {
        net.nodes().filter(move |&v| self.is_eligible(net, v))
    }
}

/// What happened in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    /// 1-based index of the round.
    pub round: u32,
    pub seeded: SeedCommand,
    /// Outcome of each seed attempt, aligned with `seeded`.
    pub seed_outcomes: Vec<bool>,
    /// Nodes that became active this round, sorted.
    pub newly_active: Vec<NodeId>,
}

/// Initial state: nothing active, nothing observed.
pub fn start(net: &DicNetwork) -> DiffusionState {
    DiffusionState {
        partial: PartialRealization::empty(net),
        frontier: Vec::new(),
        budget_used: 0,
        quiescent: true,
    }
}

fn validate(
    net: &DicNetwork,
    state: &DiffusionState,
    cmd: &SeedCommand,
) -> Result<(), DiffusionError> {
    if cmd.is_empty() && state.quiescent {
        return Err(DiffusionError::NullRound);
    }
    let remaining = state.remaining_budget(net);
    if cmd.len() > remaining {
        return Err(DiffusionError::BudgetExceeded {
            requested: cmd.len(),
            remaining,
        });
    }
    for &v in cmd.nodes() {
        if v.index() >= net.node_count() {
            return Err(DiffusionError::UnknownNode(v));
        }
        if state.partial.is_active(v) {
            return Err(DiffusionError::SeedActive(v));
        }
    }
    Ok(())
}

/// Executes one round in place against any outcome source.
///
/// On [`AdvanceError::Unresolved`] the state is left partially updated; callers that
/// branch on the missing coordinate must retry from their own copy.
pub fn advance<O: Outcomes + ?Sized>(
    net: &DicNetwork,
    outcomes: &O,
    state: &mut DiffusionState,
    cmd: &SeedCommand,
) -> Result<RoundRecord, AdvanceError> {
    validate(net, state, cmd)?;
    // Propagation is resolved against the activity at the start of the round, so hits are
    // applied only after every frontier edge has been tried.
    let mut hits = Vec::new();
    for &u in &state.frontier {
        for e in net.out_edges(u) {
            let target = net.edge(e).dst;
            if state.partial.is_active(target) || state.partial.resolved(e).is_some() {
                continue;
            }
            let live = outcomes.edge_attempt(e)?;
            state.partial.resolve(e, live);
            if live {
                hits.push(target);
            }
        }
    }

    let mut newly_active = Vec::new();
    let mut seed_outcomes = Vec::with_capacity(cmd.len());
    for &v in cmd.nodes() {
        let attempt = state.partial.attempts_used(v);
        let success = outcomes.seed_attempt(v, attempt)?;
        seed_outcomes.push(success);
        state.partial.record_seed_attempt(v, success);
        if success && state.partial.activate(v) {
            newly_active.push(v);
        }
    }
    for t in hits {
        if state.partial.activate(t) {
            newly_active.push(t);
        }
    }

    for &v in &newly_active {
        for e in net.out_edges(v) {
            let atom = outcomes.edge_draw(e)?;
            state.partial.reveal_draw(e, atom);
        }
    }

    newly_active.sort_unstable();
    state.quiescent = !newly_active.iter().any(|&v| {
        net.out_edges(v)
            .any(|e| !state.partial.is_active(net.edge(e).dst))
    });
    state.frontier = newly_active.clone();
    state.budget_used += cmd.len();
    state.partial.advance_round();
    Ok(RoundRecord {
        round: state.partial.round(),
        seeded: cmd.clone(),
        seed_outcomes,
        newly_active,
    })
}

fn complete(err: AdvanceError) -> DiffusionError {
    match err {
        AdvanceError::Invalid(e) => e,
        AdvanceError::Unresolved(u) => unreachable!("full realization left {u} open"),
    }
}

/// Executes one round against a full realization, returning the successor state.
pub fn step_round(
    net: &DicNetwork,
    x: &FullRealization,
    state: &DiffusionState,
    cmd: &SeedCommand,
) -> Result<(DiffusionState, RoundRecord), DiffusionError> {
    let mut next = state.clone();
    let record = advance(net, x, &mut next, cmd).map_err(complete)?;
    Ok((next, record))
}

/// Runs empty rounds until quiescent, in place, appending their records to `trace`.
pub fn settle<O: Outcomes + ?Sized>(
    net: &DicNetwork,
    outcomes: &O,
    state: &mut DiffusionState,
    trace: &mut Vec<RoundRecord>,
) -> Result<(), AdvanceError> {
    let wait = SeedCommand::wait();
    while !state.quiescent {
        trace.push(advance(net, outcomes, state, &wait)?);
    }
    Ok(())
}

pub fn run_to_quiescence(
    net: &DicNetwork,
    x: &FullRealization,
    state: &DiffusionState,
) -> DiffusionState {
    let mut next = state.clone();
    settle(net, x, &mut next, &mut Vec::new())
        .map_err(complete)
        .expect("waiting rounds are valid");
    next
}

/// Number of nodes reachable over live edges from the successful seed attempts in
/// `seed_plan`. A node listed `m` times is a root iff one of its first `m` attempts succeeds.
pub fn spread_count(
    net: &DicNetwork,
    x: &FullRealization,
    seed_plan: &[NodeId],
) -> Result<usize, DiffusionError> {
    let b = net.budget();
    if seed_plan.len() > b {
        return Err(DiffusionError::BudgetExceeded {
            requested: seed_plan.len(),
            remaining: b,
        });
    }
    let mut times = vec![0usize; net.node_count()];
    for &v in seed_plan {
        if v.index() >= net.node_count() {
            return Err(DiffusionError::UnknownNode(v));
        }
        times[v.index()] += 1;
    }
    let mut reached = vec![false; net.node_count()];
    let mut queue = VecDeque::new();
    for v in net.nodes() {
        let m = times[v.index()];
        if m > 0 && x.seed_outcomes(v)[..m].iter().any(|&bit| bit) {
            reached[v.index()] = true;
            queue.push_back(v);
        }
    }
    let mut count = queue.len();
    while let Some(u) = queue.pop_front() {
        for e in net.out_edges(u) {
            let t = net.edge(e).dst;
            if !reached[t.index()] && x.draw(e).live {
                reached[t.index()] = true;
                count += 1;
                queue.push_back(t);
            }
        }
    }
    Ok(count)
}

/// Complete record of one policy execution.
#[derive(Clone, Debug)]
pub struct PolicyRun {
    pub spread: usize,
    /// Executed seed multiset, in seeding order.
    pub seeds: Vec<NodeId>,
    pub trace: Vec<RoundRecord>,
    pub final_state: DiffusionState,
}

impl PolicyRun {
    pub fn rounds(&self) -> u32 {
        self.final_state.round()
    }
}

/// Drives `policy` until it stops or the budget is exhausted, then lets the diffusion
/// finish. The policy only ever sees observations, never `outcomes`.
pub fn drive<O, P>(
    net: &DicNetwork,
    policy: &mut P,
    outcomes: &O,
) -> Result<PolicyRun, AdvanceError>
where
    O: Outcomes + ?Sized,
    P: Policy + ?Sized,
{
    let mut state = start(net);
    let mut trace = Vec::new();
    let mut seeds = Vec::new();
    loop {
        if state.remaining_budget(net) == 0 {
            break;
        }
        if state.quiescent && state.eligible(net).next().is_none() {
            break;
        }
        let decision = policy.decide(&Observation::new(net, &state));
        let cmd = match decision {
            Decision::Stop => break,
            Decision::Seed(cmd) => cmd,
        };
        let record = advance(net, outcomes, &mut state, &cmd)?;
        seeds.extend_from_slice(cmd.nodes());
        trace.push(record);
    }
    settle(net, outcomes, &mut state, &mut trace)?;
    Ok(PolicyRun {
        spread: state.active_count(),
        seeds,
        trace,
        final_state: state,
    })
}

pub fn run_policy<P: Policy + ?Sized>(
    net: &DicNetwork,
    policy: &mut P,
    x: &FullRealization,
) -> Result<PolicyRun, DiffusionError> {
    drive(net, policy, x).map_err(complete)
}
