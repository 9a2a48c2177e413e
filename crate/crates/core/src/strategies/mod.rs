//! Seeding patterns, the policy contract and the shipped strategies.

mod adaptive;
mod celf;
pub mod gain;
mod greedy;
mod prune;
mod random;

use std::fmt;

use thiserror::Error;

use crate::diffusion::{DiffusionState, SeedCommand};
use crate::model::{DicNetwork, NodeId};
use crate::realization::PartialRealization;

pub use adaptive::{AdaptiveGreedy, AdaptiveGreedyFactory, Selection};
pub use celf::{CelfEntry, CelfQueue};
pub use gain::{marginal_gain, GainBatch};
pub use greedy::{static_greedy_select, GreedyObjective};
pub use prune::{h_greedy_prune, PruneReport, PruneRule};
pub use random::RandomPolicy;

/// What a policy is allowed to see: the network and the observable diffusion state.
#[derive(Clone, Copy)]
pub struct Observation<'a> {
    net: &'a DicNetwork,
    state: &'a DiffusionState,
}

impl<'a> Observation<'a> {
    pub fn new(net: &'a DicNetwork, state: &'a DiffusionState) -> Self {
        Observation { net, state }
    }

    pub fn net(&self) -> &'a DicNetwork {
        self.net
    }

    pub fn state(&self) -> &'a DiffusionState {
        self.state
    }

    pub fn partial(&self) -> &'a PartialRealization {
        self.state.partial()
    }

    pub fn remaining_budget(&self) -> usize {
        self.state.remaining_budget(self.net)
    }

    pub fn is_quiescent(&self) -> bool {
        self.state.is_quiescent()
    }

    pub fn is_eligible(&self, v: NodeId) -> bool {
        self.state.is_eligible(self.net, v)
    }

    pub fn eligible(&self) -> impl Iterator<Item = NodeId> + 'a {
        let (net, state) = (self.net, self.state);
        state.eligible(net)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Seed these nodes this round. An empty command waits one round.
    Seed(SeedCommand),
    /// Spend no more budget.
    Stop,
}

/// An adaptive seeding strategy.
pub trait Policy {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision;

    /// Candidate gain evaluations performed so far.
    fn gain_evaluations(&self) -> u64 {
        0
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        (**self).decide(obs)
    }

    fn gain_evaluations(&self) -> u64 {
        (**self).gain_evaluations()
    }
}

/// Builds one fresh policy per replication.
pub trait PolicyFactory: Sync {
    type Policy: Policy;

    fn build(&self, replication: u64) -> Self::Policy;
}

impl<F, P> PolicyFactory for F
where
    F: Fn(u64) -> P + Sync,
    P: Policy,
{
    type Policy = P;

    fn build(&self, replication: u64) -> P {
        self(replication)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern must be nonempty and seed at least one node in its first step")]
    EmptyFirstStep,
    #[error("pattern seeds {total} nodes, budget is {budget}")]
    OverBudget { total: usize, budget: usize },
    #[error("budget {budget} must lie in [1, {nodes}]")]
    Budget { budget: usize, nodes: usize },
}

/// Number of nodes seeded at each step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeedingPattern {
    Explicit(Vec<usize>),
    /// Seed one node, then wait until nothing more can activate.
    Adaptive,
}

impl SeedingPattern {
    pub fn explicit(schedule: Vec<usize>, budget: usize) -> Result<Self, PatternError> {
        if schedule.first().is_none_or(|&a| a == 0) {
            return Err(PatternError::EmptyFirstStep);
        }
        let total = schedule.iter().sum();
        if total > budget {
            return Err(PatternError::OverBudget { total, budget });
        }
        Ok(SeedingPattern::Explicit(schedule))
    }

    /// One seed per step until the budget is spent.
    pub fn a0(budget: usize, nodes: usize) -> Result<Self, PatternError> {
        if budget == 0 || budget > nodes {
            return Err(PatternError::Budget { budget, nodes });
        }
        let mut schedule = vec![0; nodes];
        schedule[..budget].fill(1);
        Ok(SeedingPattern::Explicit(schedule))
    }

    /// Whole budget in the first step.
    pub fn single_step(budget: usize) -> Self {
        SeedingPattern::Explicit(vec![budget])
    }

    /// Every explicit schedule with a nonzero first entry, entries in `0..=budget`, total at
    /// most `budget` and length at most `len`. Trailing zeros are dropped.
    pub fn enumerate(budget: usize, len: usize) -> Vec<SeedingPattern> {
        fn rec(prefix: &mut Vec<usize>, left: usize, len: usize, out: &mut Vec<SeedingPattern>) {
            if prefix.last().is_some_and(|&a| a > 0) {
                out.push(SeedingPattern::Explicit(prefix.clone()));
            }
            if prefix.len() == len {
                return;
            }
            let lo = usize::from(prefix.is_empty());
            for a in lo..=left {
                prefix.push(a);
                rec(prefix, left - a, len, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), budget, len, &mut out);
        out
    }
}

impl fmt::Display for SeedingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedingPattern::Adaptive => write!(f, "A*"),
            SeedingPattern::Explicit(s) => {
                let parts: Vec<String> = s.iter().map(usize::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

/// Position within a seeding pattern. Zero entries wait a round, except when the network is
/// quiescent, where waiting would be a null round and the entry is skipped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternCursor {
    pattern: SeedingPattern,
    next: usize,
}

/// What the pattern asks for at the current decision point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Seed(usize),
    Wait,
    Done,
}

impl PatternCursor {
    pub fn new(pattern: SeedingPattern) -> Self {
        PatternCursor { pattern, next: 0 }
    }

    pub fn pattern(&self) -> &SeedingPattern {
        &self.pattern
    }

    /// Consumes the next step of the schedule.
    pub fn advance(&mut self, obs: &Observation<'_>) -> Slot {
        let remaining = obs.remaining_budget();
        match &self.pattern {
            SeedingPattern::Adaptive => {
                if !obs.is_quiescent() {
                    Slot::Wait
                } else if remaining > 0 {
                    Slot::Seed(1)
                } else {
                    Slot::Done
                }
            }
            SeedingPattern::Explicit(schedule) => {
                while let Some(&a) = schedule.get(self.next) {
                    self.next += 1;
                    if a > 0 {
                        return Slot::Seed(a.min(remaining));
                    }
                    if !obs.is_quiescent() {
                        return Slot::Wait;
                    }
                }
                Slot::Done
            }
        }
    }
}

/// Issues a fixed list of commands in order, then stops.
#[derive(Clone, Debug)]
pub struct ScriptedPolicy {
    commands: std::vec::IntoIter<SeedCommand>,
}

impl ScriptedPolicy {
    pub fn new(commands: impl IntoIterator<Item = SeedCommand>) -> Self {
        ScriptedPolicy {
            commands: commands.into_iter().collect::<Vec<_>>().into_iter(),
        }
    }

    /// Seeds `nodes` all at once in the first step.
    pub fn seed_all(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        ScriptedPolicy::new([SeedCommand::new(nodes)])
    }
}

impl Policy for ScriptedPolicy {
    fn decide(&mut self, _obs: &Observation<'_>) -> Decision {
        self.commands.next().map_or(Decision::Stop, Decision::Seed)
    }
}

/// Seeds a precomputed node list as a single first step, skipping nodes that are no longer
/// eligible.
#[derive(Clone, Debug)]
pub struct StaticPolicy {
    seeds: Vec<NodeId>,
    issued: bool,
}

impl StaticPolicy {
    pub fn new(seeds: Vec<NodeId>) -> Self {
        StaticPolicy {
            seeds,
            issued: false,
        }
    }
}

impl Policy for StaticPolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        if self.issued {
            return Decision::Stop;
        }
        self.issued = true;
        let cmd = SeedCommand::new(self.seeds.iter().copied().filter(|&v| obs.is_eligible(v)));
        if cmd.is_empty() {
            Decision::Stop
        } else {
            Decision::Seed(cmd)
        }
    }
}

/// Follows a seeding pattern, filling each step with the most preferred eligible nodes.
/// Nodes missing from the preference list come last, in id order.
#[derive(Clone, Debug)]
pub struct PreferencePolicy {
    cursor: PatternCursor,
    preference: Vec<NodeId>,
}

impl PreferencePolicy {
    pub fn new(pattern: SeedingPattern, preference: Vec<NodeId>) -> Self {
        PreferencePolicy {
            cursor: PatternCursor::new(pattern),
            preference,
        }
    }
}

impl Policy for PreferencePolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        match self.cursor.advance(obs) {
            Slot::Done => Decision::Stop,
            Slot::Wait => Decision::Seed(SeedCommand::wait()),
            Slot::Seed(k) => {
                let listed = self.preference.iter().copied();
                let rest = obs.eligible().filter(|v| !self.preference.contains(v));
                let picks: Vec<NodeId> = listed
                    .chain(rest)
                    .filter(|&v| obs.is_eligible(v))
                    .take(k)
                    .collect();
                if picks.is_empty() {
                    Decision::Stop
                } else {
                    Decision::Seed(SeedCommand::new(picks))
                }
            }
        }
    }
}
