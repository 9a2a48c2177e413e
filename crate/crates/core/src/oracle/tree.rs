//! Exact policy values by lazy expansion of the outcome tree.
//!
//! The engine runs against a partial [`Assignment`]. Whenever it consults a coordinate that
//! is not assigned yet, the walk branches on every value of that coordinate and retries the
//! round. Only coordinates the execution actually touches are ever enumerated, which keeps
//! instances tractable whose full realization space is far too large to list.

use crate::diffusion::{advance, run_policy, start, AdvanceError, DiffusionState, SeedCommand};
use crate::model::{DicNetwork, EdgeId, NodeId};
use crate::oracle::enumerate::{enumerate_realizations, ENUMERATION_LIMIT};
use crate::oracle::OracleError;
use crate::realization::{Coordinate, Outcomes, PartialRealization, Unresolved};
use crate::strategies::{Decision, Observation, Policy};

/// Partially assigned realization coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    budget: usize,
    seeds: Vec<Option<bool>>,
    draws: Vec<Option<u16>>,
    attempts: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(net: &DicNetwork) -> Self {
        Assignment {
            budget: net.budget(),
            seeds: vec![None; net.node_count() * net.budget()],
            draws: vec![None; net.edge_count()],
            attempts: vec![None; net.edge_count()],
        }
    }

    pub fn set_seed(&mut self, v: NodeId, attempt: usize, success: bool) {
        self.seeds[v.index() * self.budget + attempt] = Some(success);
    }

    pub fn set_draw(&mut self, e: EdgeId, atom: u16) {
        self.draws[e.index()] = Some(atom);
    }

    pub fn set_attempt(&mut self, e: EdgeId, live: bool) {
        self.attempts[e.index()] = Some(live);
    }

    pub(crate) fn with(&self, c: Coordinate, value: u16) -> Self {
        let mut next = self.clone();
        match c {
            Coordinate::SeedAttempt { node, attempt } => next.set_seed(node, attempt, value == 1),
            Coordinate::EdgeDraw(e) => next.set_draw(e, value),
            Coordinate::EdgeAttempt(e) => next.set_attempt(e, value == 1),
        }
        next
    }
}

impl Outcomes for Assignment {
    fn seed_attempt(&self, node: NodeId, attempt: usize) -> Result<bool, Unresolved> {
        self.seeds[node.index() * self.budget + attempt]
            .ok_or(Unresolved(Coordinate::SeedAttempt { node, attempt }))
    }

    fn edge_draw(&self, edge: EdgeId) -> Result<u16, Unresolved> {
        self.draws[edge.index()].ok_or(Unresolved(Coordinate::EdgeDraw(edge)))
    }

    fn edge_attempt(&self, edge: EdgeId) -> Result<bool, Unresolved> {
        self.attempts[edge.index()].ok_or(Unresolved(Coordinate::EdgeAttempt(edge)))
    }
}

/// Values of `c` with nonzero probability, encoded as `u16` (booleans as 0/1).
///
/// An edge attempt is only ever consulted after its draw has been revealed; the draw is
/// read from `assigned` or, failing that, from the observations in `seen`.
pub(crate) fn branches(
    net: &DicNetwork,
    c: Coordinate,
    assigned: Option<&Assignment>,
    seen: Option<&PartialRealization>,
) -> Vec<(u16, f64)> {
    let coin = |p: f64| {
        [(1u16, p), (0u16, 1.0 - p)]
            .into_iter()
            .filter(|&(_, q)| q > 0.0)
            .collect::<Vec<_>>()
    };
    match c {
        Coordinate::SeedAttempt { node, .. } => coin(net.activation(node)),
        Coordinate::EdgeDraw(e) => net
            .edge(e)
            .dist
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.mass > 0.0)
            .map(|(k, a)| (k as u16, a.mass))
            .collect(),
        Coordinate::EdgeAttempt(e) => {
            let atom = assigned
                .and_then(|a| a.draws[e.index()])
                .or_else(|| seen.and_then(|y| y.draw(e)))
                .expect("attempted edge has a revealed draw");
            coin(net.edge(e).dist.value(atom as usize))
        }
    }
}

struct Walk<'a> {
    net: &'a DicNetwork,
    value: f64,
    leaves: u128,
}

impl Walk<'_> {
    fn leaf(&mut self, prob: f64, spread: usize) -> Result<(), OracleError> {
        self.leaves += 1;
        if self.leaves > ENUMERATION_LIMIT {
            return Err(OracleError::TreeGuard {
                limit: ENUMERATION_LIMIT,
            });
        }
        self.value += prob * spread as f64;
        Ok(())
    }

    /// Mirrors [`crate::diffusion::drive`], branching whenever a coordinate is missing.
    fn walk<P: Policy + Clone>(
        &mut self,
        mut policy: P,
        mut state: DiffusionState,
        assign: Assignment,
        mut pending: Option<SeedCommand>,
        mut stopped: bool,
        prob: f64,
    ) -> Result<(), OracleError> {
        let net = self.net;
        loop {
            let cmd = match pending.take() {
                Some(cmd) => cmd,
                None => {
                    if !stopped
                        && (state.remaining_budget(net) == 0
                            || (state.is_quiescent() && state.eligible(net).next().is_none()))
                    {
                        stopped = true;
                    }
                    let decided = if stopped {
                        None
                    } else {
                        match policy.decide(&Observation::new(net, &state)) {
                            Decision::Stop => {
                                stopped = true;
                                None
                            }
                            Decision::Seed(cmd) => Some(cmd),
                        }
                    };
                    match decided {
                        Some(cmd) => cmd,
                        None if state.is_quiescent() => {
                            return self.leaf(prob, state.active_count())
                        }
                        None => SeedCommand::wait(),
                    }
                }
            };
            let mut next = state.clone();
            match advance(net, &assign, &mut next, &cmd) {
                Ok(_) => state = next,
                Err(AdvanceError::Unresolved(Unresolved(c))) => {
                    for (value, p) in branches(net, c, Some(&assign), None) {
                        self.walk(
                            policy.clone(),
                            state.clone(),
                            assign.with(c, value),
                            Some(cmd.clone()),
                            stopped,
                            prob * p,
                        )?;
                    }
                    return Ok(());
                }
                Err(AdvanceError::Invalid(e)) => return Err(OracleError::Policy(e)),
            }
        }
    }
}

/// `Σ_x P(x) · spread(policy, x)`, exactly, for a policy that is deterministic given its
/// observations. Fails if the outcome tree has more than 2^24 leaves.
pub fn exact_policy_value<P: Policy + Clone>(
    net: &DicNetwork,
    policy: &P,
) -> Result<f64, OracleError> {
    let mut walk = Walk {
        net,
        value: 0.0,
        leaves: 0,
    };
    walk.walk(
        policy.clone(),
        start(net),
        Assignment::empty(net),
        None,
        false,
        1.0,
    )?;
    Ok(walk.value)
}

/// The same quantity by brute force over every realization; subject to the enumeration
/// guard.
pub fn exact_policy_value_enumerated<P: Policy + Clone>(
    net: &DicNetwork,
    policy: &P,
) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for (x, p) in enumerate_realizations(net)? {
        if p == 0.0 {
            continue;
        }
        let run = run_policy(net, &mut policy.clone(), &x).map_err(OracleError::Policy)?;
        total += p * run.spread as f64;
    }
    Ok(total)
}
