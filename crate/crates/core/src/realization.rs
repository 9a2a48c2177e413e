//! Full and partial realizations.
//!
//! A [`FullRealization`] fixes every random outcome of one diffusion: the result of each of
//! the `B` possible seeding attempts on every node, and for every edge the drawn propagation
//! probability together with the outcome of its single activation attempt. A
//! [`PartialRealization`] is what an observer has seen so far. It holds observations only,
//! never latent values.

use rand::Rng;
use thiserror::Error;

use crate::model::{DicNetwork, EdgeId, NodeId};

/// One random coordinate of a realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coordinate {
    /// Outcome of the `attempt`-th (0-based) seeding of a node.
    SeedAttempt { node: NodeId, attempt: usize },
    /// Which support atom an edge's propagation probability takes.
    EdgeDraw(EdgeId),
    /// Whether the edge's single activation attempt succeeds.
    EdgeAttempt(EdgeId),
}

/// A coordinate that the outcome source cannot answer yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("unresolved coordinate {0:?}")]
pub struct Unresolved(pub Coordinate);

/// Read access to realization coordinates, as consumed by the diffusion engine.
///
/// A [`FullRealization`] answers everything. The exact oracle supplies partial assignments
/// that report [`Unresolved`] so it can branch on the missing coordinate.
pub trait Outcomes {
    fn seed_attempt(&self, node: NodeId, attempt: usize) -> Result<bool, Unresolved>;
    fn edge_draw(&self, edge: EdgeId) -> Result<u16, Unresolved>;
    fn edge_attempt(&self, edge: EdgeId) -> Result<bool, Unresolved>;
}

/// Drawn atom and attempt outcome of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeDraw {
    pub atom: u16,
    pub live: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizationError {
    #[error("realization covers {got} nodes, network has {expected}")]
    NodeCount { expected: usize, got: usize },
    #[error("realization covers {got} edges, network has {expected}")]
    EdgeCount { expected: usize, got: usize },
    #[error("node {node} has {got} seed outcomes, budget is {expected}")]
    SeedVector {
        node: NodeId,
        expected: usize,
        got: usize,
    },
    #[error("edge {edge} draws atom {atom}, support has {support} values")]
    DrawOutsideSupport {
        edge: usize,
        atom: u16,
        support: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FullRealization {
    budget: usize,
    /// Node-major `N x B` attempt outcomes.
    seed_outcomes: Vec<bool>,
    edge_draws: Vec<EdgeDraw>,
}

impl FullRealization {
    pub fn new(
        net: &DicNetwork,
        seed_outcomes: Vec<Vec<bool>>,
        edge_draws: Vec<EdgeDraw>,
    ) -> Result<Self, RealizationError> {
        let b = net.budget();
        if seed_outcomes.len() != net.node_count() {
            return Err(RealizationError::NodeCount {
                expected: net.node_count(),
                got: seed_outcomes.len(),
            });
        }
        if edge_draws.len() != net.edge_count() {
            return Err(RealizationError::EdgeCount {
                expected: net.edge_count(),
                got: edge_draws.len(),
            });
        }
        for (i, bits) in seed_outcomes.iter().enumerate() {
            if bits.len() != b {
                return Err(RealizationError::SeedVector {
                    node: NodeId::new(i),
                    expected: b,
                    got: bits.len(),
                });
            }
        }
        let x = FullRealization {
            budget: b,
            seed_outcomes: seed_outcomes.into_iter().flatten().collect(),
            edge_draws,
        };
        x.check_support(net)?;
        Ok(x)
    }

    /// Every seed attempt succeeds and every edge takes its top atom and is live.
    pub fn all_success(net: &DicNetwork) -> Self {
        FullRealization {
            budget: net.budget(),
            seed_outcomes: vec![true; net.node_count() * net.budget()],
            edge_draws: net
                .edges()
                .iter()
                .map(|e| EdgeDraw {
                    atom: (e.dist.len() - 1) as u16,
                    live: true,
                })
                .collect(),
        }
    }

    fn check_support(&self, net: &DicNetwork) -> Result<(), RealizationError> {
        for (i, (d, e)) in self.edge_draws.iter().zip(net.edges()).enumerate() {
            if d.atom as usize >= e.dist.len() {
                return Err(RealizationError::DrawOutsideSupport {
                    edge: i,
                    atom: d.atom,
                    support: e.dist.len(),
                });
            }
        }
        Ok(())
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    #[inline]
    pub fn seed_outcome(&self, v: NodeId, attempt: usize) -> bool {
        self.seed_outcomes[v.index() * self.budget + attempt]
    }

    pub fn seed_outcomes(&self, v: NodeId) -> &[bool] {
        let start = v.index() * self.budget;
        &self.seed_outcomes[start..start + self.budget]
    }

    #[inline]
    pub fn draw(&self, e: EdgeId) -> EdgeDraw {
        self.edge_draws[e.index()]
    }

    pub fn edge_draws(&self) -> &[EdgeDraw] {
        &self.edge_draws
    }

    pub fn set_seed_outcome(&mut self, v: NodeId, attempt: usize, success: bool) {
        self.seed_outcomes[v.index() * self.budget + attempt] = success;
    }

    pub fn set_edge(&mut self, e: EdgeId, draw: EdgeDraw) {
        self.edge_draws[e.index()] = draw;
    }
}

impl Outcomes for FullRealization {
    #[inline]
    fn seed_attempt(&self, node: NodeId, attempt: usize) -> Result<bool, Unresolved> {
        Ok(self.seed_outcome(node, attempt))
    }

    #[inline]
    fn edge_draw(&self, edge: EdgeId) -> Result<u16, Unresolved> {
        Ok(self.edge_draws[edge.index()].atom)
    }

    #[inline]
    fn edge_attempt(&self, edge: EdgeId) -> Result<bool, Unresolved> {
        Ok(self.edge_draws[edge.index()].live)
    }
}

/// Log-probability of a realization. `-inf` marks an impossible realization.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RealizationProbability {
    pub log_prob: f64,
}

impl RealizationProbability {
    pub fn probability(self) -> f64 {
        self.log_prob.exp()
    }
}

/// Observable history of a diffusion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialRealization {
    active: Vec<bool>,
    active_count: usize,
    attempts: Vec<Vec<bool>>,
    draws: Vec<Option<u16>>,
    resolved: Vec<Option<bool>>,
    round: u32,
}

impl PartialRealization {
    /// Nothing observed: no active node, every edge undetermined.
    pub fn empty(net: &DicNetwork) -> Self {
        PartialRealization {
            active: vec![false; net.node_count()],
            active_count: 0,
            attempts: vec![Vec::new(); net.node_count()],
            draws: vec![None; net.edge_count()],
            resolved: vec![None; net.edge_count()],
            round: 0,
        }
    }

    #[inline]
    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v.index()]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| NodeId::new(i))
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    /// Observed outcomes of the seeding attempts on `v`, in order.
    pub fn attempts(&self, v: NodeId) -> &[bool] {
        &self.attempts[v.index()]
    }

    #[inline]
    pub fn attempts_used(&self, v: NodeId) -> usize {
        self.attempts[v.index()].len()
    }

    pub fn total_attempts(&self) -> usize {
        self.attempts.iter().map(Vec::len).sum()
    }

    /// Revealed atom of an edge's propagation probability.
    #[inline]
    pub fn draw(&self, e: EdgeId) -> Option<u16> {
        self.draws[e.index()]
    }

    /// Observed outcome of an edge's activation attempt.
    #[inline]
    pub fn resolved(&self, e: EdgeId) -> Option<bool> {
        self.resolved[e.index()]
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    /// Inactive with seeding attempts left under `budget`.
    #[inline]
    pub fn is_eligible(&self, v: NodeId, budget: usize) -> bool {
        !self.active[v.index()] && self.attempts[v.index()].len() < budget
    }

    pub(crate) fn record_seed_attempt(&mut self, v: NodeId, success: bool) {
        self.attempts[v.index()].push(success);
    }

    /// Returns `false` if `v` was already active.
    pub(crate) fn activate(&mut self, v: NodeId) -> bool {
        if self.active[v.index()] {
            return false;
        }
        self.active[v.index()] = true;
        self.active_count += 1;
        true
    }

    pub(crate) fn reveal_draw(&mut self, e: EdgeId, atom: u16) {
        self.draws[e.index()] = Some(atom);
    }

    pub(crate) fn resolve(&mut self, e: EdgeId, live: bool) {
        self.resolved[e.index()] = Some(live);
    }

    pub(crate) fn advance_round(&mut self) {
        self.round += 1;
    }

    pub(crate) fn reset_round(&mut self) {
        self.round = 0;
    }
}

/// Draws every coordinate independently from the prior.
pub fn sample_full<R: Rng + ?Sized>(net: &DicNetwork, rng: &mut R) -> FullRealization {
    let b = net.budget();
    let mut seed_outcomes = Vec::with_capacity(net.node_count() * b);
    for v in net.nodes() {
        let p = net.activation(v);
        for _ in 0..b {
            seed_outcomes.push(rng.random::<f64>() < p);
        }
    }
    let edge_draws = net
        .edges()
        .iter()
        .map(|e| {
            let atom = e.dist.atom_for(rng.random::<f64>());
            let live = rng.random::<f64>() < e.dist.value(atom);
            EdgeDraw {
                atom: atom as u16,
                live,
            }
        })
        .collect();
    FullRealization {
        budget: b,
        seed_outcomes,
        edge_draws,
    }
}

/// Prior probability of `x`, as a product over every coordinate.
pub fn probability_of(
    net: &DicNetwork,
    x: &FullRealization,
) -> Result<RealizationProbability, RealizationError> {
    if x.seed_outcomes.len() != net.node_count() * net.budget() {
        return Err(RealizationError::NodeCount {
            expected: net.node_count() * net.budget(),
            got: x.seed_outcomes.len(),
        });
    }
    if x.edge_draws.len() != net.edge_count() {
        return Err(RealizationError::EdgeCount {
            expected: net.edge_count(),
            got: x.edge_draws.len(),
        });
    }
    x.check_support(net)?;
    let ln = |p: f64| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
    let mut log_prob = 0.0;
    for v in net.nodes() {
        let p = net.activation(v);
        for &bit in x.seed_outcomes(v) {
            log_prob += ln(if bit { p } else { 1.0 - p });
        }
    }
    for (draw, edge) in x.edge_draws.iter().zip(net.edges()) {
        let atom = draw.atom as usize;
        let value = edge.dist.value(atom);
        log_prob += ln(edge.dist.mass(atom));
        log_prob += ln(if draw.live { value } else { 1.0 - value });
    }
    Ok(RealizationProbability { log_prob })
}

/// True iff every observation recorded in `y` agrees with `x`.
pub fn is_compatible(x: &FullRealization, y: &PartialRealization) -> bool {
    for (i, observed) in y.attempts.iter().enumerate() {
        let v = NodeId::new(i);
        if observed.len() > x.budget {
            return false;
        }
        if observed
            .iter()
            .enumerate()
            .any(|(j, &bit)| x.seed_outcome(v, j) != bit)
        {
            return false;
        }
    }
    for (i, d) in x.edge_draws.iter().enumerate() {
        if let Some(atom) = y.draws[i] {
            if atom != d.atom {
                return false;
            }
        }
        if let Some(live) = y.resolved[i] {
            if live != d.live {
                return false;
            }
        }
    }
    true
}

/// Samples `x` from the prior restricted to realizations compatible with `y`: observed
/// coordinates are copied and everything else is drawn fresh.
pub fn condition_sample<R: Rng + ?Sized>(
    net: &DicNetwork,
    y: &PartialRealization,
    rng: &mut R,
) -> FullRealization {
    let mut x = sample_full(net, rng);
    for v in net.nodes() {
        for (j, &bit) in y.attempts(v).iter().enumerate() {
            x.set_seed_outcome(v, j, bit);
        }
    }
    for (i, edge) in net.edges().iter().enumerate() {
        let e = EdgeId(i as u32);
        if let Some(atom) = y.draw(e) {
            let live = match y.resolved(e) {
                Some(live) => live,
                None => rng.random::<f64>() < edge.dist.value(atom as usize),
            };
            x.set_edge(e, EdgeDraw { atom, live });
        } else if let Some(live) = y.resolved(e) {
            // An attempt is only ever observed after its draw; keep the fresh draw.
            let atom = x.draw(e).atom;
            x.set_edge(e, EdgeDraw { atom, live });
        }
    }
    x
}
