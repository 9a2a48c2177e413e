//! Network model: nodes with seed-activation probabilities and directed edges whose
//! propagation probability is itself a finite-support random variable.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for every probability comparison.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Dense node index in `[0, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of an edge in the network's canonical (source, target) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("empty support")]
    Empty,
    #[error("value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("mass {0} outside (0, 1]")]
    MassOutOfRange(f64),
    #[error("mass sum {}", round9(*.0))]
    MassSum(f64),
    #[error("support values not strictly increasing")]
    NotIncreasing,
    #[error("duplicate value {0}")]
    DuplicateValue(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// One point of a propagation distribution's support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// Finite-support law of an edge's propagation probability.
///
/// Values are strictly increasing, lie in `[0, 1]`, and masses sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationDistribution {
    atoms: Vec<Atom>,
}

impl PropagationDistribution {
    /// Builds a distribution from `(value, mass)` pairs given in any order.
    pub fn new(support: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, DistributionError> {
        let mut atoms: Vec<Atom> = support
            .into_iter()
            .map(|(value, mass)| Atom { value, mass })
            .collect();
        if atoms.iter().any(|a| a.value.is_nan()) {
            return Err(DistributionError::ValueOutOfRange(f64::NAN));
        }
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        for pair in atoms.windows(2) {
            if pair[0].value == pair[1].value {
                return Err(DistributionError::DuplicateValue(pair[0].value));
            }
        }
        let dist = PropagationDistribution { atoms };
        dist.check()?;
        Ok(dist)
    }

    /// Wraps a support as given, without sorting or validation. Use [`check`](Self::check)
    /// (or network validation) before relying on it.
    pub fn from_support_unchecked(support: impl IntoIterator<Item = (f64, f64)>) -> Self {
        PropagationDistribution {
            atoms: support
                .into_iter()
                .map(|(value, mass)| Atom { value, mass })
                .collect(),
        }
    }

    pub fn check(&self) -> Result<(), DistributionError> {
        if self.atoms.is_empty() {
            return Err(DistributionError::Empty);
        }
        let mut sum = 0.0;
        for atom in &self.atoms {
            if !(0.0..=1.0).contains(&atom.value) {
                return Err(DistributionError::ValueOutOfRange(atom.value));
            }
            if !(atom.mass > 0.0 && atom.mass <= 1.0 + PROB_TOLERANCE) {
                return Err(DistributionError::MassOutOfRange(atom.mass));
            }
            sum += atom.mass;
        }
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(DistributionError::MassSum(sum));
        }
        if self.atoms.windows(2).any(|w| w[0].value >= w[1].value) {
            return Err(DistributionError::NotIncreasing);
        }
        Ok(())
    }

    /// A single atom at `p`.
    pub fn fixed(p: f64) -> Result<Self, DistributionError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DistributionError::ValueOutOfRange(p));
        }
        Ok(PropagationDistribution {
            atoms: vec![Atom {
                value: p,
                mass: 1.0,
            }],
        })
    }

    /// Equal mass on each of `values`.
    pub fn uniform(values: &[f64]) -> Result<Self, DistributionError> {
        if values.is_empty() {
            return Err(DistributionError::Empty);
        }
        let mass = 1.0 / values.len() as f64;
        Self::new(values.iter().map(|&v| (v, mass)))
    }

    /// Quantizes an exponential law with the given mean, clipped to `[0, 1]`, into `bins`
    /// equal-mass quantile bins. Each atom sits at the conditional mean of its bin; bins lying
    /// entirely above 1 merge into a single atom at value 1.
    pub fn quantize_exponential(mean: f64, bins: usize) -> Result<Self, DistributionError> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(DistributionError::Parameter(format!(
                "mean must be positive, got {mean}"
            )));
        }
        if bins == 0 {
            return Err(DistributionError::Parameter(
                "bins must be at least 1".into(),
            ));
        }
        let rate = 1.0 / mean;
        // Everything is computed in quantile space: for u = F(x), exp(-rate x) = 1 - u.
        let survival_at_one = (-rate).exp();
        let cdf_at_one = 1.0 - survival_at_one;
        // Integral of x f(x) over [q(u), q(v)] expressed via survival values, for v <= F(1).
        let partial_mean = |u: f64, v: f64| -> f64 {
            let term = |w: f64| -> f64 {
                let surv = 1.0 - w;
                if surv <= 0.0 {
                    0.0
                } else {
                    mean * (1.0 - surv.ln()) * surv
                }
            };
            term(u) - term(v)
        };
        let width = 1.0 / bins as f64;
        let mut atoms: Vec<Atom> = Vec::with_capacity(bins);
        for k in 0..bins {
            let lo = k as f64 * width;
            let hi = if k + 1 == bins {
                1.0
            } else {
                (k + 1) as f64 * width
            };
            let value = if lo >= cdf_at_one {
                1.0
            } else if hi <= cdf_at_one {
                partial_mean(lo, hi) / (hi - lo)
            } else {
                let below = partial_mean(lo, cdf_at_one);
                let above = hi - cdf_at_one;
                (below + above) / (hi - lo)
            };
            let value = value.clamp(0.0, 1.0);
            match atoms.last_mut() {
                Some(last) if value <= last.value => last.mass += hi - lo,
                _ => atoms.push(Atom {
                    value,
                    mass: hi - lo,
                }),
            }
        }
        Ok(PropagationDistribution { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    #[inline]
    pub fn value(&self, atom: usize) -> f64 {
        self.atoms[atom].value
    }

    #[inline]
    pub fn mass(&self, atom: usize) -> f64 {
        self.atoms[atom].mass
    }

    /// Expected propagation probability.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.mass).sum()
    }

    /// Inverse-CDF lookup: the atom selected by a uniform draw `u` in `[0, 1)`.
    #[inline]
    pub fn atom_for(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, atom) in self.atoms.iter().enumerate() {
            acc += atom.mass;
            if u < acc {
                return i;
            }
        }
        self.atoms.len() - 1
    }

    /// Atom index whose value equals `value` within [`PROB_TOLERANCE`].
    pub fn atom_of(&self, value: f64) -> Option<usize> {
        self.atoms
            .iter()
            .position(|a| (a.value - value).abs() <= PROB_TOLERANCE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub dist: PropagationDistribution,
}

/// First invariant a candidate network breaks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("budget {budget} exceeds node count {nodes}")]
    BudgetExceedsNodes { budget: usize, nodes: usize },
    #[error("activation vector has {got} entries for {expected} nodes")]
    ActivationLength { expected: usize, got: usize },
    #[error("activation probability {p} of node {node} outside [0, 1]")]
    ActivationOutOfRange { node: NodeId, p: f64 },
    #[error("edge ({src}, {dst}) references a node outside [0, {nodes})")]
    NodeOutOfRange {
        src: NodeId,
        dst: NodeId,
        nodes: usize,
    },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: NodeId, dst: NodeId },
    #[error("edge ({src}, {dst}): {source}")]
    Distribution {
        src: NodeId,
        dst: NodeId,
        source: DistributionError,
    },
}

/// Unvalidated network description. [`NetworkParts::build`] validates and freezes it.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParts {
    pub node_count: usize,
    pub budget: usize,
    pub activation: Vec<f64>,
    pub edges: Vec<Edge>,
}

impl NetworkParts {
    pub fn new(node_count: usize, budget: usize) -> Self {
        NetworkParts {
            node_count,
            budget,
            activation: vec![1.0; node_count],
            edges: Vec::new(),
        }
    }

    pub fn uniform_activation(mut self, p: f64) -> Self {
        self.activation = vec![p; self.node_count];
        self
    }

    pub fn edge(mut self, src: usize, dst: usize, dist: PropagationDistribution) -> Self {
        self.edges.push(Edge {
            src: NodeId::new(src),
            dst: NodeId::new(dst),
            dist,
        });
        self
    }

    pub fn build(self) -> Result<DicNetwork, Violation> {
        validate_network(&self)?;
        Ok(DicNetwork::from_valid_parts(self))
    }
}

/// Checks every structural and probabilistic invariant, returning the first one violated.
pub fn validate_network(parts: &NetworkParts) -> Result<(), Violation> {
    let n = parts.node_count;
    if parts.budget == 0 {
        return Err(Violation::ZeroBudget);
    }
    if parts.budget > n {
        return Err(Violation::BudgetExceedsNodes {
            budget: parts.budget,
            nodes: n,
        });
    }
    if parts.activation.len() != n {
        return Err(Violation::ActivationLength {
            expected: n,
            got: parts.activation.len(),
        });
    }
    for (i, &p) in parts.activation.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Violation::ActivationOutOfRange {
                node: NodeId::new(i),
                p,
            });
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(parts.edges.len());
    for edge in &parts.edges {
        if edge.src.index() >= n || edge.dst.index() >= n {
            return Err(Violation::NodeOutOfRange {
                src: edge.src,
                dst: edge.dst,
                nodes: n,
            });
        }
        if edge.src == edge.dst {
            return Err(Violation::SelfLoop(edge.src));
        }
        if !seen.insert((edge.src, edge.dst)) {
            return Err(Violation::DuplicateEdge {
                src: edge.src,
                dst: edge.dst,
            });
        }
        edge.dist
            .check()
            .map_err(|source| Violation::Distribution {
                src: edge.src,
                dst: edge.dst,
                source,
            })?;
    }
    Ok(())
}

/// A validated, immutable network. Edges are stored in (source, target) order with a
/// compressed out-adjacency index.
#[derive(Clone, Debug, PartialEq)]
pub struct DicNetwork {
    node_count: usize,
    budget: usize,
    activation: Vec<f64>,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
}

impl DicNetwork {
    fn from_valid_parts(parts: NetworkParts) -> Self {
        let NetworkParts {
            node_count,
            budget,
            activation,
            mut edges,
        } = parts;
        edges.sort_by_key(|e| (e.src, e.dst));
        let mut out_offsets = vec![0usize; node_count + 1];
        for e in &edges {
            out_offsets[e.src.index() + 1] += 1;
        }
        for i in 0..node_count {
            out_offsets[i + 1] += out_offsets[i];
        }
        DicNetwork {
            node_count,
            budget,
            activation,
            edges,
            out_offsets,
        }
    }

    pub fn to_parts(&self) -> NetworkParts {
        NetworkParts {
            node_count: self.node_count,
            budget: self.budget,
            activation: self.activation.clone(),
            edges: self.edges.clone(),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn budget(&self) -> usize {
        self.budget
    }

    #[inline]
    pub fn activation(&self, v: NodeId) -> f64 {
        self.activation[v.index()]
    }

    pub fn activations(&self) -> &[f64] {
        &self.activation
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator + Clone {
        (0..self.node_count).map(NodeId::new)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    /// Ids of the edges leaving `v`, in target order.
    #[inline]
    pub fn out_edges(&self, v: NodeId) -> impl ExactSizeIterator<Item = EdgeId> + Clone {
        self.out_range(v).map(|i| EdgeId(i as u32))
    }

    #[inline]
    pub(crate) fn out_range(&self, v: NodeId) -> Range<usize> {
        self.out_offsets[v.index()]..self.out_offsets[v.index() + 1]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_range(v).len()
    }

    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<EdgeId> {
        let range = self.out_range(src);
        self.edges[range.clone()]
            .binary_search_by_key(&dst, |e| e.dst)
            .ok()
            .map(|i| EdgeId((range.start + i) as u32))
    }

    /// Same network under a different budget.
    pub fn with_budget(&self, budget: usize) -> Result<Self, Violation> {
        let mut parts = self.to_parts();
        parts.budget = budget;
        parts.build()
    }

    pub fn with_uniform_activation(&self, p: f64) -> Result<Self, Violation> {
        self.to_parts().uniform_activation(p).build()
    }

    /// Same topology with every edge distribution replaced by `dist`.
    pub fn with_uniform_distribution(
        &self,
        dist: &PropagationDistribution,
    ) -> Result<Self, Violation> {
        let mut parts = self.to_parts();
        for e in &mut parts.edges {
            e.dist = dist.clone();
        }
        parts.build()
    }

    /// Every edge distribution collapsed to a single atom at its mean.
    pub fn mean_field(&self) -> Self {
        let mut parts = self.to_parts();
        for e in &mut parts.edges {
            let mean = e.dist.mean().clamp(0.0, 1.0);
            e.dist = PropagationDistribution::fixed(mean).expect("mean lies in [0, 1]");
        }
        DicNetwork::from_valid_parts(parts)
    }

    /// Largest support size over all edges (1 for an edgeless network).
    pub fn max_support(&self) -> usize {
        self.edges.iter().map(|e| e.dist.len()).max().unwrap_or(1)
    }
}
