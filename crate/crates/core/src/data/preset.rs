//! Uniform distribution and activation presets.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{DicNetwork, DistributionError, NetworkParts, PropagationDistribution};

/// Law applied to every edge.
#[derive(Clone, Debug, PartialEq)]
pub enum Propagation {
    /// Every edge transmits with the same fixed probability.
    Fixed(f64),
    /// Exponential with the given mean, clipped to 1 and quantized into equal-mass bins.
    Exponential { mean: f64, bins: usize },
    /// Equal mass on each listed value.
    Discrete(Vec<f64>),
}

impl Propagation {
    pub fn distribution(&self) -> Result<PropagationDistribution, DistributionError> {
        match self {
            Propagation::Fixed(p) => PropagationDistribution::fixed(*p),
            Propagation::Exponential { mean, bins } => {
                PropagationDistribution::quantize_exponential(*mean, *bins)
            }
            Propagation::Discrete(values) => PropagationDistribution::uniform(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("unknown preset `{0}`, expected f1:p, f2:mean,bins or f3:v1,v2,...")]
    Unknown(String),
    #[error("bad number `{0}` in preset")]
    Number(String),
    #[error("{0}")]
    Distribution(#[from] DistributionError),
}

/// Parses `f1:p`, `f2:mean,bins` (bins default 16) or `f3:v1,v2,...`.
impl FromStr for Propagation {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| PresetError::Unknown(s.into()))?;
        let nums = args
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| PresetError::Number(t.into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let prop = match (kind.to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("f1", [p]) => Propagation::Fixed(*p),
            ("f2", [mean]) => Propagation::Exponential {
                mean: *mean,
                bins: 16,
            },
            ("f2", [mean, bins]) if bins.fract() == 0.0 && *bins >= 1.0 => {
                Propagation::Exponential {
                    mean: *mean,
                    bins: *bins as usize,
                }
            }
            ("f3", values) if !values.is_empty() => Propagation::Discrete(values.to_vec()),
            _ => return Err(PresetError::Unknown(s.into())),
        };
        prop.distribution()?;
        Ok(prop)
    }
}

impl fmt::Display for Propagation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Propagation::Fixed(p) => write!(f, "f1:{p}"),
            Propagation::Exponential { mean, bins } => write!(f, "f2:{mean},{bins}"),
            Propagation::Discrete(values) => {
                let parts: Vec<String> = values.iter().map(f64::to_string).collect();
                write!(f, "f3:{}", parts.join(","))
            }
        }
    }
}

/// One edge law and one activation probability for a whole network.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub propagation: Propagation,
    pub activation: f64,
}

impl Preset {
    pub fn new(propagation: Propagation, activation: f64) -> Self {
        Preset {
            propagation,
            activation,
        }
    }

    /// Builds a network from a bare topology.
    pub fn apply(
        &self,
        nodes: usize,
        budget: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<DicNetwork, super::DataError> {
        let dist = self.propagation.distribution()?;
        let mut parts = NetworkParts::new(nodes, budget).uniform_activation(self.activation);
        for (u, v) in edges {
            parts = parts.edge(u, v, dist.clone());
        }
        Ok(parts.build()?)
    }

    /// Replaces every edge law and activation probability of `net`.
    pub fn reapply(&self, net: &DicNetwork) -> Result<DicNetwork, super::DataError> {
        let dist = self.propagation.distribution()?;
        Ok(net
            .with_uniform_distribution(&dist)?
            .with_uniform_activation(self.activation)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_presets() {
        assert_eq!(
            "f1:0.01".parse::<Propagation>().unwrap(),
            Propagation::Fixed(0.01)
        );
        assert_eq!(
            "f2:0.01,8".parse::<Propagation>().unwrap(),
            Propagation::Exponential {
                mean: 0.01,
                bins: 8
            }
        );
        assert_eq!(
            "F2:0.01".parse::<Propagation>().unwrap(),
            Propagation::Exponential {
                mean: 0.01,
                bins: 16
            }
        );
        assert_eq!(
            "f3:0.1,0.01,0.001".parse::<Propagation>().unwrap(),
            Propagation::Discrete(vec![0.1, 0.01, 0.001])
        );
        assert!("f1:2".parse::<Propagation>().is_err());
        assert!("f4:1".parse::<Propagation>().is_err());
        assert!("f1:x".parse::<Propagation>().is_err());
        assert!("f2:0.01,0".parse::<Propagation>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["f1:0.01", "f2:0.01,16", "f3:0.1,0.01,0.001"] {
            assert_eq!(s.parse::<Propagation>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn f3_has_three_equal_atoms() {
        let d = "f3:0.1,0.01,0.001"
            .parse::<Propagation>()
            .unwrap()
            .distribution()
            .unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.atoms().iter().all(|a| (a.mass - 1.0 / 3.0).abs() < 1e-12));
        assert!((d.mean() - 0.037).abs() < 1e-12);
    }

    #[test]
    fn apply_sets_everything() {
        let preset = Preset::new(Propagation::Fixed(0.2), 0.5);
        let net = preset.apply(3, 1, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert!(net.activations().iter().all(|&p| p == 0.5));
        assert!(net.edges().iter().all(|e| e.dist.value(0) == 0.2));
    }
}
