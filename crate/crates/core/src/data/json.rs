//! JSON network files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::model::{DicNetwork, Edge, NetworkParts, NodeId, PropagationDistribution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActivationSpec {
    Uniform(f64),
    PerNode(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Fixed { p: f64 },
    Uniform { values: Vec<f64> },
    Discrete { support: Vec<(f64, f64)> },
    Exp { mean: f64, bins: usize },
}

impl DistSpec {
    fn build(&self) -> Result<PropagationDistribution, DataError> {
        Ok(match self {
            DistSpec::Fixed { p } => PropagationDistribution::fixed(*p)?,
            DistSpec::Uniform { values } => PropagationDistribution::uniform(values)?,
            DistSpec::Discrete { support } => {
                PropagationDistribution::new(support.iter().copied())?
            }
            DistSpec::Exp { mean, bins } => {
                PropagationDistribution::quantize_exponential(*mean, *bins)?
            }
        })
    }

    fn describe(dist: &PropagationDistribution) -> Self {
        match dist.atoms() {
            [only] if only.mass == 1.0 => DistSpec::Fixed { p: only.value },
            atoms => DistSpec::Discrete {
                support: atoms.iter().map(|a| (a.value, a.mass)).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub src: u32,
    pub dst: u32,
    pub dist: DistSpec,
}

/// On-disk form of a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: usize,
    pub budget: usize,
    pub activation: ActivationSpec,
    pub edges: Vec<EdgeSpec>,
}

impl NetworkFile {
    pub fn describe(net: &DicNetwork) -> Self {
        let acts = net.activations();
        let activation = match acts.first() {
            Some(&a) if acts.iter().all(|&b| b == a) => ActivationSpec::Uniform(a),
            _ => ActivationSpec::PerNode(acts.to_vec()),
        };
        NetworkFile {
            nodes: net.node_count(),
            budget: net.budget(),
            activation,
            edges: net
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    src: e.src.0,
                    dst: e.dst.0,
                    dist: DistSpec::describe(&e.dist),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<DicNetwork, DataError> {
        let activation = match &self.activation {
            ActivationSpec::Uniform(p) => vec![*p; self.nodes],
            ActivationSpec::PerNode(v) => v.clone(),
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: NodeId(e.src),
                    dst: NodeId(e.dst),
                    dist: e.dist.build()?,
                })
            })
            .collect::<Result<_, DataError>>()?;
        Ok(NetworkParts {
            node_count: self.nodes,
            budget: self.budget,
            activation,
            edges,
        }
        .build()?)
    }
}

pub fn network_to_json(net: &DicNetwork) -> String {
    serde_json::to_string_pretty(&NetworkFile::describe(net)).expect("network file serializes")
}

pub fn network_from_json(text: &str) -> Result<DicNetwork, DataError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: NetworkFile = serde_path_to_error::deserialize(de).map_err(schema_error)?;
    file.build()
}

fn schema_error(e: serde_path_to_error::Error<serde_json::Error>) -> DataError {
    DataError::Schema {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    }
}

pub fn save_network(net: &DicNetwork, path: &Path) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &NetworkFile::describe(net))
        .map_err(|e| DataError::io(path, e.into()))?;
    out.write_all(b"\n")
        .and_then(|()| out.flush())
        .map_err(|e| DataError::io(path, e))
}

pub fn load_network(path: &Path) -> Result<DicNetwork, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_reader(BufReader::new(file));
    let file: NetworkFile = serde_path_to_error::deserialize(de).map_err(schema_error)?;
    file.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Violation;

    #[test]
    fn g1_round_trip() {
        let net = fixtures::g1();
        assert_eq!(network_from_json(&network_to_json(&net)).unwrap(), net);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g1.json");
        save_network(&net, &path).unwrap();
        assert_eq!(load_network(&path).unwrap(), net);
    }

    #[test]
    fn every_dist_form_parses() {
        let text = r#"{
            "nodes": 3, "budget": 2, "activation": [1, 0.5, 0.25],
            "edges": [
                {"src": 0, "dst": 1, "dist": {"type": "fixed", "p": 0.3}},
                {"src": 1, "dst": 2, "dist": {"type": "uniform", "values": [0.1, 0.2]}},
                {"src": 2, "dst": 0, "dist": {"type": "discrete", "support": [[0.8, 0.2], [0.4, 0.8]]}},
                {"src": 0, "dst": 2, "dist": {"type": "exp", "mean": 0.01, "bins": 4}}
            ]
        }"#;
        let net = network_from_json(text).unwrap();
        assert_eq!(net.edge_count(), 4);
        assert_eq!(net.activations(), [1.0, 0.5, 0.25]);
        assert_eq!(net.max_support(), 4);
        assert_eq!(network_from_json(&network_to_json(&net)).unwrap(), net);
    }

    #[test]
    fn scalar_activation_broadcasts() {
        let net = network_from_json(r#"{"nodes": 2, "budget": 1, "activation": 0.5, "edges": []}"#)
            .unwrap();
        assert_eq!(net.activations(), [0.5, 0.5]);
    }

    #[test]
    fn missing_field_is_named() {
        let err = network_from_json(r#"{"nodes": 2, "budget": 1, "activation": 0.5}"#).unwrap_err();
        assert!(err.to_string().contains("edges"), "{err}");
        let err = network_from_json(
            r#"{"nodes": 2, "budget": 1, "activation": 0.5, "edges": [{"src": 0, "dst": 1, "dist": {"type": "fixed"}}]}"#,
        )
        .unwrap_err();
        let DataError::Schema { path, message } = err else {
            panic!("wrong error")
        };
        assert_eq!(path, "edges[0].dist");
        assert!(message.contains("`p`"), "{message}");
    }

    #[test]
    fn truncated_file_is_a_schema_error() {
        let full = network_to_json(&fixtures::g1());
        let cut = &full[..full.len() / 2];
        assert!(matches!(
            network_from_json(cut),
            Err(DataError::Schema { .. })
        ));
    }

    #[test]
    fn invalid_networks_rejected() {
        let err = network_from_json(
            r#"{"nodes": 2, "budget": 1, "activation": 0.5, "edges": [{"src": 0, "dst": 0, "dist": {"type": "fixed", "p": 0.1}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DataError::Network(Violation::SelfLoop(_))));
        let err = network_from_json(r#"{"nodes": 2, "budget": 3, "activation": 0.5, "edges": []}"#)
            .unwrap_err();
        assert!(matches!(
            err,
            DataError::Network(Violation::BudgetExceedsNodes { .. })
        ));
    }
}
