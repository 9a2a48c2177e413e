//! Getting networks in and out: edge-list ingestion, synthetic power-law graphs, uniform
//! presets and the JSON network format.

mod edge_list;
mod json;
mod power_law;
mod preset;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{DistributionError, Violation};

pub use edge_list::{load_edge_list, parse_edge_list, Directedness, EdgeListSpec};
pub use json::{
    load_network, network_from_json, network_to_json, save_network, DistSpec, NetworkFile,
};
pub use power_law::{
    generate_power_law, generate_power_law_with, power_law_topology, DEFAULT_EXPONENT,
};
pub use preset::{Preset, PresetError, Propagation};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Network(#[from] Violation),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("cannot generate {target} directed edges on {nodes} nodes: {reason}")]
    Unachievable {
        nodes: usize,
        target: usize,
        reason: &'static str,
    },
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }
}
