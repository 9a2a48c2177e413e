//! The `gen` command: write a generated power-law network to JSON.

use std::path::Path;

use dic_core::data::{generate_power_law_with, save_network, Preset, Propagation};
use dic_core::model::DicNetwork;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
    pub exponent: f64,
    pub preset: String,
    pub activation: f64,
    pub budget: usize,
}

pub fn cmd_gen(spec: &GenSpec, out: &Path) -> Result<DicNetwork, CliError> {
    let prop: Propagation = spec
        .preset
        .parse()
        .map_err(|e| CliError::config(format!("{e}")))?;
    let preset = Preset::new(prop, spec.activation);
    let net = generate_power_law_with(
        spec.nodes,
        spec.edges,
        spec.exponent,
        spec.seed,
        &preset,
        spec.budget,
    )?;
    save_network(&net, out)?;
    Ok(net)
}
