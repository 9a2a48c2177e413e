//! Experiment configuration, from flags or from a JSON file of the same shape.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use dic_core::data::{
    generate_power_law_with, load_edge_list, load_network, Directedness, EdgeListSpec, Preset,
    Propagation, DEFAULT_EXPONENT,
};
use dic_core::fixtures;
use dic_core::model::DicNetwork;
use dic_core::strategies::{GreedyObjective, PruneRule};

use crate::error::CliError;

pub const DEFAULT_PRESET: &str = "f1:0.01";
pub const DEFAULT_ACTIVATION: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSource {
    /// A network JSON file, or a whitespace edge list for any other extension.
    File {
        path: PathBuf,
        #[serde(default)]
        directedness: DirectednessName,
    },
    Generator {
        nodes: usize,
        edges: usize,
        seed: u64,
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    Fixture(String),
}

fn default_exponent() -> f64 {
    DEFAULT_EXPONENT
}

impl FromStr for NetworkSource {
    type Err = CliError;

    /// Parses the `--gen n,edges,seed` form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || CliError::config(format!("expected --gen n,edges,seed, got `{s}`"));
        let [n, e, seed] = parts[..] else {
            return Err(bad());
        };
        Ok(NetworkSource::Generator {
            nodes: n.parse().map_err(|_| bad())?,
            edges: e.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
            exponent: DEFAULT_EXPONENT,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectednessName {
    #[default]
    AsIs,
    Reciprocate,
    Reverse,
}

impl From<DirectednessName> for Directedness {
    fn from(d: DirectednessName) -> Self {
        match d {
            DirectednessName::AsIs => Directedness::AsIs,
            DirectednessName::Reciprocate => Directedness::Reciprocate,
            DirectednessName::Reverse => Directedness::Reverse,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    AGreedy,
    HGreedy,
    Greedy,
    Random,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::AGreedy,
        StrategyKind::HGreedy,
        StrategyKind::Greedy,
        StrategyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::AGreedy => "a-greedy",
            StrategyKind::HGreedy => "h-greedy",
            StrategyKind::Greedy => "greedy",
            StrategyKind::Random => "random",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                CliError::config(format!(
                    "unknown strategy `{s}` (a-greedy, h-greedy, greedy, random)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneRuleName {
    #[default]
    AverageSpread,
    Population,
}

impl From<PruneRuleName> for PruneRule {
    fn from(r: PruneRuleName) -> Self {
        match r {
            PruneRuleName::AverageSpread => PruneRule::AverageSpread,
            PruneRuleName::Population => PruneRule::Population,
        }
    }
}

/// Whether the static Greedy baseline counts seed failures when choosing its seeds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyObjectiveName {
    #[default]
    WithActivation,
    WithoutActivation,
}

impl From<GreedyObjectiveName> for GreedyObjective {
    fn from(g: GreedyObjectiveName) -> Self {
        match g {
            GreedyObjectiveName::WithActivation => GreedyObjective::WithActivation,
            GreedyObjectiveName::WithoutActivation => GreedyObjective::WithoutActivation,
        }
    }
}

/// Parses `a..b` or `a..b:step` (inclusive) or a comma list.
pub fn parse_budgets(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::config(format!(
            "bad budget grid `{s}`, expected a..b[:step] or a,b,c"
        ))
    };
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    /// `f1:p`, `f2:mean,bins` or `f3:v1,v2,...`; overrides a network file's edge laws.
    pub preset: Option<String>,
    /// Seed activation probability for every node; overrides a network file's values.
    pub activation: Option<f64>,
    pub strategies: Vec<StrategyKind>,
    pub budgets: Vec<usize>,
    /// Samples per gain estimate.
    #[serde(rename = "R")]
    pub gain_samples: u32,
    /// Samples per single-seed estimate in the pruning pre-pass.
    #[serde(rename = "R_pre")]
    pub prune_samples: u32,
    pub replications: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub prune_rule: PruneRuleName,
    pub greedy_objective: GreedyObjectiveName,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network: NetworkSource::Fixture("g1".into()),
            preset: None,
            activation: None,
            strategies: StrategyKind::ALL.to_vec(),
            budgets: vec![1, 2, 3],
            gain_samples: 10_000,
            prune_samples: 2_000,
            replications: 100,
            master_seed: 1,
            workers: 1,
            prune_rule: PruneRuleName::default(),
            greedy_objective: GreedyObjectiveName::default(),
            out: None,
        }
    }
}

/// Reads a config file. A run's metadata sidecar is accepted too, using its `config` entry.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("config") => {
            map.remove("config").unwrap_or_default()
        }
        other => other,
    };
    serde_json::from_value(value).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn max_budget(&self) -> usize {
        self.budgets.iter().copied().max().unwrap_or(1)
    }

    fn preset(&self) -> Result<Option<Preset>, CliError> {
        if self.preset.is_none() && self.activation.is_none() {
            return Ok(None);
        }
        let prop: Propagation = self
            .preset
            .as_deref()
            .unwrap_or(DEFAULT_PRESET)
            .parse()
            .map_err(|e| CliError::config(format!("{e}")))?;
        Ok(Some(Preset::new(
            prop,
            self.activation.unwrap_or(DEFAULT_ACTIVATION),
        )))
    }

    /// Materialises the network with budget equal to the largest budget in the grid.
    pub fn build_network(&self) -> Result<DicNetwork, CliError> {
        self.network_with_budget(Some(self.max_budget()))
    }

    /// Materialises the network. Without a budget, files and fixtures keep their own and
    /// generated or edge-list networks get budget 1.
    pub fn network_with_budget(&self, budget: Option<usize>) -> Result<DicNetwork, CliError> {
        let explicit = self.preset()?;
        let preset = || {
            explicit.clone().unwrap_or_else(|| {
                Preset::new(
                    DEFAULT_PRESET.parse().expect("valid default"),
                    DEFAULT_ACTIVATION,
                )
            })
        };
        let overridden = |mut net: DicNetwork| -> Result<DicNetwork, CliError> {
            if let Some(p) = &explicit {
                if self.preset.is_some() {
                    let dist = p
                        .propagation
                        .distribution()
                        .map_err(|e| CliError::config(e.to_string()))?;
                    net = net
                        .with_uniform_distribution(&dist)
                        .map_err(|e| CliError::config(e.to_string()))?;
                }
                if let Some(a) = self.activation {
                    net = net
                        .with_uniform_activation(a)
                        .map_err(|e| CliError::config(e.to_string()))?;
                }
            }
            match budget {
                Some(b) => net
                    .with_budget(b)
                    .map_err(|e| CliError::config(e.to_string())),
                None => Ok(net),
            }
        };
        let budget = budget.unwrap_or(1);
        match &self.network {
            NetworkSource::File { path, directedness } => {
                if path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("json"))
                {
                    overridden(load_network(path)?)
                } else {
                    let spec = EdgeListSpec {
                        path: path.clone(),
                        directedness: (*directedness).into(),
                    };
                    Ok(load_edge_list(&spec, &preset(), budget)?)
                }
            }
            NetworkSource::Generator {
                nodes,
                edges,
                seed,
                exponent,
            } => Ok(generate_power_law_with(
                *nodes,
                *edges,
                *exponent,
                *seed,
                &preset(),
                budget,
            )?),
            NetworkSource::Fixture(name) => {
                let net = match name.as_str() {
                    "g1" => fixtures::g1(),
                    "two-node" => fixtures::two_node(),
                    other => {
                        return Err(CliError::config(format!(
                            "unknown fixture `{other}` (g1, two-node)"
                        )));
                    }
                };
                overridden(net)
            }
        }
    }

    /// Checks everything that does not need the network.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.strategies.is_empty() {
            return Err(CliError::config("no strategies given"));
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(CliError::config(
                "budgets must be a nonempty list of positive integers",
            ));
        }
        if self.replications == 0 {
            return Err(CliError::config("replications must be at least 1"));
        }
        if self.workers == 0 {
            return Err(CliError::config("workers must be at least 1"));
        }
        if self.gain_samples == 0 || self.prune_samples == 0 {
            return Err(CliError::config("R and R_pre must be at least 1"));
        }
        if let Some(a) = self.activation {
            if !(0.0..=1.0).contains(&a) {
                return Err(CliError::config(format!("activation {a} outside [0, 1]")));
            }
        }
        self.preset()?;
        Ok(())
    }

    /// Checks the budget grid against the network size.
    pub fn validate_for(&self, net: &DicNetwork) -> Result<(), CliError> {
        let n = net.node_count();
        if let Some(&b) = self.budgets.iter().find(|&&b| b > n) {
            return Err(CliError::config(format!(
                "budget {b} exceeds node count {n}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_grids() {
        assert_eq!(parse_budgets("10..30:10").unwrap(), [10, 20, 30]);
        assert_eq!(parse_budgets("1..3").unwrap(), [1, 2, 3]);
        assert_eq!(parse_budgets("5").unwrap(), [5]);
        assert_eq!(parse_budgets("2,4").unwrap(), [2, 4]);
        assert!(parse_budgets("3..1").is_err());
        assert!(parse_budgets("1..3:0").is_err());
        assert!(parse_budgets("x").is_err());
    }

    #[test]
    fn strategy_names() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("celf".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn generator_flag() {
        assert_eq!(
            "2500,26000,7".parse::<NetworkSource>().unwrap(),
            NetworkSource::Generator {
                nodes: 2500,
                edges: 26000,
                seed: 7,
                exponent: DEFAULT_EXPONENT
            }
        );
        assert!("2500,26000".parse::<NetworkSource>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig {
            network: NetworkSource::Generator {
                nodes: 50,
                edges: 200,
                seed: 3,
                exponent: 2.5,
            },
            preset: Some("f3:0.1,0.01,0.001".into()),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"R\":10000"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn fixture_overrides() {
        let cfg = ExperimentConfig {
            activation: Some(0.25),
            budgets: vec![2],
            ..Default::default()
        };
        let net = cfg.build_network().unwrap();
        assert_eq!(net.budget(), 2);
        assert!(net.activations().iter().all(|&a| a == 0.25));
        assert_eq!(net.edges(), dic_core::fixtures::g1().edges());
    }

    #[test]
    fn validation() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().unwrap_err().exit_code()
        };
        assert_eq!(bad(|c| c.strategies.clear()), 2);
        assert_eq!(bad(|c| c.budgets = vec![0]), 2);
        assert_eq!(bad(|c| c.replications = 0), 2);
        assert_eq!(bad(|c| c.workers = 0), 2);
        assert_eq!(bad(|c| c.preset = Some("f9:1".into())), 2);
        let cfg = ExperimentConfig {
            budgets: vec![7],
            ..Default::default()
        };
        let net = dic_core::fixtures::g1();
        assert!(cfg.validate_for(&net).is_err());
    }
}
