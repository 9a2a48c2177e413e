//! The `oracle` command: exact checks on small instances.

use std::fmt;
use std::str::FromStr;

use dic_core::model::{DicNetwork, NodeId};
use dic_core::oracle::{
    check_guard, check_properties, check_random_properties, compare_patterns, exact_greedy_value,
    exact_policy_value, optimal_adaptive_value, PropertyReport,
};
use dic_core::strategies::StaticPolicy;

use crate::error::CliError;

/// Policy whose exact expected spread is requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactPolicy {
    Empty,
    ExactGreedy,
    Optimal,
    /// These nodes in the first round, nothing after.
    Seeds(Vec<NodeId>),
}

impl FromStr for ExactPolicy {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "empty" => Ok(ExactPolicy::Empty),
            "exact-greedy" => Ok(ExactPolicy::ExactGreedy),
            "optimal" => Ok(ExactPolicy::Optimal),
            _ => {
                let list = s.strip_prefix("seeds:").ok_or_else(|| {
                    CliError::config(format!(
                        "unknown policy `{s}` (empty, exact-greedy, optimal, seeds:i,j,...)"
                    ))
                })?;
                list.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map(NodeId)
                            .map_err(|_| CliError::config(format!("bad node id `{t}`")))
                    })
                    .collect::<Result<_, _>>()
                    .map(ExactPolicy::Seeds)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleTask {
    /// Pointwise monotonicity and submodularity on random networks, or on the given one.
    Properties {
        trials: u64,
        nodes: usize,
        seed: u64,
    },
    /// Optimal adaptive value against every explicit seeding pattern.
    PatternDominance,
    /// Exact adaptive greedy against the adaptive optimum.
    GreedyRatio,
    ExactValue(ExactPolicy),
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutcome {
    Properties(PropertyReport),
    PatternDominance {
        adaptive: f64,
        worst_excess: f64,
        patterns: usize,
        violations: usize,
        strict_gap: bool,
    },
    GreedyRatio {
        greedy: f64,
        optimal: f64,
    },
    Value(f64),
}

const TOL: f64 = 1e-9;

impl OracleOutcome {
    /// Whether the checked property holds.
    pub fn passed(&self) -> bool {
        match self {
            OracleOutcome::Properties(r) => r.violations() == 0,
            OracleOutcome::PatternDominance { violations, .. } => *violations == 0,
            OracleOutcome::GreedyRatio { greedy, optimal } => {
                *greedy + TOL >= (1.0 - (-1.0f64).exp()) * optimal
            }
            OracleOutcome::Value(_) => true,
        }
    }
}

impl fmt::Display for OracleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleOutcome::Properties(r) => write!(
                f,
                "trials={} monotonicity_violations={} submodularity_violations={}",
                r.trials, r.monotonicity_violations, r.submodularity_violations
            ),
            OracleOutcome::PatternDominance {
                adaptive,
                worst_excess,
                patterns,
                violations,
                strict_gap,
            } => write!(
                f,
                "adaptive={adaptive:.9} patterns={patterns} violations={violations} \
                 max_pattern_minus_adaptive={worst_excess:.3e} strict_gap={strict_gap}"
            ),
            OracleOutcome::GreedyRatio { greedy, optimal } => {
                let bound = (1.0 - (-1.0f64).exp()) * optimal;
                write!(
                    f,
                    "greedy={greedy:.9} optimal={optimal:.9} ratio={:.6} margin={:.6}",
                    greedy / optimal,
                    greedy - bound
                )
            }
            OracleOutcome::Value(v) => write!(f, "value={v:.9}"),
        }
    }
}

/// Runs one task. `net` is required for every task but random property trials.
pub fn cmd_oracle(task: &OracleTask, net: Option<&DicNetwork>) -> Result<OracleOutcome, CliError> {
    let need = || net.ok_or_else(|| CliError::config("this oracle task needs a network"));
    Ok(match task {
        OracleTask::Properties {
            trials,
            nodes,
            seed,
        } => OracleOutcome::Properties(match net {
            Some(net) => check_properties(net, *trials, *seed),
            None => check_random_properties(*trials, *nodes, *seed),
        }),
        OracleTask::PatternDominance => {
            let cmp = compare_patterns(need()?)?;
            let worst_excess = cmp
                .patterns
                .iter()
                .map(|(_, v)| v - cmp.adaptive)
                .fold(f64::NEG_INFINITY, f64::max);
            OracleOutcome::PatternDominance {
                adaptive: cmp.adaptive,
                worst_excess,
                patterns: cmp.patterns.len(),
                violations: cmp.violations(TOL).len(),
                strict_gap: cmp.has_strict_gap(TOL),
            }
        }
        OracleTask::GreedyRatio => {
            let net = need()?;
            OracleOutcome::GreedyRatio {
                greedy: exact_greedy_value(net)?,
                optimal: optimal_adaptive_value(net)?,
            }
        }
        OracleTask::ExactValue(policy) => {
            let net = need()?;
            OracleOutcome::Value(match policy {
                ExactPolicy::Empty => 0.0,
                ExactPolicy::ExactGreedy => exact_greedy_value(net)?,
                ExactPolicy::Optimal => optimal_adaptive_value(net)?,
                ExactPolicy::Seeds(seeds) => {
                    if let Some(v) = seeds.iter().find(|v| v.index() >= net.node_count()) {
                        return Err(CliError::config(format!("node {} out of range", v.0)));
                    }
                    check_guard(net)?;
                    exact_policy_value(net, &StaticPolicy::new(seeds.clone()))?
                }
            })
        }
    })
}
