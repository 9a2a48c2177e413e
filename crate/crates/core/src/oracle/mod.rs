//! Exact computations for small instances, used as ground truth by the tests and the
//! `oracle` subcommand.

mod auxiliary;
mod belief;
mod enumerate;
mod properties;
mod tree;

use thiserror::Error;

use crate::diffusion::DiffusionError;

pub use auxiliary::{build_auxiliary, AuxNode, AuxiliaryGraph, ValueEdge};
pub use belief::{
    compare_patterns, exact_gain, exact_greedy_value, optimal_adaptive_value,
    optimal_pattern_value, round_outcomes, ExactGreedyPolicy, PatternComparison,
};
pub use enumerate::{check_guard, enumerate_realizations, realization_count, ENUMERATION_LIMIT};
pub use properties::{check_properties, check_random_properties, random_instance, PropertyReport};
pub use tree::{exact_policy_value, exact_policy_value_enumerated, Assignment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {count} realizations, more than the limit of {limit}")]
    Guard { count: u128, limit: u128 },
    #[error("outcome tree exceeds {limit} leaves")]
    TreeGuard { limit: u128 },
    #[error("policy issued an invalid command: {0}")]
    Policy(#[from] DiffusionError),
}
