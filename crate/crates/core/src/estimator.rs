//! Monte Carlo estimation of policy spread.
//!
//! Replication `i` draws its realization from a stream derived from `(master_seed, i)` and
//! spreads are summed as integers, so every result is bit-identical for any worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::diffusion::{run_policy, DiffusionError, PolicyRun};
use crate::model::DicNetwork;
use crate::realization::{sample_full, FullRealization};
use crate::strategies::PolicyFactory;
use crate::streams::{stream, tag};

pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation of the spreads (0 for one replication).
    pub std_dev: f64,
    pub replications: u64,
    /// Hoeffding half-width at confidence `1 - delta` for spreads bounded by `N`.
    pub half_width: f64,
    pub delta: f64,
    pub master_seed: u64,
}

impl Estimate {
    pub fn from_spreads(spreads: &[usize], nodes: usize, delta: f64, master_seed: u64) -> Self {
        assert!(
            !spreads.is_empty(),
            "an estimate needs at least one replication"
        );
        let r = spreads.len() as u64;
        let sum: u64 = spreads.iter().map(|&s| s as u64).sum();
        let sum_sq: u128 = spreads.iter().map(|&s| (s as u128) * (s as u128)).sum();
        let mean = sum as f64 / r as f64;
        let std_dev = if r > 1 {
            let var = (sum_sq as f64 - sum as f64 * mean) / (r - 1) as f64;
            var.max(0.0).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            std_dev,
            replications: r,
            half_width: hoeffding_half_width(nodes, r, delta),
            delta,
            master_seed,
        }
    }

    /// Normal-approximation interval `mean ± z · sd / sqrt(R)`.
    pub fn normal_interval(&self, z: f64) -> (f64, f64) {
        let h = z * self.std_dev / (self.replications as f64).sqrt();
        (self.mean - h, self.mean + h)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("replication {replication}: {source}")]
    Policy {
        replication: u64,
        source: DiffusionError,
    },
    #[error("invalid worker count {0}")]
    Workers(usize),
}

/// `N · sqrt(ln(2/δ) / (2R))`.
pub fn hoeffding_half_width(nodes: usize, replications: u64, delta: f64) -> f64 {
    nodes as f64 * ((2.0 / delta).ln() / (2.0 * replications as f64)).sqrt()
}

/// Smallest `R` with `P(|mean − μ| ≥ ε) ≤ δ` for samples bounded in `[0, N]`.
pub fn hoeffding_samples(nodes: usize, eps: f64, delta: f64) -> u64 {
    assert!(
        eps > 0.0 && delta > 0.0 && delta < 1.0,
        "need eps > 0 and 0 < delta < 1"
    );
    let n = nodes as f64;
    // Guard against the quotient landing a hair above an integer.
    let raw = n * n * (2.0 / delta).ln() / (2.0 * eps * eps);
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 * raw.max(1.0) {
        rounded as u64
    } else {
        raw.ceil() as u64
    }
}

/// Realization of replication `i`.
pub fn replication_realization(
    net: &DicNetwork,
    master_seed: u64,
    replication: u64,
) -> FullRealization {
    sample_full(
        net,
        &mut stream(master_seed, &[tag::REALIZATION, replication]),
    )
}

/// Runs `replications` independent policy executions and maps each with `f`, returning the
/// results in replication order.
pub fn run_replications<F, T, M>(
    net: &DicNetwork,
    factory: &F,
    replications: u64,
    master_seed: u64,
    map: M,
) -> Result<Vec<T>, EstimatorError>
where
    F: PolicyFactory,
    T: Send,
    M: Fn(u64, &PolicyRun, &F::Policy) -> T + Sync,
{
    (0..replications)
        .into_par_iter()
        .map(|i| {
            let x = replication_realization(net, master_seed, i);
            let mut policy = factory.build(i);
            let run =
                run_policy(net, &mut policy, &x).map_err(|source| EstimatorError::Policy {
                    replication: i,
                    source,
                })?;
            Ok(map(i, &run, &policy))
        })
        .collect()
}

/// Mean spread of the factory's policies over `replications` sampled realizations.
pub fn estimate_policy_spread<F: PolicyFactory>(
    net: &DicNetwork,
    factory: &F,
    replications: u64,
    master_seed: u64,
) -> Result<Estimate, EstimatorError> {
    let spreads = run_replications(net, factory, replications, master_seed, |_, run, _| {
        run.spread
    })?;
    Ok(Estimate::from_spreads(
        &spreads,
        net.node_count(),
        DEFAULT_DELTA,
        master_seed,
    ))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(
    workers: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, EstimatorError> {
    if workers == 0 {
        return Err(EstimatorError::Workers(workers));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|_| EstimatorError::Workers(workers))?;
    Ok(pool.install(f))
}
