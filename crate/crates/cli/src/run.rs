//! The `run` command: every strategy at every budget over common replications.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use dic_core::estimator::{run_replications, with_workers, Estimate, DEFAULT_DELTA};
use dic_core::model::DicNetwork;
use dic_core::strategies::{
    h_greedy_prune, static_greedy_select, AdaptiveGreedyFactory, Decision, GainBatch, Observation,
    Policy, PolicyFactory, PruneReport, RandomPolicy, SeedingPattern, Selection, StaticPolicy,
};
use dic_core::streams::{stream, tag};

use crate::config::{ExperimentConfig, StrategyKind};
use crate::error::CliError;

/// Normal quantile for two-sided 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// One replication of one strategy at one budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub replication: u64,
    pub spread: usize,
    pub rounds_used: u32,
    pub seeds_used: usize,
    pub gain_evaluations: u64,
    pub wall_time_ms: f64,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub replications: u64,
    pub mean: f64,
    pub std: f64,
    pub hoeffding_half_width: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub mean_gain_evaluations: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
    /// Pruning pre-pass, when an H-greedy run was requested.
    pub prune: Option<PruneReport>,
    pub nodes: usize,
    pub edges: usize,
}

impl RunReport {
    pub fn summary_for(&self, strategy: StrategyKind, budget: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.strategy == strategy && s.budget == budget)
    }

    pub fn rows_for(
        &self,
        strategy: StrategyKind,
        budget: usize,
    ) -> impl Iterator<Item = &RunRow> + '_ {
        self.rows
            .iter()
            .filter(move |r| r.strategy == strategy && r.budget == budget)
    }
}

/// Adds the time spent deciding to the wrapped policy.
struct Timed<P> {
    inner: P,
    elapsed: Duration,
}

impl<P> Timed<P> {
    fn new(inner: P) -> Self {
        Timed {
            inner,
            elapsed: Duration::ZERO,
        }
    }
}

impl<P: Policy> Policy for Timed<P> {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        let start = Instant::now();
        let d = self.inner.decide(obs);
        self.elapsed += start.elapsed();
        d
    }

    fn gain_evaluations(&self) -> u64 {
        self.inner.gain_evaluations()
    }
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs every replication of one strategy at one budget. `offset` is per-run setup cost
/// attributed to each replication and `extra_evals` evaluations done outside the policy.
fn replicate<F: PolicyFactory>(
    net: &DicNetwork,
    cfg: &ExperimentConfig,
    strategy: StrategyKind,
    factory: &F,
    offset: Duration,
    extra_evals: u64,
) -> Result<Vec<RunRow>, CliError> {
    let timed = |i: u64| Timed::new(factory.build(i));
    let rows = run_replications(
        net,
        &timed,
        cfg.replications,
        cfg.master_seed,
        |i, run, policy| RunRow {
            strategy,
            budget: net.budget(),
            replication: i,
            spread: run.spread,
            rounds_used: run.rounds(),
            seeds_used: run.seeds.len(),
            gain_evaluations: policy.gain_evaluations() + extra_evals,
            wall_time_ms: millis(policy.elapsed + offset),
            master_seed: cfg.master_seed,
        },
    )?;
    Ok(rows)
}

fn summarize(rows: &[RunRow], nodes: usize) -> SummaryRow {
    let first = &rows[0];
    let spreads: Vec<usize> = rows.iter().map(|r| r.spread).collect();
    let est = Estimate::from_spreads(&spreads, nodes, DEFAULT_DELTA, first.master_seed);
    let (lo, hi) = est.normal_interval(Z95);
    SummaryRow {
        strategy: first.strategy,
        budget: first.budget,
        replications: est.replications,
        mean: est.mean,
        std: est.std_dev,
        hoeffding_half_width: est.half_width,
        ci95_low: lo,
        ci95_high: hi,
        mean_gain_evaluations: rows.iter().map(|r| r.gain_evaluations as f64).sum::<f64>()
            / rows.len() as f64,
    }
}

/// Computes every row without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let net = cfg.build_network()?;
    cfg.validate_for(&net)?;
    let nodes = net.node_count();
    let master = cfg.master_seed;

    let adaptive = AdaptiveGreedyFactory::new(
        GainBatch::derived(master, &[tag::GAIN_BATCH], cfg.gain_samples),
        Selection::Lazy,
    );
    let wants = |k| cfg.strategies.contains(&k);

    with_workers(cfg.workers, || -> Result<RunReport, CliError> {
        let prune = wants(StrategyKind::HGreedy).then(|| {
            let batch = GainBatch::derived(master, &[tag::PRUNE], cfg.prune_samples);
            h_greedy_prune(&net, batch, cfg.prune_rule.into())
        });
        let restricted = prune
            .as_ref()
            .map(|p| adaptive.restricted(p.candidates.clone()));
        let greedy = wants(StrategyKind::Greedy).then(|| {
            let batch = GainBatch::derived(master, &[tag::GREEDY], cfg.gain_samples);
            let start = Instant::now();
            let (order, evals) =
                static_greedy_select(&net, cfg.max_budget(), batch, cfg.greedy_objective.into());
            (order, evals, start.elapsed())
        });

        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for &strategy in &cfg.strategies {
            for &budget in &cfg.budgets {
                let net_b = net
                    .with_budget(budget)
                    .map_err(|e| CliError::config(e.to_string()))?;
                let batch = match strategy {
                    StrategyKind::AGreedy => {
                        replicate(&net_b, cfg, strategy, &adaptive, Duration::ZERO, 0)?
                    }
                    StrategyKind::HGreedy => {
                        let factory = restricted.as_ref().expect("pre-pass ran");
                        replicate(&net_b, cfg, strategy, factory, Duration::ZERO, 0)?
                    }
                    StrategyKind::Greedy => {
                        let (order, evals, took) = greedy.as_ref().expect("selection ran");
                        // The prefix for this budget costs its share of the one selection run.
                        let share = budget as f64 / cfg.max_budget() as f64;
                        let seeds = order[..budget.min(order.len())].to_vec();
                        let factory = |_: u64| StaticPolicy::new(seeds.clone());
                        let offset = took.mul_f64(share / cfg.replications as f64);
                        replicate(
                            &net_b,
                            cfg,
                            strategy,
                            &factory,
                            offset,
                            (*evals as f64 * share).round() as u64,
                        )?
                    }
                    StrategyKind::Random => {
                        let factory = |i: u64| {
                            RandomPolicy::new(
                                SeedingPattern::single_step(budget),
                                stream(master, &[tag::RANDOM_POLICY, budget as u64, i]),
                            )
                        };
                        replicate(&net_b, cfg, strategy, &factory, Duration::ZERO, 0)?
                    }
                };
                summary.push(summarize(&batch, nodes));
                rows.extend(batch);
            }
        }
        Ok(RunReport {
            rows,
            summary,
            prune,
            nodes,
            edges: net.edge_count(),
        })
    })?
}

/// Output file set: `<stem>.csv`, `<stem>.summary.csv`, `<stem>.meta.json`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub meta: PathBuf,
}

impl OutputPaths {
    pub fn for_rows(rows: &Path) -> Self {
        let stem = rows
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let sibling = |suffix: &str| rows.with_file_name(format!("{stem}{suffix}"));
        OutputPaths {
            rows: rows.to_path_buf(),
            summary: sibling(".summary.csv"),
            meta: sibling(".meta.json"),
        }
    }

    fn all(&self) -> [&Path; 3] {
        [&self.rows, &self.summary, &self.meta]
    }
}

fn tmp_path(p: &Path) -> PathBuf {
    let mut name = p.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    p.with_file_name(name)
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn meta_json(cfg: &ExperimentConfig, report: &RunReport) -> serde_json::Value {
    let mut meta = serde_json::json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "network": { "nodes": report.nodes, "edges": report.edges },
    });
    if let Some(p) = &report.prune {
        meta["prune"] = serde_json::json!({
            "rule": format!("{:?}", p.rule),
            "mean": p.mean,
            "std": p.std,
            "threshold": p.threshold(),
            "pruned_fraction": p.pruned_fraction(),
        });
    }
    meta
}

/// Writes all three files next to each other. Each goes to a temporary name first and is
/// renamed only once every file is complete, so a failure leaves nothing behind.
pub fn write_outputs(
    paths: &OutputPaths,
    cfg: &ExperimentConfig,
    report: &RunReport,
) -> Result<(), CliError> {
    let mut renamed = Vec::new();
    let mut attempt = || {
        write_csv(&tmp_path(&paths.rows), &report.rows)?;
        write_csv(&tmp_path(&paths.summary), &report.summary)?;
        let meta =
            serde_json::to_string_pretty(&meta_json(cfg, report)).expect("metadata serializes");
        let p = tmp_path(&paths.meta);
        fs::write(&p, meta + "\n").map_err(|e| CliError::io(&p, e))?;
        for target in paths.all() {
            fs::rename(tmp_path(target), target).map_err(|e| CliError::io(target, e))?;
            renamed.push(target);
        }
        Ok(())
    };
    let result = attempt();
    if result.is_err() {
        for target in paths.all() {
            let _ = fs::remove_file(tmp_path(target));
        }
        for target in renamed {
            let _ = fs::remove_file(target);
        }
    }
    result
}

/// Runs the experiment and, when `cfg.out` is set, writes its files.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let report = execute(cfg)?;
    if let Some(out) = &cfg.out {
        write_outputs(&OutputPaths::for_rows(out), cfg, &report)?;
    }
    Ok(report)
}
