//! The `prune-stats` command: the H-greedy candidate filter on its own.

use std::path::Path;

use serde::Serialize;

use dic_core::strategies::{h_greedy_prune, GainBatch, PruneReport};
use dic_core::streams::tag;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::run::write_csv;

#[derive(Serialize)]
struct NodeRow {
    node: usize,
    spread: f64,
    kept: bool,
}

/// Runs the pre-pass exactly as `run` would and optionally writes one row per node.
pub fn cmd_prune_stats(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<PruneReport, CliError> {
    cfg.validate()?;
    let net = cfg.build_network()?;
    let batch = GainBatch::derived(cfg.master_seed, &[tag::PRUNE], cfg.prune_samples);
    let report = dic_core::estimator::with_workers(cfg.workers, || {
        h_greedy_prune(&net, batch, cfg.prune_rule.into())
    })?;
    if let Some(path) = out {
        let rows: Vec<NodeRow> = report
            .spread
            .iter()
            .zip(&report.candidates)
            .enumerate()
            .map(|(node, (&spread, &kept))| NodeRow { node, spread, kept })
            .collect();
        write_csv(path, &rows)?;
    }
    Ok(report)
}

pub fn describe(report: &PruneReport) -> String {
    format!(
        "rule={:?} mean={:.4} std={:.4} threshold={:.4} kept={} pruned_fraction={:.4}",
        report.rule,
        report.mean,
        report.std,
        report.threshold(),
        report.kept().count(),
        report.pruned_fraction()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetworkSource;

    #[test]
    fn writes_one_row_per_node() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let cfg = ExperimentConfig {
            network: NetworkSource::Generator {
                nodes: 200,
                edges: 1600,
                seed: 2,
                exponent: 2.1,
            },
            preset: Some("f3:0.1,0.01,0.001".into()),
            prune_samples: 200,
            ..Default::default()
        };
        let report = cmd_prune_stats(&cfg, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,spread,kept"));
        assert_eq!(lines.count(), 200);
        assert!(report.pruned_fraction() > 0.0);
        assert!(describe(&report).contains("pruned_fraction="));
    }
}
