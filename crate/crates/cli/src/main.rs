use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dic_cli::config::{load_config, DirectednessName, GreedyObjectiveName, PruneRuleName};
use dic_cli::gen::{cmd_gen, GenSpec};
use dic_cli::oracle::{cmd_oracle, ExactPolicy, OracleTask};
use dic_cli::prune::{cmd_prune_stats, describe};
use dic_cli::{cmd_run, parse_budgets, CliError, ExperimentConfig, NetworkSource, StrategyKind};
use dic_core::data::DEFAULT_EXPONENT;

#[derive(Parser)]
#[command(
    name = "dic",
    version,
    about = "Adaptive seeding experiments on dynamic independent cascade networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run strategies over a budget grid and write per-replication rows.
    Run(RunArgs),
    /// Show which nodes the H-greedy pre-pass keeps.
    PruneStats(PruneArgs),
    /// Exact checks on small instances.
    Oracle(OracleArgs),
    /// Generate a power-law network and save it as JSON.
    Gen(GenArgs),
}

#[derive(Args, Clone, Default)]
struct NetArgs {
    /// Network JSON file, or an edge list for any other extension.
    #[arg(long, group = "source")]
    net: Option<PathBuf>,
    /// How edge-list lines become directed edges.
    #[arg(long, value_enum)]
    directedness: Option<Dir>,
    /// Generated power-law network: `nodes,edges,seed`.
    #[arg(long = "gen", group = "source")]
    generate: Option<String>,
    /// Tail exponent for `--gen`.
    #[arg(long)]
    exponent: Option<f64>,
    /// Built-in network: g1 or two-node.
    #[arg(long, group = "source")]
    fixture: Option<String>,
    /// Edge law for every edge: f1:p, f2:mean[,bins] or f3:v1,v2,...
    #[arg(long)]
    preset: Option<String>,
    /// Seed activation probability for every node.
    #[arg(long)]
    activation: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    AsIs,
    Reciprocate,
    Reverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    AverageSpread,
    Population,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config, or the metadata file of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    net: NetArgs,
    /// Comma list of a-greedy, h-greedy, greedy, random.
    #[arg(long)]
    strategies: Option<String>,
    /// `a..b[:step]` or `a,b,c`.
    #[arg(long)]
    budgets: Option<String>,
    /// Replications per strategy and budget.
    #[arg(long)]
    reps: Option<u64>,
    /// Samples per gain estimate.
    #[arg(long = "R")]
    gain_samples: Option<u32>,
    /// Samples per node in the pruning pre-pass.
    #[arg(long = "R-pre")]
    prune_samples: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    prune_rule: Option<Rule>,
    /// Choose static Greedy seeds as if every seed attempt succeeds.
    #[arg(long)]
    greedy_without_activation: bool,
    /// Per-replication CSV; the summary and metadata go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long = "R-pre")]
    prune_samples: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    prune_rule: Option<Rule>,
    /// Per-node CSV of estimates and decisions.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    /// Monotonicity and submodularity on the expanded graph.
    Properties,
    /// Adaptive optimum against every explicit seeding pattern.
    PatternDominance,
    /// Exact greedy against the adaptive optimum.
    GreedyRatio,
    /// Exact expected spread of one policy.
    ExactValue,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    check: Check,
    #[command(flatten)]
    net: NetArgs,
    /// Overrides the network's budget.
    #[arg(long)]
    budget: Option<usize>,
    /// For exact-value: empty, exact-greedy, optimal or seeds:i,j,...
    #[arg(long, default_value = "exact-greedy")]
    policy: String,
    /// For properties: number of trials.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// For properties without a network: nodes per random network.
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EXPONENT)]
    exponent: f64,
    #[arg(long, default_value = "f1:0.01")]
    preset: String,
    #[arg(long, default_value_t = 0.5)]
    activation: f64,
    #[arg(long, default_value_t = 1)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
}

impl NetArgs {
    fn is_empty(&self) -> bool {
        self.net.is_none() && self.generate.is_none() && self.fixture.is_none()
    }

    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(path) = &self.net {
            cfg.network = NetworkSource::File {
                path: path.clone(),
                directedness: match self.directedness {
                    Some(Dir::Reciprocate) => DirectednessName::Reciprocate,
                    Some(Dir::Reverse) => DirectednessName::Reverse,
                    Some(Dir::AsIs) | None => DirectednessName::AsIs,
                },
            };
        } else if let Some(spec) = &self.generate {
            cfg.network = spec.parse()?;
        } else if let Some(name) = &self.fixture {
            cfg.network = NetworkSource::Fixture(name.clone());
        }
        if let (Some(x), NetworkSource::Generator { exponent, .. }) =
            (self.exponent, &mut cfg.network)
        {
            *exponent = x;
        }
        if self.preset.is_some() {
            cfg.preset = self.preset.clone();
        }
        if self.activation.is_some() {
            cfg.activation = self.activation;
        }
        Ok(())
    }
}

fn rule(r: Rule) -> PruneRuleName {
    match r {
        Rule::AverageSpread => PruneRuleName::AverageSpread,
        Rule::Population => PruneRuleName::Population,
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    args.net.apply(&mut cfg)?;
    if let Some(s) = &args.strategies {
        cfg.strategies = s
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<StrategyKind>, _>>()?;
    }
    if let Some(b) = &args.budgets {
        cfg.budgets = parse_budgets(b)?;
    }
    cfg.replications = args.reps.unwrap_or(cfg.replications);
    cfg.gain_samples = args.gain_samples.unwrap_or(cfg.gain_samples);
    cfg.prune_samples = args.prune_samples.unwrap_or(cfg.prune_samples);
    cfg.master_seed = args.seed.unwrap_or(cfg.master_seed);
    cfg.workers = args.workers.unwrap_or(cfg.workers);
    if let Some(r) = args.prune_rule {
        cfg.prune_rule = rule(r);
    }
    if args.greedy_without_activation {
        cfg.greedy_objective = GreedyObjectiveName::WithoutActivation;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let report = cmd_run(&cfg)?;
    println!("strategy,budget,mean,ci95_low,ci95_high,mean_gain_evaluations");
    for s in &report.summary {
        println!(
            "{},{},{:.4},{:.4},{:.4},{:.1}",
            s.strategy, s.budget, s.mean, s.ci95_low, s.ci95_high, s.mean_gain_evaluations
        );
    }
    if let Some(p) = &report.prune {
        eprintln!("prune: {}", describe(p));
    }
    Ok(())
}

fn prune_stats(args: PruneArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig {
        budgets: vec![1],
        ..Default::default()
    };
    args.net.apply(&mut cfg)?;
    cfg.prune_samples = args.prune_samples.unwrap_or(cfg.prune_samples);
    cfg.master_seed = args.seed.unwrap_or(cfg.master_seed);
    cfg.workers = args.workers.unwrap_or(cfg.workers);
    if let Some(r) = args.prune_rule {
        cfg.prune_rule = rule(r);
    }
    let report = cmd_prune_stats(&cfg, args.out.as_deref())?;
    println!("{}", describe(&report));
    Ok(())
}

/// Exit status 1 when the check ran but the property failed.
fn oracle(args: OracleArgs) -> Result<bool, CliError> {
    let task = match args.check {
        Check::Properties => OracleTask::Properties {
            trials: args.trials,
            nodes: args.nodes,
            seed: args.seed,
        },
        Check::PatternDominance => OracleTask::PatternDominance,
        Check::GreedyRatio => OracleTask::GreedyRatio,
        Check::ExactValue => OracleTask::ExactValue(args.policy.parse::<ExactPolicy>()?),
    };
    let random_properties = matches!(args.check, Check::Properties) && args.net.is_empty();
    let net = if random_properties {
        None
    } else {
        let mut cfg = ExperimentConfig::default();
        args.net.apply(&mut cfg)?;
        Some(cfg.network_with_budget(args.budget)?)
    };
    let outcome = cmd_oracle(&task, net.as_ref())?;
    println!("{outcome}");
    Ok(outcome.passed())
}

fn gen(args: GenArgs) -> Result<(), CliError> {
    let spec = GenSpec {
        nodes: args.nodes,
        edges: args.edges,
        seed: args.seed,
        exponent: args.exponent,
        preset: args.preset,
        activation: args.activation,
        budget: args.budget,
    };
    let net = cmd_gen(&spec, &args.out)?;
    println!(
        "nodes={} edges={} -> {}",
        net.node_count(),
        net.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|()| true),
        Command::PruneStats(a) => prune_stats(a).map(|()| true),
        Command::Oracle(a) => oracle(a),
        Command::Gen(a) => gen(a).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
