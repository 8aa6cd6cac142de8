use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use viral_discount::experiment::{
    run_experiment, write_generated, Algorithm, EvaluatorMode, ExperimentConfig, Generator,
};
use viral_discount::nonadaptive::BudgetMode;
use viral_discount::{DiscountMenu, Error, Result};

#[derive(Parser)]
#[command(name = "viral-discount", version, about = "Discount allocation for influence maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files for a named construction.
    Generate(GenerateArgs),
    /// Allocate discounts up front (hill climbing or brute force).
    Nonadaptive(RunArgs),
    /// Run an adaptive policy on one realization and print its trajectory.
    Adaptive(RunArgs),
    /// Estimate the expected cascade of an adaptive policy.
    Evaluate(RunArgs),
    /// Exact optimal adaptive value on a tiny instance.
    Oracle(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Named {
    Fig1,
    Fig2,
    Worstcase,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    name: Named,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Node count for worstcase and random.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Edge probability of the random graph.
    #[arg(long, default_value_t = 0.01)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Menu of the random instance.
    #[arg(long, default_value = "0.5,1")]
    discounts: DiscountMenu,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment file; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    adoption: Option<PathBuf>,
    /// Comma-separated discount rates, e.g. `1,2`.
    #[arg(long)]
    discounts: Option<DiscountMenu>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    mode: Option<BudgetMode>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// `exact` or `mc`.
    #[arg(long)]
    evaluator: Option<EvaluatorMode>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumerate realizations instead of sampling them.
    #[arg(long)]
    exhaustive: bool,
    /// Rank non-adaptive candidates by total value per rate.
    #[arg(long)]
    literal_rule: bool,
    /// Scripted realization file for `adaptive`.
    #[arg(long)]
    realization: Option<PathBuf>,
    /// Sampled realization index for `adaptive`.
    #[arg(long)]
    trial: Option<u64>,
    /// Report path; the report always goes to stdout as well.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory CSV path for `adaptive`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn missing(flag: &str) -> Error {
    Error::InvalidParameter(format!("--{flag} is required without --config"))
}

impl RunArgs {
    fn into_config(self, default_algorithm: Algorithm) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(
                self.graph.clone().ok_or_else(|| missing("graph"))?,
                self.adoption.clone().ok_or_else(|| missing("adoption"))?,
                self.discounts.clone().ok_or_else(|| missing("discounts"))?,
                self.budget.ok_or_else(|| missing("budget"))?,
                self.algorithm.unwrap_or(default_algorithm),
            ),
        };
        if let Some(v) = self.graph {
            config.graph = v;
        }
        if let Some(v) = self.adoption {
            config.adoption = v;
        }
        if let Some(v) = self.discounts {
            config.discounts = v;
        }
        if let Some(v) = self.budget {
            config.budget = v;
        }
        if let Some(v) = self.mode {
            config.mode = v;
        }
        if let Some(v) = self.algorithm {
            config.algorithm = v;
        }
        if let Some(v) = self.evaluator {
            config.evaluator = v;
        }
        if let Some(v) = self.samples {
            config.samples = v;
        }
        if let Some(v) = self.trials {
            config.trials = v;
        }
        if let Some(v) = self.rollouts {
            config.rollouts = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        config.exhaustive |= self.exhaustive;
        config.literal_rule |= self.literal_rule;
        if let Some(v) = self.realization {
            config.realization = Some(v);
            config.trial = None;
        }
        if let Some(v) = self.trial {
            config.trial = Some(v);
            config.realization = None;
        }
        if let Some(v) = self.out {
            config.out = Some(v);
        }
        Ok(config)
    }
}

fn check_algorithm(command: &str, algorithm: Algorithm, allowed: &[Algorithm]) -> Result<()> {
    if allowed.contains(&algorithm) {
        Ok(())
    } else {
        let names: Vec<_> = allowed.iter().map(|a| a.as_str()).collect();
        Err(Error::InvalidParameter(format!(
            "`{command}` runs {}; got {algorithm}",
            names.join(" or ")
        )))
    }
}

const POLICIES: [Algorithm; 3] = [Algorithm::AdaptiveGreedy, Algorithm::Enhanced, Algorithm::Iterated];

fn run(command: Command) -> Result<()> {
    let (args, command_name, default, allowed): (RunArgs, &str, Algorithm, &[Algorithm]) = match command {
        Command::Generate(g) => return generate(g),
        Command::Nonadaptive(a) => (
            a,
            "nonadaptive",
            Algorithm::NonadaptiveGreedy,
            &[Algorithm::NonadaptiveGreedy, Algorithm::BruteConfig],
        ),
        Command::Adaptive(a) => (a, "adaptive", Algorithm::AdaptiveGreedy, &POLICIES),
        Command::Evaluate(a) => (a, "evaluate", Algorithm::AdaptiveGreedy, &POLICIES),
        Command::Oracle(a) => (a, "oracle", Algorithm::Oracle, &[Algorithm::Oracle]),
    };
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot start {threads} workers: {e}")))?;
    }
    let csv = args.csv.clone();
    let mut config = args.into_config(default)?;
    if command_name == "oracle" {
        config.algorithm = Algorithm::Oracle;
    }
    check_algorithm(command_name, config.algorithm, allowed)?;
    match command_name {
        "adaptive" if config.realization.is_none() && config.trial.is_none() => config.trial = Some(0),
        "evaluate" => {
            config.realization = None;
            config.trial = None;
        }
        _ => {}
    }

    let output = run_experiment(&config)?;
    print!("{}", output.report.to_json());
    if let Some(rec) = &output.trajectory {
        eprint!("{}", rec.log_lines(&output.instance));
        if let Some(path) = csv {
            std::fs::write(&path, rec.csv(&output.instance)).map_err(|e| Error::Io {
                path,
                source: e,
            })?;
        }
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let generator = match args.name {
        Named::Fig1 => Generator::Fig1,
        Named::Fig2 => Generator::Fig2,
        Named::Worstcase => Generator::Worstcase { n: args.n },
        Named::Random => Generator::Random {
            n: args.n,
            edge_prob: args.edge_prob,
            seed: args.seed,
            discounts: args.discounts,
        },
    };
    let files = write_generated(&generator, &args.out)?;
    println!("{}", serde_json::to_string_pretty(&files).expect("serializable"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
