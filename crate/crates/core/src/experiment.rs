//! Experiment configuration, dispatch and JSON reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adaptive::{
    evaluate_policy, optimal_policy_oracle, run_policy, trial_realization, BranchEstimate,
    EnhancedGreedyPolicy, EvaluationMode, GreedyPolicy, IteratedPolicy, OracleCaps, Policy,
    TrajectoryRecord, DEFAULT_REALIZATION_CAP,
};
use crate::cascade::{format_realization, parse_realization, SpreadEstimator, DEFAULT_EDGE_CAP};
use crate::error::{Error, Result};
use crate::graph::{DiscountMenu, Instance};
use crate::io::{load_instance, write_instance};
use crate::nonadaptive::{
    brute_force_config, f_exact, hill_climbing, BudgetMode, BudgetSpec, Candidate, Configuration,
    ExactCaps, ExactEvaluator, GreedyRule, HillClimbOptions, HillClimbResult, McEvaluator,
    DEFAULT_SEARCH_CAP,
};
use crate::rng::{tags, RngStream};
use crate::instances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    NonadaptiveGreedy,
    BruteConfig,
    AdaptiveGreedy,
    Enhanced,
    Iterated,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::NonadaptiveGreedy,
        Algorithm::BruteConfig,
        Algorithm::AdaptiveGreedy,
        Algorithm::Enhanced,
        Algorithm::Iterated,
        Algorithm::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NonadaptiveGreedy => "nonadaptive-greedy",
            Algorithm::BruteConfig => "brute-config",
            Algorithm::AdaptiveGreedy => "adaptive-greedy",
            Algorithm::Enhanced => "enhanced",
            Algorithm::Iterated => "iterated",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn is_adaptive_policy(self) -> bool {
        matches!(self, Algorithm::AdaptiveGreedy | Algorithm::Enhanced | Algorithm::Iterated)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorMode {
    #[default]
    Exact,
    Mc,
}

impl FromStr for EvaluatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EvaluatorMode::Exact),
            "mc" => Ok(EvaluatorMode::Mc),
            other => Err(Error::InvalidParameter(format!(
                "evaluator must be exact or mc, got {other:?}"
            ))),
        }
    }
}

fn default_mode() -> BudgetMode {
    BudgetMode::Hard
}
fn default_samples() -> usize {
    1000
}
fn default_trials() -> usize {
    10_000
}
fn default_rollouts() -> usize {
    1000
}

/// One experiment. Serialized verbatim into its report so it can be re-run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub adoption: PathBuf,
    pub discounts: DiscountMenu,
    pub budget: f64,
    #[serde(default = "default_mode")]
    pub mode: BudgetMode,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub evaluator: EvaluatorMode,
    /// Monte Carlo samples per spread or objective estimate.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sampled realizations when evaluating a policy.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Greedy rollouts behind each branch decision of enhanced and iterated.
    #[serde(default = "default_rollouts")]
    pub rollouts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Enumerate realizations instead of sampling them.
    #[serde(default)]
    pub exhaustive: bool,
    /// Scripted realization for a single adaptive trajectory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<PathBuf>,
    /// Sampled trial whose realization drives a single adaptive trajectory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    /// Rank non-adaptive candidates by `f(S + h) / d(h)` instead of the
    /// marginal gain per incremental cost.
    #[serde(default)]
    pub literal_rule: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(graph: PathBuf, adoption: PathBuf, discounts: DiscountMenu, budget: f64, algorithm: Algorithm) -> Self {
        ExperimentConfig {
            graph,
            adoption,
            discounts,
            budget,
            mode: default_mode(),
            algorithm,
            evaluator: EvaluatorMode::default(),
            samples: default_samples(),
            trials: default_trials(),
            rollouts: default_rollouts(),
            seed: 0,
            exhaustive: false,
            realization: None,
            trial: None,
            literal_rule: false,
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))
    }

    pub fn validate(&self) -> Result<BudgetSpec> {
        for (name, count) in [("samples", self.samples), ("trials", self.trials), ("rollouts", self.rollouts)] {
            if count == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if self.realization.is_some() && self.trial.is_some() {
            return Err(Error::InvalidParameter(
                "give either a scripted realization or a trial index, not both".into(),
            ));
        }
        BudgetSpec::new(self.budget, self.mode)
    }

    fn estimator(&self) -> SpreadEstimator {
        match self.evaluator {
            EvaluatorMode::Exact => SpreadEstimator::Exact {
                edge_cap: DEFAULT_EDGE_CAP,
            },
            EvaluatorMode::Mc => SpreadEstimator::MonteCarlo {
                samples: self.samples,
                seed: RngStream::new(self.seed).substream(tags::ESTIMATOR).key(),
            },
        }
    }

    fn branch(&self) -> BranchEstimate {
        if self.exhaustive {
            BranchEstimate::exhaustive()
        } else {
            BranchEstimate::Rollouts {
                count: self.rollouts,
                seed: RngStream::new(self.seed).substream(tags::ROLLOUT).key(),
            }
        }
    }

    fn policy(&self) -> Box<dyn Policy> {
        match self.algorithm {
            Algorithm::Enhanced => Box::new(EnhancedGreedyPolicy::new(self.estimator(), self.branch())),
            Algorithm::Iterated => Box::new(IteratedPolicy::new(self.estimator(), self.branch())),
            _ => Box::new(GreedyPolicy::new(self.estimator())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub node: String,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub node: String,
    pub rate: f64,
    pub accepted: bool,
    /// `src->dst:live|blocked` in reveal order.
    pub revealed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Allocation {
        pairs: Vec<PairReport>,
        effective_discounts: Vec<PairReport>,
        cost: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        chosen: Option<Candidate>,
        #[serde(skip_serializing_if = "Option::is_none")]
        gain_evaluations: Option<usize>,
    },
    Trajectory {
        probes: Vec<ProbeReport>,
        log: Vec<String>,
        delivered_cost: f64,
        influenced: Vec<String>,
        cascade_size: usize,
    },
    Evaluation {
        realizations: usize,
        exhaustive: bool,
        max_delivered_cost: f64,
        budget_violations: usize,
    },
    Oracle {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub algorithm: Algorithm,
    pub code_version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub nodes: usize,
    pub edges: usize,
    /// Node labels in id order.
    pub labels: Vec<String>,
    pub outcome: Outcome,
    /// `f(S)`, `f(pi)`, a single cascade size or the oracle optimum.
    pub objective: f64,
    /// Half-width of the 95% confidence interval on `objective`.
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn pair_reports(instance: &Instance, config: &Configuration) -> (Vec<PairReport>, Vec<PairReport>) {
    let name = |v| instance.labels.name(v).to_string();
    let pairs = config
        .pairs()
        .map(|p| PairReport {
            node: name(p.node),
            rate: instance.rate(p),
        })
        .collect();
    let effective = config
        .normalized()
        .pairs()
        .map(|p| PairReport {
            node: name(p.node),
            rate: instance.rate(p),
        })
        .collect();
    (pairs, effective)
}

/// Report body for a trajectory.
pub fn trajectory_outcome(instance: &Instance, rec: &TrajectoryRecord) -> Outcome {
    let labels = &instance.labels;
    let probes = rec
        .probes
        .iter()
        .map(|p| ProbeReport {
            node: labels.name(p.pair.node).to_string(),
            rate: instance.rate(p.pair),
            accepted: p.accepted,
            revealed: p
                .revealed
                .iter()
                .map(|&(e, live)| {
                    let edge = instance.graph.edge(e);
                    format!(
                        "{}->{}:{}",
                        labels.name(edge.source),
                        labels.name(edge.target),
                        if live { "live" } else { "blocked" }
                    )
                })
                .collect(),
        })
        .collect();
    Outcome::Trajectory {
        probes,
        log: rec.log_lines(instance).lines().map(str::to_string).collect(),
        delivered_cost: rec.delivered_cost,
        influenced: rec.influenced.iter().map(|&v| labels.name(v).to_string()).collect(),
        cascade_size: rec.cascade_size,
    }
}

/// Result of [`run_experiment`] beyond the report.
pub struct ExperimentOutput {
    pub report: Report,
    pub instance: Instance,
    pub trajectory: Option<TrajectoryRecord>,
}

/// Loads the instance, runs the selected algorithm and builds the report.
/// Writes it to `config.out` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let spec = config.validate()?;
    let instance = load_instance(&config.graph, &config.adoption, config.discounts.clone())?;
    let start = Instant::now();
    let mut trajectory = None;
    let (outcome, objective, radius, samples) = match config.algorithm {
        Algorithm::NonadaptiveGreedy => {
            let options = HillClimbOptions {
                rule: if config.literal_rule { GreedyRule::LiteralTotal } else { GreedyRule::Marginal },
                lazy: true,
            };
            let (result, radius, samples): (HillClimbResult, f64, Option<usize>) = match config.evaluator {
                EvaluatorMode::Exact => {
                    let eval = ExactEvaluator::new(&instance, ExactCaps::default());
                    (hill_climbing(&instance, &spec, &eval, options)?, 0.0, None)
                }
                EvaluatorMode::Mc => {
                    let stream = RngStream::new(config.seed).substream(tags::ESTIMATOR);
                    let eval = McEvaluator::new(&instance, config.samples, stream);
                    let r = hill_climbing(&instance, &spec, &eval, options)?;
                    use crate::nonadaptive::Evaluator;
                    (r, eval.radius(), Some(config.samples))
                }
            };
            let (pairs, effective_discounts) = pair_reports(&instance, &result.config);
            (
                Outcome::Allocation {
                    pairs,
                    effective_discounts,
                    cost: result.cost,
                    chosen: Some(result.chosen),
                    gain_evaluations: Some(result.gain_evaluations),
                },
                result.value,
                radius,
                samples,
            )
        }
        Algorithm::BruteConfig => {
            let (best, value) = brute_force_config(&instance, &spec, ExactCaps::default(), DEFAULT_SEARCH_CAP)?;
            let cost = crate::nonadaptive::config_cost(&best, &instance, &spec);
            debug_assert_eq!(f_exact(&best, &instance, ExactCaps::default())?, value);
            let (pairs, effective_discounts) = pair_reports(&instance, &best);
            (
                Outcome::Allocation {
                    pairs,
                    effective_discounts,
                    cost,
                    chosen: None,
                    gain_evaluations: None,
                },
                value,
                0.0,
                None,
            )
        }
        Algorithm::Oracle => {
            let value = optimal_policy_oracle(&instance, &spec, OracleCaps::default())?;
            (Outcome::Oracle {}, value, 0.0, None)
        }
        a if a.is_adaptive_policy() => {
            let policy = config.policy();
            let scripted = match (&config.realization, config.trial) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    Some(parse_realization(&text, &path.display().to_string(), &instance)?)
                }
                (None, Some(i)) => Some(trial_realization(&instance, config.seed, i)),
                (None, None) => None,
            };
            match scripted {
                Some((seeding, diffusion)) => {
                    let rec = run_policy(policy.as_ref(), &instance, &spec, &seeding, &diffusion)?;
                    let size = rec.cascade_size as f64;
                    let outcome = trajectory_outcome(&instance, &rec);
                    trajectory = Some(rec);
                    (outcome, size, 0.0, None)
                }
                None => {
                    let mode = if config.exhaustive {
                        EvaluationMode::Exhaustive {
                            cap: DEFAULT_REALIZATION_CAP as u64,
                        }
                    } else {
                        EvaluationMode::Sampled {
                            trials: config.trials,
                            seed: config.seed,
                        }
                    };
                    let eval = evaluate_policy(policy.as_ref(), &instance, &spec, mode)?;
                    (
                        Outcome::Evaluation {
                            realizations: eval.realizations,
                            exhaustive: eval.exhaustive,
                            max_delivered_cost: eval.max_delivered_cost,
                            budget_violations: eval.budget_violations,
                        },
                        eval.mean,
                        eval.radius,
                        (!eval.exhaustive).then_some(eval.realizations),
                    )
                }
            }
        }
        _ => unreachable!("every algorithm is handled above"),
    };
    let report = Report {
        algorithm: config.algorithm,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.seed,
        config: config.clone(),
        nodes: instance.node_count(),
        edges: instance.graph.edge_count(),
        labels: instance.labels.names().to_vec(),
        outcome,
        objective,
        radius,
        samples,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    if let Some(out) = &config.out {
        report.write(out)?;
    }
    Ok(ExperimentOutput {
        report,
        instance,
        trajectory,
    })
}

/// Named instance constructions.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Fig1,
    /// Fig. 1 plus its scripted walkthrough realization.
    Fig2,
    Worstcase { n: usize },
    Random { n: usize, edge_prob: f64, seed: u64, discounts: DiscountMenu },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratedFiles {
    pub graph: PathBuf,
    pub adoption: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<PathBuf>,
    pub discounts: DiscountMenu,
    pub nodes: usize,
    pub edges: usize,
}

pub fn generate_instance(generator: &Generator) -> Result<(Instance, Option<String>)> {
    Ok(match generator {
        Generator::Fig1 => (instances::fig1(), None),
        Generator::Fig2 => {
            let inst = instances::fig1();
            let (s, d) = instances::fig2_realization(&inst);
            let text = format_realization(&inst, &s, &d);
            (inst, Some(text))
        }
        Generator::Worstcase { n } => (instances::worstcase(*n)?, None),
        Generator::Random {
            n,
            edge_prob,
            seed,
            discounts,
        } => (instances::random(*n, *edge_prob, discounts.clone(), *seed)?, None),
    })
}

/// Writes `graph.txt`, `adoption.txt` and, for scripted instances,
/// `realization.txt` into `dir`.
pub fn write_generated(generator: &Generator, dir: &Path) -> Result<GeneratedFiles> {
    let (instance, realization) = generate_instance(generator)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let graph = dir.join("graph.txt");
    let adoption = dir.join("adoption.txt");
    write_instance(&instance, &graph, &adoption)?;
    let realization = match realization {
        Some(text) => {
            let path = dir.join("realization.txt");
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Some(path)
        }
        None => None,
    };
    Ok(GeneratedFiles {
        graph,
        adoption,
        realization,
        discounts: instance.menu.clone(),
        nodes: instance.node_count(),
        edges: instance.graph.edge_count(),
    })
}
