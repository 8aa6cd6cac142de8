//! Non-adaptive discount allocation: commit a configuration up front,
//! maximize `f(S)` subject to a hard or soft budget.

mod brute;
mod config;
mod evaluator;
mod greedy;
mod objective;

pub use brute::{brute_force_config, DEFAULT_SEARCH_CAP};
pub use config::{config_cost, node_cost, BudgetMode, BudgetSpec, Configuration, BUDGET_TOLERANCE};
pub use evaluator::{mc_value_from_scratch, Evaluator, ExactEvaluator, ExactState, McEvaluator, McState};
pub use greedy::{
    argmax_lowest, clearly_greater, hill_climbing, Candidate, GreedyRule, HillClimbOptions, HillClimbResult, MIN_GAIN,
    TIE_TOLERANCE,
};
pub use objective::{f_exact, f_mc, seedset_probability, ExactCaps};
