//! Adaptive seeding: policies that observe each response and the cascade it
//! triggers before choosing the next offer.

mod evaluate;
mod greedy;
mod oracle;
mod policies;
mod posterior;
mod session;

pub use evaluate::{evaluate_policy, trial_realization, EvaluationMode, PolicyEvaluation};
pub use greedy::{greedy_policy_step, greedy_step_cached, DeltaCache, GreedyPolicy};
pub use oracle::{optimal_policy_oracle, OracleCaps};
pub use policies::{BranchEstimate, EnhancedGreedyPolicy, IteratedPolicy};
pub use posterior::{
    acceptance_probability, for_each_consistent_realization, sample_consistent_realization,
    DEFAULT_REALIZATION_CAP,
};
pub use session::{run_policy, Policy, PolicyState, Session, TrajectoryRecord};
