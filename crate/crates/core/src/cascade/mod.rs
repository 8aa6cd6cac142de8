//! The two-stage stochastic process: adoption thresholds for the seeding
//! stage, live-edge coins for the independent cascade.

mod observation;
mod realization;
pub(crate) mod scratch;
mod spread;

pub use observation::{conditional_spread, PartialObservation, ProbeOutcome, SpreadEstimator};
pub use realization::{
    edge_coin, format_realization, min_accepted_level, parse_realization, sample_diffusion,
    sample_seeding, threshold_draw, DiffusionRealization, SeedingRealization,
};
pub(crate) use spread::replicate_cascade;
pub use spread::{
    hoeffding_radius, reachable, spread_exact, spread_exact_excluding, spread_mc,
    spread_mc_excluding, uncertain_edge_count, DEFAULT_DELTA, DEFAULT_EDGE_CAP,
};
