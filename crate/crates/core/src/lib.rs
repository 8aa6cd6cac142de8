//! Discount allocation for influence maximization under the independent
//! cascade model.
//!
//! A firm offers discounts from a finite menu to users of a social network.
//! A user who accepts becomes a seed of an independent cascade. The crate
//! provides the non-adaptive budgeted hill-climbing allocator, three adaptive
//! probing policies, and exact enumeration oracles for small instances.

pub mod adaptive;
pub mod cascade;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod instances;
pub mod io;
pub mod nonadaptive;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{AdoptionModel, DiscountMenu, Edge, Instance, NodeId, NodeLabels, SeedDiscountPair, SocialGraph};
