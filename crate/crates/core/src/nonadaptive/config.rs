use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, NodeId, SeedDiscountPair};

/// Absolute slack allowed when comparing a cost against the budget, so that
/// sums of non-representable rates (e.g. `0.1 + 0.2`) are not spuriously
/// infeasible.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// A set of seed-discount pairs committed up front.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Configuration {
    pairs: BTreeSet<SeedDiscountPair>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pair: SeedDiscountPair) -> bool {
        self.pairs.insert(pair)
    }

    pub fn contains(&self, pair: &SeedDiscountPair) -> bool {
        self.pairs.contains(pair)
    }

    pub fn pairs(&self) -> impl Iterator<Item = SeedDiscountPair> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn with(&self, pair: SeedDiscountPair) -> Configuration {
        let mut out = self.clone();
        out.insert(pair);
        out
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Highest level assigned to `v`, if any.
    pub fn effective_level(&self, v: NodeId) -> Option<usize> {
        self.pairs
            .range(SeedDiscountPair::new(v, 0)..=SeedDiscountPair::new(v, usize::MAX))
            .next_back()
            .map(|p| p.level)
    }

    /// `d_S[v]`: the highest rate offered to `v`, or 0 when `v` is not selected.
    pub fn effective_discount(&self, v: NodeId, instance: &Instance) -> f64 {
        self.effective_level(v)
            .map_or(0.0, |l| instance.menu.rate(l))
    }

    pub fn effective_levels(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut levels = vec![None; node_count];
        for p in &self.pairs {
            levels[p.node] = Some(levels[p.node].map_or(p.level, |l: usize| l.max(p.level)));
        }
        levels
    }

    /// The same configuration with dominated pairs removed.
    pub fn normalized(&self) -> Configuration {
        let mut out = Configuration::new();
        let mut last: Option<SeedDiscountPair> = None;
        for &p in &self.pairs {
            if let Some(prev) = last {
                if prev.node != p.node {
                    out.insert(prev);
                }
            }
            last = Some(p);
        }
        if let Some(prev) = last {
            out.insert(prev);
        }
        out
    }
}

impl FromIterator<SeedDiscountPair> for Configuration {
    fn from_iter<I: IntoIterator<Item = SeedDiscountPair>>(iter: I) -> Self {
        Configuration {
            pairs: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// `sum_v d_S[v] <= B`
    Hard,
    /// `sum_v d_S[v] * p_v(d_S[v]) <= B`
    Soft,
}

impl std::str::FromStr for BudgetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(BudgetMode::Hard),
            "soft" => Ok(BudgetMode::Soft),
            other => Err(Error::InvalidParameter(format!(
                "budget mode must be hard or soft, got {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub budget: f64,
    pub mode: BudgetMode,
}

impl BudgetSpec {
    pub fn new(budget: f64, mode: BudgetMode) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "budget must be positive, got {budget}"
            )));
        }
        Ok(BudgetSpec { budget, mode })
    }

    pub fn hard(budget: f64) -> Result<Self> {
        Self::new(budget, BudgetMode::Hard)
    }

    pub fn admits(&self, cost: f64) -> bool {
        cost <= self.budget + BUDGET_TOLERANCE
    }
}

/// Cost charged for holding `v` at `level` (`None`: unselected).
pub fn node_cost(instance: &Instance, v: NodeId, level: Option<usize>, mode: BudgetMode) -> f64 {
    match level {
        None => 0.0,
        Some(l) => {
            let d = instance.menu.rate(l);
            match mode {
                BudgetMode::Hard => d,
                BudgetMode::Soft => d * instance.model.prob(v, l),
            }
        }
    }
}

pub fn config_cost(config: &Configuration, instance: &Instance, spec: &BudgetSpec) -> f64 {
    config
        .effective_levels(instance.node_count())
        .into_iter()
        .enumerate()
        .map(|(v, level)| node_cost(instance, v, level, spec.mode))
        .sum()
}
