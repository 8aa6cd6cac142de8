use super::config::{node_cost, BudgetSpec, Configuration};
use super::objective::{f_exact, ExactCaps};
use crate::error::{Error, Result};
use crate::graph::{Instance, SeedDiscountPair};

/// Default bound on the `(m + 1)^n` effective-discount assignments searched.
pub const DEFAULT_SEARCH_CAP: u128 = 1_000_000;

/// Exhaustive search for the best feasible configuration, evaluating every
/// affordable assignment of effective discounts with [`f_exact`]. Ties keep
/// the first assignment in enumeration order, which starts from the empty
/// configuration.
pub fn brute_force_config(
    instance: &Instance,
    spec: &BudgetSpec,
    caps: ExactCaps,
    search_cap: u128,
) -> Result<(Configuration, f64)> {
    let n = instance.node_count();
    let m = instance.menu.len();
    let space = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(m as u128 + 1));
    match space {
        Some(size) if size <= search_cap => {}
        _ => {
            return Err(Error::TooLarge {
                what: "configuration space",
                size: space.unwrap_or(u128::MAX),
                cap: search_cap,
            })
        }
    }

    let mut best = (Configuration::new(), 0.0);
    let mut levels: Vec<Option<usize>> = vec![None; n];
    search(instance, spec, caps, 0, 0.0, &mut levels, &mut best)?;
    Ok(best)
}

fn search(
    instance: &Instance,
    spec: &BudgetSpec,
    caps: ExactCaps,
    v: usize,
    cost: f64,
    levels: &mut Vec<Option<usize>>,
    best: &mut (Configuration, f64),
) -> Result<()> {
    if v == levels.len() {
        let config: Configuration = levels
            .iter()
            .enumerate()
            .filter_map(|(u, l)| l.map(|l| SeedDiscountPair::new(u, l)))
            .collect();
        let value = f_exact(&config, instance, caps)?;
        if value > best.1 {
            *best = (config, value);
        }
        return Ok(());
    }
    levels[v] = None;
    search(instance, spec, caps, v + 1, cost, levels, best)?;
    for l in 0..instance.menu.len() {
        let c = cost + node_cost(instance, v, Some(l), spec.mode);
        if !spec.admits(c) {
            // node costs are non-decreasing in the level in both modes
            break;
        }
        levels[v] = Some(l);
        search(instance, spec, caps, v + 1, c, levels, best)?;
    }
    levels[v] = None;
    Ok(())
}
