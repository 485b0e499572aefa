use super::{check_real_time, DistTable, Mode, RateSpec, Time};
use crate::error::{Error, Result};
use crate::fragtree::{enumerate_fragmentation_trees, Budget, FragTree};
use crate::links::Subset;
use crate::numeric::{CompensatedSum, Scalar};
use rayon::prelude::*;

/// Allowed excursion outside `[0, 1]` before clamping.
const CLAMP_SLACK: f64 = 1e-10;

/// Links are removed independently after exponential waiting times, so
/// `P(F̌_t = G) = exp(−ρ̌_{L∖G} t) · Π_{α∈G} (1 − exp(−ρ̌_α t))`.
pub fn dist_continuous(g: Subset, rates: &RateSpec<f64>, t: f64) -> Result<f64> {
    rates.require(Mode::Continuous)?;
    rates.chain().check(g)?;
    check_real_time(t)?;
    let rest = rates.subset_sum(rates.chain().all().difference(g));
    Ok(g.links().fold((-rest * t).exp(), |acc, a| acc * -(-rates.rho(a) * t).exp_m1()))
}

pub fn dist_continuous_all(rates: &RateSpec<f64>, t: f64) -> Result<DistTable<f64>> {
    let entries = rates
        .chain()
        .subsets()
        .map(|g| dist_continuous(g, rates, t).map(|p| (g, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistTable { time: Time::Real(t), entries })
}

/// The alternating sum for `P(F̌_t ↔ T)` before clamping.
pub fn tree_prob_continuous_raw(tree: &FragTree, rates: &RateSpec<f64>, t: f64) -> Result<f64> {
    rates.require(Mode::Continuous)?;
    check_real_time(t)?;
    if tree.chain() != rates.chain() {
        return Err(Error::InvalidRates(format!("tree is on {} links, rates on {}", tree.chain().n(), rates.n())));
    }
    let all = rates.chain().all();
    if tree.is_empty() {
        return Ok((-rates.subset_sum(all) * t).exp());
    }
    let mut acc = CompensatedSum::default();
    for h in tree.edges().subsets_by_size() {
        let stump = tree.stump_links(h);
        let mut term = -(-rates.subset_sum(stump) * t).exp_m1() * (-rates.subset_sum(all.difference(stump)) * t).exp();
        for v in 0..tree.len() {
            let below = tree.links_of(tree.subtree_vertices(v, h));
            term *= rates.rho(tree.link(v)) / rates.subset_sum(below);
        }
        acc.add(if h.len() % 2 == 1 { -term } else { term });
    }
    Ok(acc.value())
}

/// `P(F̌_t ↔ T)`, clamped to `[0, 1]` after checking the raw sum is within
/// `1e-10` of that range.
pub fn tree_prob_continuous(tree: &FragTree, rates: &RateSpec<f64>, t: f64) -> Result<f64> {
    let raw = tree_prob_continuous_raw(tree, rates, t)?;
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&raw) {
        return Err(Error::Consistency(format!("tree probability {raw} outside [0, 1]")));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// `Σ_{T ∈ τ(G, L)} P(F̌_t ↔ T)`.
pub fn dist_continuous_via_trees(g: Subset, rates: &RateSpec<f64>, t: f64, budget: Budget) -> Result<f64> {
    rates.require(Mode::Continuous)?;
    let trees = enumerate_fragmentation_trees(g, rates.chain(), budget)?;
    let probs = trees
        .par_iter()
        .map(|tr| tree_prob_continuous(tr, rates, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(f64::sum_all(probs))
}
