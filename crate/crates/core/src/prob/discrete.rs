use super::{DistTable, Mode, RateSpec, Time};
use crate::error::{Error, Result};
use crate::fragtree::{enumerate_fragmentation_trees, Budget, FragTree};
use crate::links::{Fragment, Subset};
use crate::numeric::{is_positive, Scalar};
use rayon::prelude::*;

/// `λ^I_G = Π_{J ∈ ℒ^I_G} (1 − ρ̂_J)`: the probability that a step removes
/// nothing from `I` once `G` is removed.
pub fn lambda<S: Scalar>(rates: &RateSpec<S>, g: Subset, i: Fragment) -> Result<S> {
    rates.require(Mode::Discrete)?;
    if !g.is_subset(i.mask()) {
        return Err(Error::NotInFragment { subset: g.to_string(), fragment: i.to_string() });
    }
    Ok(lambda_unchecked(rates, g, i))
}

/// `λ_G = λ^L_G`.
pub fn lambda_chain<S: Scalar>(rates: &RateSpec<S>, g: Subset) -> Result<S> {
    rates.chain().check(g)?;
    lambda(rates, g, rates.chain().whole())
}

pub(crate) fn lambda_unchecked<S: Scalar>(rates: &RateSpec<S>, g: Subset, i: Fragment) -> S {
    i.split(g)
        .into_iter()
        .fold(S::one(), |acc, j| acc * (S::one() - rates.fragment_sum(j)))
}

/// `λ^I_G − λ^I_∅`, expanded as `Σ_{ν∈G} ρ̂_ν + Σ_{k≥2} (−1)^k e_k` where `e_k`
/// is the elementary symmetric polynomial of the fragment sums `ρ̂_J`,
/// `J ∈ ℒ^I_G`. This avoids subtracting two nearly equal products.
pub fn slot_denominator<S: Scalar>(rates: &RateSpec<S>, g: Subset, i: Fragment) -> S {
    let sums: Vec<S> = i.split(g).into_iter().map(|j| rates.fragment_sum(j)).collect();
    let mut e = vec![S::zero(); sums.len() + 1];
    e[0] = S::one();
    for (m, x) in sums.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] = e[k].clone() + e[k - 1].clone() * x.clone();
        }
    }
    let higher = e
        .into_iter()
        .enumerate()
        .skip(2)
        .map(|(k, ek)| if k % 2 == 0 { ek } else { -ek });
    S::sum_all(std::iter::once(rates.subset_sum(g)).chain(higher))
}

/// The time-independent part of the discrete tree probability: one
/// `(coefficient, λ_{G_γ(H)})` pair per `H ⊆ E`, by increasing `|H|`, so that
/// `P(F̂_t ↔ T) = Σ_H c_H (λ_{G_γ(H)}^t − λ_∅^t)`.
#[derive(Debug, Clone)]
pub struct DiscreteTreeExpansion<S = f64> {
    lambda_empty: S,
    terms: Vec<(S, S)>,
    empty_tree: bool,
}

impl<S: Scalar> DiscreteTreeExpansion<S> {
    pub fn new(tree: &FragTree, rates: &RateSpec<S>) -> Result<Self> {
        rates.require(Mode::Discrete)?;
        if tree.chain() != rates.chain() {
            return Err(Error::InvalidRates(format!(
                "tree is on {} links, rates on {}",
                tree.chain().n(),
                rates.n()
            )));
        }
        let whole = rates.chain().whole();
        let lambda_empty = S::one() - rates.fragment_sum(whole);
        if tree.is_empty() {
            return Ok(Self { lambda_empty, terms: Vec::new(), empty_tree: true });
        }
        let mut terms = Vec::with_capacity(1 << tree.edges().len());
        for h in tree.edges().subsets_by_size() {
            let mut coef = S::one();
            for v in 0..tree.len() {
                let removed = tree.links_of(tree.subtree_vertices(v, h));
                let d = slot_denominator(rates, removed, tree.internal(v));
                if !is_positive(&d) {
                    return Err(Error::Consistency(format!(
                        "non-positive denominator {} at vertex {}",
                        d.to_f64(),
                        tree.link(v)
                    )));
                }
                coef = coef * rates.rho(tree.link(v)).clone() / d;
            }
            if h.len() % 2 == 1 {
                coef = -coef;
            }
            terms.push((coef, lambda_unchecked(rates, tree.stump_links(h), whole)));
        }
        Ok(Self { lambda_empty, terms, empty_tree: false })
    }

    pub fn eval(&self, t: u64) -> S {
        let base = self.lambda_empty.powu(t);
        if self.empty_tree {
            return base;
        }
        S::sum_all(self.terms.iter().map(|(c, l)| c.clone() * (l.powu(t) - base.clone())))
    }
}

/// `P(F̂_t ↔ T)`.
pub fn tree_prob_discrete<S: Scalar>(tree: &FragTree, rates: &RateSpec<S>, t: u64) -> Result<S> {
    Ok(DiscreteTreeExpansion::new(tree, rates)?.eval(t))
}

/// `P(F̂_t = G)` at each of `times`, summing over all fragmentation trees on `G`.
pub fn dist_discrete_times<S: Scalar>(g: Subset, rates: &RateSpec<S>, times: &[u64], budget: Budget) -> Result<Vec<S>> {
    rates.require(Mode::Discrete)?;
    let trees = enumerate_fragmentation_trees(g, rates.chain(), budget)?;
    let expansions = trees
        .par_iter()
        .map(|t| DiscreteTreeExpansion::new(t, rates))
        .collect::<Result<Vec<_>>>()?;
    Ok(times
        .iter()
        .map(|&t| S::sum_all(expansions.iter().map(|e| e.eval(t))))
        .collect())
}

pub fn dist_discrete<S: Scalar>(g: Subset, rates: &RateSpec<S>, t: u64, budget: Budget) -> Result<S> {
    Ok(dist_discrete_times(g, rates, &[t], budget)?.remove(0))
}

/// The full table over all `G ⊆ L` in mask order.
pub fn dist_discrete_all<S: Scalar>(rates: &RateSpec<S>, t: u64, budget: Budget) -> Result<DistTable<S>> {
    rates.require(Mode::Discrete)?;
    budget.check(rates.n() as usize)?;
    let subsets: Vec<Subset> = rates.chain().subsets().collect();
    let entries = subsets
        .par_iter()
        .map(|&g| dist_discrete(g, rates, t, budget).map(|p| (g, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistTable { time: Time::Step(t), entries })
}

/// For nonempty `G ⊆ {1, n}` every tree on `G` is determined by the removal
/// order alone and the distribution collapses to
/// `Σ_{∅≠H⊆G} (−1)^{|G|−|H|} (λ_H^t − λ_∅^t)`.
pub fn dist_discrete_endpoints<S: Scalar>(g: Subset, rates: &RateSpec<S>, t: u64) -> Result<S> {
    rates.require(Mode::Discrete)?;
    let n = rates.n();
    let ends = Subset::from_links([1, n]);
    if g.is_empty() || !g.is_subset(ends) {
        return Err(Error::NotEndpointSubset(g.to_string()));
    }
    let whole = rates.chain().whole();
    let base = (S::one() - rates.fragment_sum(whole)).powu(t);
    let terms = g.subsets_by_size().into_iter().filter(|h| !h.is_empty()).map(|h| {
        let term = lambda_unchecked(rates, h, whole).powu(t) - base.clone();
        if (g.len() - h.len()) % 2 == 1 { -term } else { term }
    });
    Ok(S::sum_all(terms))
}
