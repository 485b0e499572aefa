//! The pruning poset on edge subsets of a rooted tree. `H ≼_P K` when `H` is
//! obtained from `K` by cutting further edges of the stump tree of `T − K`.
//! The poset is never materialized; everything is computed from the tree.

use crate::error::{Error, Result};
use crate::tree::{EdgeSet, RootedTree};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::HashMap;

/// Default bound on `|E|` for Hasse diagram export.
pub const HASSE_EDGE_LIMIT: usize = 16;
/// Bound on `|H ∖ K|` for the quadratic recursive oracle.
pub const RECURSIVE_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MobiusValue {
    pub value: i64,
    /// False when `H ⋠_P K`; `value` is then 0 by convention.
    pub comparable: bool,
}

pub fn leq_p(t: &RootedTree, h: EdgeSet, k: EdgeSet) -> bool {
    k.is_subset(h) && h.difference(k).is_subset(t.stump_edges(k))
}

fn check_pair(t: &RootedTree, h: EdgeSet, k: EdgeSet) -> Result<()> {
    t.check_edges(h)?;
    t.check_edges(k)?;
    if leq_p(t, h, k) {
        Ok(())
    } else {
        Err(Error::Incomparable)
    }
}

/// `[H, K]`, ordered by the mask of `I ∖ K`.
pub fn interval(t: &RootedTree, h: EdgeSet, k: EdgeSet) -> Result<Vec<EdgeSet>> {
    check_pair(t, h, k)?;
    Ok(h.difference(k)
        .subsets()
        .map(|a| k.union(a))
        .filter(|&i| leq_p(t, h, i))
        .collect())
}

/// All `H` with `H ≼_P K`.
pub fn down_set(t: &RootedTree, k: EdgeSet) -> Vec<EdgeSet> {
    t.stump_edges(k).subsets().map(|a| k.union(a)).collect()
}

/// The elements covering `H`: `H ∖ {e}` for `e ∈ M(H)`.
pub fn upper_covers(t: &RootedTree, h: EdgeSet) -> Vec<EdgeSet> {
    t.minimal_edges(h).iter().map(|e| h.without(e)).collect()
}

/// The elements covered by `H`: `H ∪ {e}` for `e` in the stump tree of `T − H`.
pub fn lower_covers(t: &RootedTree, h: EdgeSet) -> Vec<EdgeSet> {
    t.stump_edges(h).iter().map(|e| h.with(e)).collect()
}

/// `{H_{≽e} : e ∈ M(H)}`; `[H, ∅]` is the product of the `[H_{≽e}, ∅]`.
pub fn product_factorization(t: &RootedTree, h: EdgeSet) -> Vec<EdgeSet> {
    t.minimal_edges(h)
        .iter()
        .map(|e| EdgeSet(h.0 & t.descendants(e).0))
        .collect()
}

/// Closed form: `(−1)^{|H|−|K|}` when `H ∖ K` is an antichain, otherwise 0.
pub fn mobius(t: &RootedTree, h: EdgeSet, k: EdgeSet) -> MobiusValue {
    if !leq_p(t, h, k) {
        return MobiusValue { value: 0, comparable: false };
    }
    let d = h.difference(k);
    let value = if t.is_stump_cut_set(d) {
        if d.len() % 2 == 0 { 1 } else { -1 }
    } else {
        0
    };
    MobiusValue { value, comparable: true }
}

/// `μ(H, ·)` on `[H, K]` from `μ(x,x) = 1`, `μ(x,y) = −Σ_{x ≼ z ≺ y} μ(x,z)`.
pub fn mobius_recursive(t: &RootedTree, h: EdgeSet, k: EdgeSet) -> Result<MobiusValue> {
    check_pair(t, h, k)?;
    let gap = h.difference(k).len();
    if gap > RECURSIVE_LIMIT {
        return Err(Error::SizeBound { what: "|H \\ K|", got: gap, limit: RECURSIVE_LIMIT });
    }
    let mut elems = interval(t, h, k)?;
    // z ≺ y forces z ⊋ y, so larger sets come first.
    elems.sort_by_key(|e| std::cmp::Reverse(e.len()));
    let mut mu: HashMap<EdgeSet, i64> = HashMap::with_capacity(elems.len());
    for (j, &y) in elems.iter().enumerate() {
        let v = if y == h {
            1
        } else {
            -elems[..j]
                .iter()
                .filter(|&&z| z != y && leq_p(t, h, z) && leq_p(t, z, y))
                .map(|z| mu[z])
                .sum::<i64>()
        };
        mu.insert(y, v);
    }
    Ok(MobiusValue { value: mu[&k], comparable: true })
}

/// Build `g(I) = Σ_{H ≼_P I} f(H)` on the down-set of `K`, then invert with the
/// closed-form Möbius function. Returns `(f(K), Σ_{H ≼_P K} μ(H,K) g(H))`.
pub fn mobius_inversion_check<F>(t: &RootedTree, f: F, k: EdgeSet) -> (BigRational, BigRational)
where
    F: Fn(EdgeSet) -> BigRational,
{
    let below = down_set(t, k);
    let fv: HashMap<EdgeSet, BigRational> = below.iter().map(|&h| (h, f(h))).collect();
    let g = |i: EdgeSet| -> BigRational {
        down_set(t, i).iter().fold(BigRational::zero(), |acc, h| acc + &fv[h])
    };
    let mut recovered = BigRational::zero();
    for &h in &below {
        match mobius(t, h, k).value {
            0 => {}
            1 => recovered += g(h),
            _ => recovered -= g(h),
        }
    }
    (fv[&k].clone(), recovered)
}

/// Every covering pair `(lower, upper)` of the poset, grouped by `upper` in
/// mask order.
pub fn hasse_edges(t: &RootedTree) -> Result<Vec<(EdgeSet, EdgeSet)>> {
    hasse_edges_bounded(t, HASSE_EDGE_LIMIT)
}

pub fn hasse_edges_bounded(t: &RootedTree, limit: usize) -> Result<Vec<(EdgeSet, EdgeSet)>> {
    let m = t.edge_count();
    if m > limit {
        return Err(Error::SizeBound { what: "edges", got: m, limit });
    }
    Ok(t.edges()
        .subsets()
        .flat_map(|h| lower_covers(t, h).into_iter().map(move |l| (l, h)))
        .collect())
}
