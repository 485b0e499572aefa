//! The auxiliary process attached to a fixed fragmentation tree, and the
//! pathwise construction of the discrete process from it.

use super::{trajectory_rng, Trajectory};
use crate::error::{Error, Result};
use crate::fragtree::{FragTree, Line};
use crate::links::Subset;
use crate::prob::{Mode, RateSpec};
use crate::tree::VertexSet;
use rand::Rng;
use std::fmt;

/// Largest `|G|` accepted by exact atom enumeration.
pub const AUX_VERTEX_LIMIT: usize = 6;

/// State of an external fragment `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExternalSymbol {
    /// `ω^J_∅`: nothing happens in `J`.
    Quiet,
    /// `ω^J_J`: some link of `J` fires.
    Fired,
}

/// State of an internal fragment `I_α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InternalSymbol {
    /// `ω_∅`.
    Quiet,
    /// `ω_α`: the vertex link itself fires.
    Own,
    /// `ω_dep`: both sides fire while still joined.
    Dep,
    /// `ω_ind`: at least one side fires on its own.
    Ind,
}

/// One draw `X_t = (X^J)_{J ∈ 𝕊}`: internal fragments by vertex index,
/// external fragments in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuxState {
    pub internal: Vec<InternalSymbol>,
    pub external: Vec<ExternalSymbol>,
}

impl fmt::Display for AuxState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ext = self.external.iter().map(|s| match s {
            ExternalSymbol::Quiet => "∅",
            ExternalSymbol::Fired => "J",
        });
        let int = self.internal.iter().map(|s| match s {
            InternalSymbol::Quiet => "∅",
            InternalSymbol::Own => "α",
            InternalSymbol::Dep => "dep",
            InternalSymbol::Ind => "ind",
        });
        write!(f, "({})", ext.chain(int).collect::<Vec<_>>().join(","))
    }
}

impl AuxState {
    fn line_quiet(&self, line: Line) -> bool {
        match line {
            Line::External(k) => self.external[k] == ExternalSymbol::Quiet,
            Line::Vertex(c) => self.internal[c] == InternalSymbol::Quiet,
        }
    }

    /// Every fragment strictly inside `I_α` is quiet whenever `X^{I_α}` is
    /// not `ω_ind`.
    pub fn is_consistent(&self, tree: &FragTree) -> bool {
        (0..tree.len()).all(|v| self.internal[v] == InternalSymbol::Ind || self.quiet_below(tree, v))
    }

    fn quiet_below(&self, tree: &FragTree, v: usize) -> bool {
        [tree.left(v), tree.right(v)].into_iter().all(|line| {
            self.line_quiet(line)
                && match line {
                    Line::Vertex(c) => self.quiet_below(tree, c),
                    Line::External(_) => true,
                }
        })
    }
}

struct SlotRates {
    /// `ρ̂_{I_α}`, `ρ̂_α`, `ρ̂_{I′_α}`, `ρ̂_{I″_α}` per vertex.
    whole: Vec<f64>,
    own: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    external: Vec<f64>,
}

impl SlotRates {
    fn new(tree: &FragTree, rates: &RateSpec<f64>) -> Result<Self> {
        rates.require(Mode::Discrete)?;
        if tree.chain() != rates.chain() {
            return Err(Error::InvalidRates(format!("tree is on {} links, rates on {}", tree.chain().n(), rates.n())));
        }
        let m = tree.len();
        Ok(Self {
            whole: (0..m).map(|v| rates.fragment_sum(tree.internal(v))).collect(),
            own: (0..m).map(|v| *rates.rho(tree.link(v))).collect(),
            left: (0..m).map(|v| rates.fragment_sum(tree.left_fragment(v))).collect(),
            right: (0..m).map(|v| rates.fragment_sum(tree.right_fragment(v))).collect(),
            external: tree.externals().iter().map(|&j| rates.fragment_sum(j)).collect(),
        })
    }

    /// `λ^{I_α}_α = (1 − ρ̂_{I′})(1 − ρ̂_{I″})`.
    fn lambda(&self, v: usize) -> f64 {
        (1.0 - self.left[v]) * (1.0 - self.right[v])
    }

    /// Conditional law of `X^{I_α}` given both sides quiet: Quiet, Own, Dep.
    fn split(&self, v: usize) -> [f64; 3] {
        let l = self.lambda(v);
        [(1.0 - self.whole[v]) / l, self.own[v] / l, self.left[v] * self.right[v] / l]
    }
}

fn bottom_up(tree: &FragTree) -> Vec<usize> {
    let mut order = tree.tree().map_or_else(Vec::new, |t| t.preorder());
    order.reverse();
    order
}

fn draw<R: Rng>(tree: &FragTree, slots: &SlotRates, order: &[usize], rng: &mut R) -> AuxState {
    let external = slots
        .external
        .iter()
        .map(|&p| if rng.random::<f64>() < p { ExternalSymbol::Fired } else { ExternalSymbol::Quiet })
        .collect();
    let mut state = AuxState { internal: vec![InternalSymbol::Quiet; tree.len()], external };
    for &v in order {
        let u: f64 = rng.random();
        state.internal[v] = if !state.line_quiet(tree.left(v)) || !state.line_quiet(tree.right(v)) {
            InternalSymbol::Ind
        } else {
            let [q, o, _] = slots.split(v);
            if u < q {
                InternalSymbol::Quiet
            } else if u < q + o {
                InternalSymbol::Own
            } else {
                InternalSymbol::Dep
            }
        };
    }
    state
}

/// One draw of `X_t`, external fragments first, then internal fragments from
/// the leaves up. Each fragment consumes one uniform.
pub fn sample_aux_with<R: Rng>(tree: &FragTree, rates: &RateSpec<f64>, rng: &mut R) -> Result<AuxState> {
    let slots = SlotRates::new(tree, rates)?;
    Ok(draw(tree, &slots, &bottom_up(tree), rng))
}

pub fn sample_aux(tree: &FragTree, rates: &RateSpec<f64>, seed: u64) -> Result<AuxState> {
    sample_aux_with(tree, rates, &mut trajectory_rng(seed, 0))
}

fn enumerate_states(tree: &FragTree) -> Result<Vec<AuxState>> {
    if tree.len() > AUX_VERTEX_LIMIT {
        return Err(Error::SizeBound { what: "vertices for atom enumeration", got: tree.len(), limit: AUX_VERTEX_LIMIT });
    }
    let mut states = vec![AuxState { internal: vec![InternalSymbol::Quiet; tree.len()], external: Vec::new() }];
    for j in tree.externals() {
        let options: &[ExternalSymbol] =
            if j.is_empty() { &[ExternalSymbol::Quiet] } else { &[ExternalSymbol::Quiet, ExternalSymbol::Fired] };
        states = states
            .into_iter()
            .flat_map(|s| {
                options.iter().map(move |&o| {
                    let mut s = s.clone();
                    s.external.push(o);
                    s
                })
            })
            .collect();
    }
    for v in bottom_up(tree) {
        states = states
            .into_iter()
            .flat_map(|s| {
                let options: &[InternalSymbol] = if s.line_quiet(tree.left(v)) && s.line_quiet(tree.right(v)) {
                    &[InternalSymbol::Quiet, InternalSymbol::Own, InternalSymbol::Dep]
                } else {
                    &[InternalSymbol::Ind]
                };
                options.iter().map(move |&o| {
                    let mut s = s.clone();
                    s.internal[v] = o;
                    s
                })
            })
            .collect();
    }
    states.sort();
    Ok(states)
}

/// The states the construction can reach when every choice it offers is
/// allowed: empty external fragments stay quiet, fired sides force `ω_ind`,
/// otherwise any of `ω_∅`, `ω_α`, `ω_dep`. Some of these may have
/// probability zero (`ω_dep` with an empty side).
pub fn aux_structural_support(tree: &FragTree) -> Result<Vec<AuxState>> {
    enumerate_states(tree)
}

/// Every structurally reachable state with its exact probability.
pub fn aux_atoms(tree: &FragTree, rates: &RateSpec<f64>) -> Result<Vec<(AuxState, f64)>> {
    let slots = SlotRates::new(tree, rates)?;
    Ok(enumerate_states(tree)?
        .into_iter()
        .map(|s| {
            let mut p: f64 = s
                .external
                .iter()
                .zip(&slots.external)
                .map(|(x, &r)| if *x == ExternalSymbol::Fired { r } else { 1.0 - r })
                .product();
            for (v, x) in s.internal.iter().enumerate() {
                let [q, o, d] = slots.split(v);
                p *= match x {
                    InternalSymbol::Quiet => q,
                    InternalSymbol::Own => o,
                    InternalSymbol::Dep => d,
                    InternalSymbol::Ind => 1.0,
                };
            }
            (s, p)
        })
        .collect())
}

/// A path of the discrete process built from i.i.d. auxiliary draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    /// Removals up to the last compatible step; the horizon is one step
    /// before the failure, if any.
    pub trajectory: Trajectory,
    /// First step at which a current fragment draws an event the tree cannot
    /// follow.
    pub failure_time: Option<u64>,
}

impl CoupledRun {
    /// True iff the run is still compatible at `t` and has removed exactly `G`.
    pub fn matches_at(&self, tree: &FragTree, t: u64) -> bool {
        self.failure_time.is_none_or(|f| f > t) && self.trajectory.state_at(t as f64) == tree.vertex_links()
    }

    /// `F_t` if the run is still compatible at `t`.
    pub fn compatible_state(&self, t: u64) -> Option<Subset> {
        self.failure_time.is_none_or(|f| f > t).then(|| self.trajectory.state_at(t as f64))
    }
}

/// Build `F̂_1, …, F̂_{t_max}` from `X_1, X_2, …`: on every current fragment,
/// a quiet symbol removes nothing and `ω_α` on `I_α` removes `α`. Any other
/// symbol on a current fragment removes a link the tree does not allow, and
/// the run stops there without resolving which link it was.
pub fn coupled_construction<R: Rng>(tree: &FragTree, rates: &RateSpec<f64>, t_max: u64, rng: &mut R) -> Result<CoupledRun> {
    let slots = SlotRates::new(tree, rates)?;
    let order = bottom_up(tree);
    let mut removal = vec![None; rates.n() as usize];
    let mut removed = VertexSet::EMPTY;
    let mut current = vec![tree.root_line()];
    for step in 1..=t_max {
        let x = draw(tree, &slots, &order, rng);
        let mut added = Vec::new();
        for &line in &current {
            match line {
                Line::External(k) if x.external[k] == ExternalSymbol::Fired => {
                    return Ok(failed(rates, removal, step));
                }
                Line::External(_) => {}
                Line::Vertex(c) => match x.internal[c] {
                    InternalSymbol::Quiet => {}
                    InternalSymbol::Own => added.push(c),
                    InternalSymbol::Dep | InternalSymbol::Ind => return Ok(failed(rates, removal, step)),
                },
            }
        }
        for c in added {
            removed = removed.with(c);
            removal[tree.link(c) as usize - 1] = Some(step as f64);
            current.retain(|&l| l != Line::Vertex(c));
            current.extend([tree.left(c), tree.right(c)]);
        }
    }
    debug_assert!(removed.iter().all(|v| tree.tree().unwrap().ancestors(v).is_subset(removed)));
    Ok(CoupledRun {
        trajectory: Trajectory { mode: Mode::Discrete, horizon: t_max as f64, removal },
        failure_time: None,
    })
}

fn failed(rates: &RateSpec<f64>, removal: Vec<Option<f64>>, step: u64) -> CoupledRun {
    debug_assert_eq!(removal.len(), rates.n() as usize);
    CoupledRun {
        trajectory: Trajectory { mode: Mode::Discrete, horizon: (step - 1) as f64, removal },
        failure_time: Some(step),
    }
}

/// `F_t` of a directly simulated path if the path up to `t` follows a stump
/// tree of `tree`: only vertices of the tree removed, as an order ideal, each
/// before its removed descendants.
pub fn compatible_state(traj: &Trajectory, tree: &FragTree, t: f64) -> Option<Subset> {
    let state = traj.state_at(t);
    if !state.is_subset(tree.vertex_links()) {
        return None;
    }
    let Some(rt) = tree.tree() else {
        return Some(state);
    };
    let time = |v: usize| traj.removal_time(rt.label(v)).expect("removed");
    let removed: Vec<usize> = (0..rt.len()).filter(|&v| state.contains(rt.label(v))).collect();
    for &v in &removed {
        if let Some(p) = rt.parent(v) {
            if !state.contains(rt.label(p)) || time(p) >= time(v) {
                return None;
            }
        }
    }
    Some(state)
}
