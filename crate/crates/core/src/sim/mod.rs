//! Monte Carlo engines for the fragmentation process and the auxiliary
//! process, with estimators and goodness-of-fit helpers.

mod auxiliary;
mod stats;

pub use auxiliary::{
    aux_atoms, aux_structural_support, compatible_state, coupled_construction, sample_aux, sample_aux_with, AuxState, CoupledRun,
    ExternalSymbol, InternalSymbol, AUX_VERTEX_LIMIT,
};
pub use stats::{binomial_sigma, chi_square_homogeneity, geometric_bin_check, BinCheck, ChiSquare, Estimate};

use crate::error::{Error, Result};
use crate::fragtree::FragTree;
use crate::links::Subset;
use crate::prob::{check_real_time, Mode, RateSpec, Time};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

/// Seed used by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_F4A9;

/// The generator for trajectory `index` under `seed`: ChaCha8 keyed by the
/// seed, with the trajectory index as stream number.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// First removal time of every link, `None` if not removed by the horizon.
/// Discrete steps are stored as exact integers in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub horizon: f64,
    pub removal: Vec<Option<f64>>,
}

impl Trajectory {
    pub fn removal_time(&self, link: u32) -> Option<f64> {
        self.removal[link as usize - 1]
    }

    /// `F_t = {α : τ_α <= t}`.
    pub fn state_at(&self, t: f64) -> Subset {
        Subset::from_links(
            self.removal
                .iter()
                .enumerate()
                .filter(|(_, r)| r.is_some_and(|x| x <= t))
                .map(|(i, _)| i as u32 + 1),
        )
    }

    fn check_time(&self, t: Time) -> Result<f64> {
        let x = match (self.mode, t) {
            (Mode::Discrete, Time::Step(s)) => s as f64,
            (Mode::Continuous, Time::Real(x)) => x,
            (Mode::Discrete, _) => return Err(Error::InvalidTime("discrete trajectories need a step count".into())),
            (Mode::Continuous, _) => return Err(Error::InvalidTime("continuous trajectories need a real time".into())),
        };
        if x > self.horizon {
            return Err(Error::InvalidTime(format!("{x} is beyond the horizon {}", self.horizon)));
        }
        Ok(x)
    }

    /// The fragmentation tree this trajectory matches at time `t`, as the key
    /// returned by [`FragTree::shape_key`]. `None` only if two links of one
    /// fragment share a removal time, which the dynamics rule out.
    pub fn tree_key_at(&self, t: f64) -> Option<(u64, Vec<u32>)> {
        let g = self.state_at(t);
        let links = g.to_vec();
        let mut parent = vec![0u32; links.len()];
        self.assign_parents(&links, 0, &mut parent, &links).then_some((g.0, parent))
    }

    fn assign_parents(&self, span: &[u32], up: u32, parent: &mut [u32], all: &[u32]) -> bool {
        if span.is_empty() {
            return true;
        }
        let time = |a: u32| self.removal_time(a).expect("removed link");
        let first = span.iter().copied().min_by(|&a, &b| time(a).total_cmp(&time(b))).unwrap();
        if span.iter().filter(|&&a| time(a) == time(first)).count() > 1 {
            return false;
        }
        let pos = span.iter().position(|&a| a == first).unwrap();
        parent[all.binary_search(&first).unwrap()] = up;
        self.assign_parents(&span[..pos], first, parent, all) && self.assign_parents(&span[pos + 1..], first, parent, all)
    }
}

/// Discrete-time simulation: each step, every nonempty current fragment `J`
/// draws one uniform `u` and loses the first link whose cumulative `ρ̂` (in
/// link order) exceeds `u`, or nothing if `u >= ρ̂_J`.
pub fn simulate_discrete_with<R: Rng>(rates: &RateSpec<f64>, t_max: u64, rng: &mut R) -> Result<Trajectory> {
    rates.require(Mode::Discrete)?;
    let whole = rates.chain().whole();
    let mut removal = vec![None; rates.n() as usize];
    let mut state = Subset::EMPTY;
    let all = rates.chain().all();
    for step in 1..=t_max {
        if state == all {
            break;
        }
        let mut next = state;
        for j in whole.split(state) {
            if j.is_empty() {
                continue;
            }
            let u: f64 = rng.random();
            let mut cum = 0.0;
            for a in j.links() {
                cum += rates.rho(a);
                if u < cum {
                    next = next.with(a);
                    removal[a as usize - 1] = Some(step as f64);
                    break;
                }
            }
        }
        state = next;
    }
    Ok(Trajectory { mode: Mode::Discrete, horizon: t_max as f64, removal })
}

pub fn simulate_discrete(rates: &RateSpec<f64>, t_max: u64, seed: u64) -> Result<Trajectory> {
    simulate_discrete_with(rates, t_max, &mut trajectory_rng(seed, 0))
}

/// Continuous-time simulation: removal times are independent exponentials,
/// censored beyond `t_max`.
pub fn simulate_continuous_with<R: Rng>(rates: &RateSpec<f64>, t_max: f64, rng: &mut R) -> Result<Trajectory> {
    rates.require(Mode::Continuous)?;
    check_real_time(t_max)?;
    let removal = rates
        .rates()
        .iter()
        .map(|&r| {
            let x = Exp::new(r).expect("positive rate").sample(rng);
            (x <= t_max).then_some(x)
        })
        .collect();
    Ok(Trajectory { mode: Mode::Continuous, horizon: t_max, removal })
}

pub fn simulate_continuous(rates: &RateSpec<f64>, t_max: f64, seed: u64) -> Result<Trajectory> {
    simulate_continuous_with(rates, t_max, &mut trajectory_rng(seed, 0))
}

/// Simulate up to `t` in the mode of `rates`.
pub fn simulate_with<R: Rng>(rates: &RateSpec<f64>, t: Time, rng: &mut R) -> Result<Trajectory> {
    match (rates.mode(), t) {
        (Mode::Discrete, Time::Step(s)) => simulate_discrete_with(rates, s, rng),
        (Mode::Continuous, Time::Real(x)) => simulate_continuous_with(rates, x, rng),
        (m, _) => Err(Error::InvalidTime(format!("time {t} does not fit {} rates", m.name()))),
    }
}

/// `{F_t ↔ T}`: all of `G` removed by `t`, nothing else removed by `t`, and
/// every `α ∈ G` removed no later than any link of its subtree.
pub fn matches_tree(traj: &Trajectory, tree: &FragTree, t: Time) -> Result<bool> {
    let t = traj.check_time(t)?;
    if traj.state_at(t) != tree.vertex_links() {
        return Ok(false);
    }
    let time = |a: u32| traj.removal_time(a).expect("removed link");
    Ok((0..tree.len()).all(|v| {
        let own = time(tree.link(v));
        tree.links_of(tree.subtree_vertices(v, crate::tree::EdgeSet::EMPTY))
            .links()
            .all(|b| own <= time(b))
    }))
}

/// Run `samples` trajectories to time `t` in parallel, one substream each,
/// and count how often `classify` returns each category.
pub fn count_outcomes<F>(rates: &RateSpec<f64>, t: Time, samples: u64, seed: u64, categories: usize, classify: F) -> Result<Vec<u64>>
where
    F: Fn(&Trajectory) -> Option<usize> + Sync,
{
    // Validate once so the parallel loop cannot fail.
    simulate_with(rates, t, &mut trajectory_rng(seed, u64::MAX))?;
    Ok((0..samples)
        .into_par_iter()
        .fold(
            || vec![0u64; categories],
            |mut acc, i| {
                let traj = simulate_with(rates, t, &mut trajectory_rng(seed, i)).expect("validated");
                if let Some(c) = classify(&traj) {
                    acc[c] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; categories],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

/// Fraction of trajectories matching `tree` at `t`, with binomial standard
/// error.
pub fn estimate_tree_prob(tree: &FragTree, rates: &RateSpec<f64>, t: Time, samples: u64, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Parse("samples must be at least 1".into()));
    }
    if tree.chain() != rates.chain() {
        return Err(Error::InvalidRates(format!("tree is on {} links, rates on {}", tree.chain().n(), rates.n())));
    }
    let counts = count_outcomes(rates, t, samples, seed, 1, |traj| {
        matches_tree(traj, tree, t).expect("time checked").then_some(0)
    })?;
    Ok(Estimate::from_counts(counts[0], samples))
}

/// Fraction of trajectories with `F_t = G`.
pub fn estimate_subset_prob(g: Subset, rates: &RateSpec<f64>, t: Time, samples: u64, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Parse("samples must be at least 1".into()));
    }
    rates.chain().check(g)?;
    let x = t.as_f64();
    let counts = count_outcomes(rates, t, samples, seed, 1, |traj| (traj.state_at(x) == g).then_some(0))?;
    Ok(Estimate::from_counts(counts[0], samples))
}

impl FragTree {
    /// `(mask of G, parent link of each vertex in link order, 0 for the root)`;
    /// identifies a fragmentation tree among those on the same chain.
    pub fn shape_key(&self) -> (u64, Vec<u32>) {
        let parents = match self.tree() {
            Some(t) => (0..t.len()).map(|v| t.parent(v).map_or(0, |p| t.label(p))).collect(),
            None => Vec::new(),
        };
        (self.vertex_links().0, parents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragtree::{enumerate_fragmentation_trees, fixtures::tree_134, Budget};
    use crate::links::LinkSet;

    #[test]
    fn zero_horizon_removes_nothing() {
        let r = RateSpec::discrete(vec![0.5, 0.5]).unwrap();
        assert!(simulate_discrete(&r, 0, 1).unwrap().removal.iter().all(Option::is_none));
        let c = RateSpec::continuous(vec![1.0, 2.0]).unwrap();
        assert!(simulate_continuous(&c, 0.0, 1).unwrap().removal.iter().all(Option::is_none));
    }

    #[test]
    fn forced_single_link() {
        let r = RateSpec::discrete(vec![1.0]).unwrap();
        for seed in 0..20 {
            assert_eq!(simulate_discrete(&r, 3, seed).unwrap().removal, vec![Some(1.0)]);
        }
    }

    #[test]
    fn one_removal_per_fragment_per_step() {
        let r = RateSpec::discrete(vec![0.5, 0.5]).unwrap();
        let both = count_outcomes(&r, Time::Step(1), 100_000, 9, 1, |tr| (tr.state_at(1.0).len() == 2).then_some(0)).unwrap();
        assert_eq!(both[0], 0);
    }

    #[test]
    fn same_seed_same_path() {
        let r = RateSpec::continuous(vec![0.3, 0.9, 1.4]).unwrap();
        assert_eq!(simulate_continuous(&r, 2.0, 77).unwrap(), simulate_continuous(&r, 2.0, 77).unwrap());
        let d = RateSpec::discrete(vec![0.2, 0.1, 0.3]).unwrap();
        assert_eq!(simulate_discrete(&d, 9, 5).unwrap(), simulate_discrete(&d, 9, 5).unwrap());
    }

    #[test]
    fn fig6_style_order_matches_tree_134() {
        let t = tree_134();
        let traj = Trajectory {
            mode: Mode::Discrete,
            horizon: 10.0,
            removal: vec![Some(5.0), None, Some(2.0), Some(4.0), None, None],
        };
        assert!(matches_tree(&traj, &t, Time::Step(6)).unwrap());
        assert!(!matches_tree(&traj, &t, Time::Step(4)).unwrap());
        let late_root = Trajectory { removal: vec![Some(1.0), None, Some(2.0), Some(4.0), None, None], ..traj.clone() };
        assert!(!matches_tree(&late_root, &t, Time::Step(6)).unwrap());
        assert!(matches_tree(&traj, &t, Time::Step(11)).is_err());
        assert_eq!(traj.tree_key_at(6.0), Some(t.shape_key()));
    }

    #[test]
    fn each_path_matches_exactly_one_tree() {
        let r = RateSpec::discrete(vec![0.15, 0.2, 0.1, 0.25]).unwrap();
        let chain = LinkSet::new(4).unwrap();
        for i in 0..300 {
            let traj = simulate_discrete_with(&r, 6, &mut trajectory_rng(3, i)).unwrap();
            for s in 0..=6 {
                let g = traj.state_at(s as f64);
                let trees = enumerate_fragmentation_trees(g, chain, Budget::default()).unwrap();
                let hits: Vec<&FragTree> =
                    trees.iter().filter(|t| matches_tree(&traj, t, Time::Step(s)).unwrap()).collect();
                assert_eq!(hits.len(), 1);
                assert_eq!(traj.tree_key_at(s as f64), Some(hits[0].shape_key()));
            }
        }
    }

    #[test]
    fn estimator_on_impossible_tree() {
        let r = RateSpec::discrete(vec![0.3, 0.3]).unwrap();
        let t = enumerate_fragmentation_trees(Subset::from_links([1]), r.chain(), Budget::default()).unwrap();
        let e = estimate_tree_prob(&t[0], &r, Time::Step(0), 1000, 1).unwrap();
        assert_eq!((e.estimate, e.stderr), (0.0, 0.0));
    }
}
