//! Self-check report: each group compares a formula with an independent
//! computation on random inputs and reports the largest deviation.

use crate::error::Result;
use crate::fragtree::{catalan, enumerate_fragmentation_trees, Budget};
use crate::links::Subset;
use crate::poset::{leq_p, mobius, mobius_recursive};
use crate::prob::{
    dist_continuous, dist_continuous_all, dist_continuous_via_trees, dist_discrete_all, dist_discrete_endpoints, dist_discrete_times,
    generator_dist_continuous, lambda_chain, transition_matrix_dist, RateSpec, Time, TransitionMatrix,
};
use crate::sim::{count_outcomes, trajectory_rng, Estimate, DEFAULT_SEED};
use crate::tree::enumerate_plane_trees;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub n: u32,
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// Relative perturbation applied to link 1 on the formula side only.
    pub perturb: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 4,
            steps: vec![0, 1, 2, 5, 10, 20],
            times: vec![0.1, 1.0, 5.0],
            samples: 20_000,
            seed: DEFAULT_SEED,
            tolerance: 1e-10,
            perturb: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub max_deviation: f64,
    pub checks: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: u32,
    pub seed: u64,
    pub passed: bool,
    pub groups: Vec<CheckResult>,
}

/// Strictly positive weights rescaled so the rates sum to `total`.
pub fn random_rates<R: Rng>(n: usize, total: f64, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x * total / s).collect()
}

/// Random positive rates that are exact rationals with a common denominator
/// and sum exactly to `num/den`.
pub fn random_exact_rates<R: Rng>(n: usize, num: i64, den: i64, rng: &mut R) -> Vec<BigRational> {
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let s: i64 = w.iter().sum();
    w.iter().map(|&x| crate::numeric::ratio(x * num, s * den)).collect()
}

fn group(name: &'static str, tol: f64, devs: impl IntoIterator<Item = f64>, detail: String) -> CheckResult {
    let mut max_deviation: f64 = 0.0;
    let mut checks = 0;
    for d in devs {
        max_deviation = max_deviation.max(if d.is_nan() { f64::INFINITY } else { d });
        checks += 1;
    }
    let status = if max_deviation <= tol { Status::Pass } else { Status::Fail };
    CheckResult { name, status, max_deviation, checks, detail }
}

fn perturbed(rho: &[f64], perturb: Option<f64>) -> Vec<f64> {
    let mut out = rho.to_vec();
    if let Some(d) = perturb {
        out[0] *= 1.0 + d;
    }
    out
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let n = cfg.n as usize;
    let mut rng = trajectory_rng(cfg.seed, u64::MAX - 1);
    let budget = Budget::default();
    let mut groups = Vec::new();

    // Möbius: closed form against the recursion on every plane tree with at most n edges.
    let mut devs = Vec::new();
    for m in 1..=(n + 1).min(7) {
        for t in enumerate_plane_trees(m) {
            for h in t.edges().subsets() {
                for k in h.subsets().filter(|&k| leq_p(&t, h, k)) {
                    devs.push((mobius(&t, h, k).value - mobius_recursive(&t, h, k)?.value).abs() as f64);
                }
            }
        }
    }
    groups.push(group("mobius_closed_form_vs_recursion", 0.0, devs, format!("plane trees with up to {} edges", n.min(6))));

    let rho_d = random_rates(n, 0.5, &mut rng);
    let rates_d = RateSpec::discrete(rho_d.clone())?;
    let formula_d = RateSpec::discrete(perturbed(&rho_d, cfg.perturb))?;
    let mut devs = Vec::new();
    let mut norm = Vec::new();
    for &s in &cfg.steps {
        let oracle = transition_matrix_dist(&rates_d, s)?;
        let ours = dist_discrete_all(&formula_d, s, budget)?;
        devs.push(ours.max_abs_diff(&oracle));
        norm.push((ours.total() - 1.0).abs());
    }
    groups.push(group("discrete_tree_sum_vs_transition_matrix", cfg.tolerance, devs, format!("steps {:?}", cfg.steps)));

    let rho_c: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let rates_c = RateSpec::continuous(rho_c.clone())?;
    let formula_c = RateSpec::continuous(perturbed(&rho_c, cfg.perturb))?;
    let mut devs = Vec::new();
    let mut gen = Vec::new();
    for &t in &cfg.times {
        for g in rates_c.chain().subsets() {
            devs.push((dist_continuous_via_trees(g, &formula_c, t, budget)? - dist_continuous(g, &rates_c, t)?).abs());
        }
        let closed = dist_continuous_all(&formula_c, t)?;
        norm.push((closed.total() - 1.0).abs());
        gen.push(closed.max_abs_diff(&generator_dist_continuous(&rates_c, t)?));
    }
    groups.push(group("continuous_tree_sum_vs_closed_form", cfg.tolerance, devs, format!("times {:?}", cfg.times)));
    groups.push(group("continuous_closed_form_vs_generator", cfg.tolerance, gen, "uniformization".into()));
    groups.push(group("normalization", cfg.tolerance, norm, "both modes".into()));

    let mut devs = Vec::new();
    let ends = Subset::from_links([1, cfg.n]);
    for g in ends.subsets().filter(|g| !g.is_empty()) {
        let full = dist_discrete_times(g, &rates_d, &cfg.steps, budget)?;
        for (&s, p) in cfg.steps.iter().zip(full) {
            devs.push((dist_discrete_endpoints(g, &formula_d, s)? - p).abs());
        }
    }
    groups.push(group("endpoint_shortcut", cfg.tolerance.min(1e-12), devs, "G within {1, n}".into()));

    if cfg.n <= 8 {
        let exact = rates_d.to_exact();
        let m = TransitionMatrix::build(&exact)?;
        let mut devs = vec![if m.is_inclusion_triangular() { 0.0 } else { 1.0 }];
        let formula_exact = formula_d.to_exact();
        for g in exact.chain().subsets() {
            devs.push(crate::numeric::abs_diff(&m.entry(g, g), &lambda_chain(&formula_exact, g)?));
        }
        groups.push(group("eigenvalues_on_diagonal", 0.0, devs, "exact rationals".into()));
    }

    let mut devs = Vec::new();
    for k in 0..=n.min(10) {
        let g = Subset::from_links(1..=k as u32);
        let count = enumerate_fragmentation_trees(g, rates_d.chain(), budget)?.len() as u128;
        devs.push(count.abs_diff(catalan(k)) as f64);
    }
    groups.push(group("catalan_counts", 0.0, devs, "|G| up to n".into()));

    if cfg.samples == 0 {
        groups.push(CheckResult {
            name: "monte_carlo",
            status: Status::Skipped,
            max_deviation: 0.0,
            checks: 0,
            detail: "samples = 0".into(),
        });
    } else {
        let mut zs = Vec::new();
        let step = *cfg.steps.iter().find(|&&s| s > 0).unwrap_or(&1);
        let time = *cfg.times.first().unwrap_or(&1.0);
        let states = 1usize << n;
        let counts = count_outcomes(&rates_d, Time::Step(step), cfg.samples, cfg.seed, states, |tr| {
            Some(tr.state_at(step as f64).0 as usize)
        })?;
        let exact = dist_discrete_all(&formula_d, step, budget)?;
        for (g, p) in &exact.entries {
            zs.push(Estimate::from_counts(counts[g.0 as usize], cfg.samples).z(*p).abs());
        }
        let counts = count_outcomes(&rates_c, Time::Real(time), cfg.samples, cfg.seed ^ 1, states, |tr| {
            Some(tr.state_at(time).0 as usize)
        })?;
        for g in rates_c.chain().subsets() {
            let p = dist_continuous(g, &formula_c, time)?;
            zs.push(Estimate::from_counts(counts[g.0 as usize], cfg.samples).z(p).abs());
        }
        groups.push(group("monte_carlo", 4.0, zs, format!("{} samples, |z| bound 4", cfg.samples)));
    }

    let passed = groups.iter().all(|g| g.status != Status::Fail);
    Ok(VerifyReport { n: cfg.n, seed: cfg.seed, passed, groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let r = run_verify(&VerifyConfig { samples: 5000, ..VerifyConfig::default() }).unwrap();
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn perturbation_is_detected() {
        let cfg = VerifyConfig { n: 3, samples: 0, perturb: Some(1e-3), ..VerifyConfig::default() };
        let r = run_verify(&cfg).unwrap();
        assert!(!r.passed);
        let failed: Vec<&str> = r.groups.iter().filter(|g| g.status == Status::Fail).map(|g| g.name).collect();
        assert!(failed.contains(&"discrete_tree_sum_vs_transition_matrix"));
        assert!(failed.contains(&"continuous_tree_sum_vs_closed_form"));
    }

    #[test]
    fn zero_samples_skip_simulation() {
        let r = run_verify(&VerifyConfig { n: 2, samples: 0, ..VerifyConfig::default() }).unwrap();
        let mc = r.groups.iter().find(|g| g.name == "monte_carlo").unwrap();
        assert_eq!(mc.status, Status::Skipped);
        assert!(r.passed);
    }
}
