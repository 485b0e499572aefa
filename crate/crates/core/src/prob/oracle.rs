//! Brute-force oracles on the full state space of subsets.

use super::{check_real_time, DistTable, Mode, RateSpec, Time};
use crate::error::{Error, Result};
use crate::links::Subset;
use crate::numeric::{CompensatedSum, Scalar};
use statrs::function::gamma::ln_gamma;

pub const MATRIX_LINK_LIMIT: u32 = 12;

fn check_size(n: u32) -> Result<()> {
    if n > MATRIX_LINK_LIMIT {
        Err(Error::SizeBound { what: "links for the matrix oracle", got: n as usize, limit: MATRIX_LINK_LIMIT as usize })
    } else {
        Ok(())
    }
}

/// One-step transition matrix of the discrete process, stored by row.
/// From `G`, each fragment `J ∈ ℒ_G` independently loses link `α` with
/// probability `ρ̂_α` or nothing with probability `1 − ρ̂_J`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix<S = f64> {
    n: u32,
    rows: Vec<Vec<(u64, S)>>,
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn build(rates: &RateSpec<S>) -> Result<Self> {
        rates.require(Mode::Discrete)?;
        check_size(rates.n())?;
        let whole = rates.chain().whole();
        let rows = rates
            .chain()
            .subsets()
            .map(|g| {
                let mut row = vec![(g.0, S::one())];
                for j in whole.split(g) {
                    let mut next = Vec::with_capacity(row.len() * (j.len() as usize + 1));
                    for (to, p) in &row {
                        next.push((*to, p.clone() * (S::one() - rates.fragment_sum(j))));
                        for a in j.links() {
                            next.push((to | 1 << (a - 1), p.clone() * rates.rho(a).clone()));
                        }
                    }
                    row = next;
                }
                row
            })
            .collect();
        Ok(Self { n: rates.n(), rows })
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, from: Subset) -> &[(u64, S)] {
        &self.rows[from.0 as usize]
    }

    pub fn entry(&self, from: Subset, to: Subset) -> S {
        self.row(from)
            .iter()
            .find(|(s, _)| *s == to.0)
            .map_or_else(S::zero, |(_, p)| p.clone())
    }

    /// Every transition goes to a superset, so ordering states by any linear
    /// extension of inclusion makes the matrix upper triangular.
    pub fn is_inclusion_triangular(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(from, row)| row.iter().all(|(to, _)| *to & from as u64 == from as u64))
    }

    pub fn row_sums(&self) -> Vec<S> {
        self.rows.iter().map(|r| S::sum_all(r.iter().map(|(_, p)| p.clone()))).collect()
    }

    /// The distribution after `t` steps from `F_0 = ∅`, indexed by mask.
    pub fn propagate(&self, t: u64) -> Vec<S> {
        let mut v = vec![S::zero(); self.rows.len()];
        v[0] = S::one();
        for _ in 0..t {
            let mut next = vec![S::zero(); self.rows.len()];
            for (from, p) in v.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                for (to, q) in &self.rows[from] {
                    next[*to as usize] = next[*to as usize].clone() + p.clone() * q.clone();
                }
            }
            v = next;
        }
        v
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

/// `P(F̂_t = G)` for all `G` from the `t`-th power of the transition matrix.
pub fn transition_matrix_dist<S: Scalar>(rates: &RateSpec<S>, t: u64) -> Result<DistTable<S>> {
    let m = TransitionMatrix::build(rates)?;
    let entries = m.propagate(t).into_iter().enumerate().map(|(g, p)| (Subset(g as u64), p)).collect();
    Ok(DistTable { time: Time::Step(t), entries })
}

/// Continuous-time distribution from the generator (link `α` added at rate
/// `ρ̌_α`) by uniformization, with Poisson weights in log space.
pub fn generator_dist_continuous(rates: &RateSpec<f64>, t: f64) -> Result<DistTable<f64>> {
    rates.require(Mode::Continuous)?;
    check_size(rates.n())?;
    check_real_time(t)?;
    let states = 1usize << rates.n();
    let total = rates.subset_sum(rates.chain().all());
    let mu = total * t;
    let mut v = vec![0.0; states];
    v[0] = 1.0;
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::default(); states];
    let k_max = (mu + 20.0 * mu.sqrt() + 60.0).ceil() as u64;
    let mut weight_seen = 0.0;
    for k in 0..=k_max {
        let w = if mu == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (-mu + k as f64 * mu.ln() - ln_gamma(k as f64 + 1.0)).exp()
        };
        for (a, x) in acc.iter_mut().zip(&v) {
            a.add(w * x);
        }
        weight_seen += w;
        if k as f64 > mu && 1.0 - weight_seen < 1e-17 {
            break;
        }
        let mut next = vec![0.0; states];
        for (g, &p) in v.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut stay = 1.0;
            for a in 1..=rates.n() {
                let bit = 1usize << (a - 1);
                if g & bit == 0 {
                    let q = rates.rho(a) / total;
                    next[g | bit] += p * q;
                    stay -= q;
                }
            }
            next[g] += p * stay.max(0.0);
        }
        v = next;
    }
    let entries = acc.into_iter().enumerate().map(|(g, a)| (Subset(g as u64), a.value())).collect();
    Ok(DistTable { time: Time::Real(t), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use crate::prob::discrete::lambda_chain;
    use num_rational::BigRational;

    #[test]
    fn zero_and_one_step() {
        let r = RateSpec::discrete(vec![0.4]).unwrap();
        let d0 = transition_matrix_dist(&r, 0).unwrap();
        assert_eq!(d0.entries, vec![(Subset(0), 1.0), (Subset(1), 0.0)]);
        let d1 = transition_matrix_dist(&r, 1).unwrap();
        assert_eq!(d1.get(Subset(1)), Some(&0.4));
    }

    #[test]
    fn triangular_with_lambda_diagonal() {
        let r = RateSpec::discrete(vec![ratio(1, 10), ratio(1, 5), ratio(1, 3), ratio(1, 7)]).unwrap();
        let m = TransitionMatrix::build(&r).unwrap();
        assert!(m.is_inclusion_triangular());
        for g in r.chain().subsets() {
            assert_eq!(m.entry(g, g), lambda_chain(&r, g).unwrap());
        }
        assert!(m.row_sums().iter().all(|s| *s == BigRational::from_integer(1.into())));
        assert_eq!(m.row(r.chain().all()), &[(15, ratio(1, 1))]);
    }

    #[test]
    fn size_limit() {
        let r = RateSpec::discrete(vec![0.01; 13]).unwrap();
        assert!(matches!(TransitionMatrix::build(&r), Err(Error::SizeBound { .. })));
    }

    #[test]
    fn uniformization_matches_closed_form() {
        let r = RateSpec::continuous(vec![0.3, 1.1, 0.6, 2.0]).unwrap();
        for t in [0.0, 0.1, 1.0, 5.0] {
            let a = generator_dist_continuous(&r, t).unwrap();
            let b = crate::prob::dist_continuous_all(&r, t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-13, "t={t}");
        }
    }
}
