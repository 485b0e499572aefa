//! Exact probabilities of the fragmentation process: tree probabilities by
//! alternating sums over edge subsets, full distributions, and independent
//! matrix oracles.

mod continuous;
mod discrete;
mod oracle;
mod rates;

pub use continuous::{dist_continuous, dist_continuous_all, dist_continuous_via_trees, tree_prob_continuous, tree_prob_continuous_raw};
pub use discrete::{
    dist_discrete, dist_discrete_all, dist_discrete_endpoints, dist_discrete_times, lambda, lambda_chain, slot_denominator,
    tree_prob_discrete, DiscreteTreeExpansion,
};
pub use oracle::{generator_dist_continuous, transition_matrix_dist, TransitionMatrix, MATRIX_LINK_LIMIT};
pub use rates::{Mode, RateSpec, RatesJson};

use crate::error::{Error, Result};
use crate::links::Subset;
use crate::numeric::Scalar;
use serde_json::json;
use std::fmt::Write as _;

/// A time point: a step count in discrete time or a real time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    Step(u64),
    Real(f64),
}

impl Time {
    pub fn as_f64(self) -> f64 {
        match self {
            Time::Step(s) => s as f64,
            Time::Real(t) => t,
        }
    }

    /// Parse a time for `mode`; discrete time must be a nonnegative integer.
    pub fn parse(text: &str, mode: Mode) -> Result<Self> {
        let text = text.trim();
        match mode {
            Mode::Discrete => text
                .parse::<u64>()
                .map(Time::Step)
                .map_err(|_| Error::InvalidTime(format!("{text:?} is not a nonnegative integer step"))),
            Mode::Continuous => {
                let t: f64 = text.parse().map_err(|_| Error::InvalidTime(format!("{text:?} is not a number")))?;
                check_real_time(t)?;
                Ok(Time::Real(t))
            }
        }
    }
}

impl std::fmt::Display for Time {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Time::Step(s) => write!(f, "{s}"),
            Time::Real(t) => write!(f, "{t}"),
        }
    }
}

pub fn check_real_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime(format!("{t} must be finite and nonnegative")))
    }
}

/// `P(F_t = G)` for a list of subsets at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable<S = f64> {
    pub time: Time,
    pub entries: Vec<(Subset, S)>,
}

impl<S: Scalar> DistTable<S> {
    pub fn get(&self, g: Subset) -> Option<&S> {
        self.entries.iter().find(|(s, _)| *s == g).map(|(_, p)| p)
    }

    pub fn total(&self) -> S {
        S::sum_all(self.entries.iter().map(|(_, p)| p.clone()))
    }

    /// Largest absolute entrywise difference; tables must list the same subsets.
    pub fn max_abs_diff(&self, other: &DistTable<S>) -> f64 {
        assert_eq!(self.entries.len(), other.entries.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|((a, p), (b, q))| {
                assert_eq!(a, b);
                crate::numeric::abs_diff(p, q)
            })
            .fold(0.0, f64::max)
    }

    /// Header `subset,probability`; subsets as `1;3;4`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,probability\n");
        for (g, p) in &self.entries {
            writeln!(out, "{},{}", g.to_csv_label(), format_prob(p.to_f64())).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "time": self.time.as_f64(),
            "entries": self.entries.iter().map(|(g, p)| json!({
                "subset": g.to_vec(),
                "probability": p.to_f64(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// 17 significant digits.
pub fn format_prob(p: f64) -> String {
    format!("{p:.16e}")
}
