use crate::error::{Error, Result};
use crate::links::{Fragment, LinkSet, Subset};
use crate::numeric::Scalar;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Continuous,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Continuous => "continuous",
        }
    }
}

/// Per-link removal probabilities (discrete time) or rates (continuous time).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSpec<S = f64> {
    mode: Mode,
    chain: LinkSet,
    rho: Vec<S>,
}

/// Slack allowed on `Σ ρ̂ <= 1` in floating mode.
const SUM_SLACK: f64 = 1e-12;

impl<S: Scalar> RateSpec<S> {
    pub fn new(mode: Mode, rho: Vec<S>) -> Result<Self> {
        let chain = LinkSet::new(rho.len() as u32)?;
        for (i, r) in rho.iter().enumerate() {
            if !r.to_f64().is_finite() || *r <= S::zero() {
                return Err(Error::InvalidRates(format!("rate of link {} must be positive and finite, got {r:?}", i + 1)));
            }
        }
        if mode == Mode::Discrete {
            let total = S::sum_all(rho.iter().cloned());
            let limit = if S::EXACT { S::one() } else { S::one() + S::from_f64(SUM_SLACK) };
            if total > limit {
                return Err(Error::InvalidRates(format!("discrete probabilities sum to {}, above 1", total.to_f64())));
            }
        }
        Ok(Self { mode, chain, rho })
    }

    pub fn discrete(rho: Vec<S>) -> Result<Self> {
        Self::new(Mode::Discrete, rho)
    }

    pub fn continuous(rho: Vec<S>) -> Result<Self> {
        Self::new(Mode::Continuous, rho)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn chain(&self) -> LinkSet {
        self.chain
    }

    pub fn n(&self) -> u32 {
        self.chain.n()
    }

    pub fn rho(&self, link: u32) -> &S {
        &self.rho[link as usize - 1]
    }

    pub fn rates(&self) -> &[S] {
        &self.rho
    }

    /// `ρ_J`, with `ρ_∅ = 0`.
    pub fn fragment_sum(&self, f: Fragment) -> S {
        S::sum_all(f.links().map(|a| self.rho(a).clone()))
    }

    pub fn subset_sum(&self, s: Subset) -> S {
        S::sum_all(s.links().map(|a| self.rho(a).clone()))
    }

    pub fn require(&self, mode: Mode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::WrongMode { expected: mode.name() })
        }
    }

    pub fn to_f64(&self) -> RateSpec<f64> {
        RateSpec { mode: self.mode, chain: self.chain, rho: self.rho.iter().map(Scalar::to_f64).collect() }
    }
}

impl RateSpec<f64> {
    /// The same rates as exact rationals (each double converted without rounding).
    pub fn to_exact(&self) -> RateSpec<BigRational> {
        RateSpec { mode: self.mode, chain: self.chain, rho: self.rho.iter().map(|&r| BigRational::from_f64(r)).collect() }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let js: RatesJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("rates JSON: {e}")))?;
        js.into_spec()
    }

    pub fn to_json(&self) -> RatesJson {
        RatesJson {
            mode: self.mode,
            n: self.n(),
            rho: (1..=self.n()).map(|a| (a.to_string(), *self.rho(a))).collect(),
        }
    }
}

/// `{"mode": "discrete", "n": 5, "rho": {"1": 0.1, ...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesJson {
    pub mode: Mode,
    pub n: u32,
    pub rho: BTreeMap<String, f64>,
}

impl RatesJson {
    pub fn into_spec(self) -> Result<RateSpec<f64>> {
        let chain = LinkSet::new(self.n)?;
        let mut rho = vec![None; self.n as usize];
        for (key, value) in &self.rho {
            let link: u32 = key.trim().parse().map_err(|_| Error::Parse(format!("rate key {key:?} is not a link")))?;
            if !chain.contains(link) {
                return Err(Error::LinkOutOfRange { link, n: self.n });
            }
            if rho[link as usize - 1].replace(*value).is_some() {
                return Err(Error::Parse(format!("link {link} given twice")));
            }
        }
        let rho = rho
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::InvalidRates(format!("no rate for link {}", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        RateSpec::new(self.mode, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    #[test]
    fn validation() {
        assert!(RateSpec::discrete(vec![0.5, 0.5]).is_ok());
        assert!(RateSpec::discrete(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(RateSpec::discrete(vec![0.6, 0.5]).is_err());
        assert!(RateSpec::discrete(vec![0.0, 0.5]).is_err());
        assert!(RateSpec::continuous(vec![3.0, f64::NAN]).is_err());
        assert!(RateSpec::continuous(vec![3.0, 7.0]).is_ok());
        assert!(RateSpec::discrete(vec![ratio(1, 2), ratio(1, 2)]).is_ok());
        assert!(RateSpec::discrete(vec![ratio(1, 2), ratio(1, 2) + ratio(1, 10i64.pow(15))]).is_err());
        assert!(RateSpec::<f64>::discrete(vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let r = RateSpec::discrete(vec![0.1, 0.25, 0.05]).unwrap();
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert_eq!(RateSpec::from_json_str(&text).unwrap(), r);
        let bad = r#"{"mode":"discrete","n":2,"rho":{"1":0.1}}"#;
        assert!(RateSpec::from_json_str(bad).is_err());
        let bad = r#"{"mode":"discrete","n":1,"rho":{"1":0.1,"2":0.1}}"#;
        assert!(RateSpec::from_json_str(bad).is_err());
        let ok = r#"{"mode":"continuous","n":1,"rho":{"1":2.5}}"#;
        assert_eq!(RateSpec::from_json_str(ok).unwrap().mode(), Mode::Continuous);
    }
}
