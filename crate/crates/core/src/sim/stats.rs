use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A Monte Carlo proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    /// `sqrt(p̂(1 − p̂)/N)`.
    pub stderr: f64,
}

impl Estimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        Self { hits, samples, estimate: p, stderr: (p * (1.0 - p) / samples as f64).sqrt() }
    }

    /// Deviation from `exact` in units of the binomial σ at the exact value.
    pub fn z(&self, exact: f64) -> f64 {
        // Rounding can leave an impossible event at a tiny negative value.
        let p = exact.clamp(0.0, 1.0);
        let s = binomial_sigma(p, self.samples);
        if s == 0.0 {
            if (self.estimate - p).abs() < 1e-12 { 0.0 } else { f64::INFINITY }
        } else {
            (self.estimate - p) / s
        }
    }
}

/// Standard deviation of a proportion over `n` trials with success probability `p`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson test that two count vectors over the same categories come from
/// one distribution. Categories empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut used: usize = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        for (obs, n) in [(x as f64, na), (y as f64, nb)] {
            let exp = n * col / total;
            if exp > 0.0 {
                statistic += (obs - exp).powi(2) / exp;
            }
        }
    }
    let df = used.saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(df as f64).expect("positive df").cdf(statistic)
    };
    ChiSquare { statistic, df, p_value }
}

/// One bin of a frequency comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinCheck {
    /// Waiting time `k`, or `None` for the tail bin `> bins`.
    pub k: Option<u64>,
    pub observed: u64,
    pub expected: f64,
    pub z: f64,
}

/// Compare observed waiting times against the geometric law
/// `P(τ = k) = p (1 − p)^{k−1}` bin by bin, with a final tail bin. Times
/// recorded as `None` (not seen within the horizon) count in the tail.
pub fn geometric_bin_check(times: &[Option<u64>], p: f64, bins: u64) -> Vec<BinCheck> {
    let n = times.len() as u64;
    let mut counts = vec![0u64; bins as usize + 1];
    for t in times {
        match t {
            Some(k) if *k >= 1 && *k <= bins => counts[*k as usize - 1] += 1,
            _ => counts[bins as usize] += 1,
        }
    }
    let mut out = Vec::with_capacity(counts.len());
    for (i, &obs) in counts.iter().enumerate() {
        let (k, q) = if i as u64 == bins {
            (None, (1.0 - p).powi(bins as i32))
        } else {
            (Some(i as u64 + 1), p * (1.0 - p).powi(i as i32))
        };
        let sigma = binomial_sigma(q, n) * n as f64;
        let expected = q * n as f64;
        let z = if sigma > 0.0 { (obs as f64 - expected) / sigma } else if obs as f64 == expected { 0.0 } else { f64::INFINITY };
        out.push(BinCheck { k, observed: obs, expected, z });
    }
    out
}
