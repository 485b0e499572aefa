//! Scalar abstraction shared by the floating and exact-rational evaluation paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations needed by the probability formulas.
///
/// `f64` sums are compensated (Neumaier); rational sums are exact.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact, so comparisons need no tolerance.
    const EXACT: bool;

    /// Exact conversion for rationals (the binary value of the double).
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn powu(&self, exp: u64) -> Self;
    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, exp: u64) -> Self {
        if exp <= i32::MAX as u64 {
            self.powi(exp as i32)
        } else {
            self.powf(exp as f64)
        }
    }

    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in items {
            acc.add(x);
        }
        acc.value()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite rate")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn powu(&self, exp: u64) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(BigRational::zero(), |a, b| a + b)
    }
}

/// Rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Absolute difference as `f64`, exact before the final rounding for rationals.
pub fn abs_diff<S: Scalar>(a: &S, b: &S) -> f64 {
    let d = a.clone() - b.clone();
    let d = if d < S::zero() { -d } else { d };
    d.to_f64()
}

pub(crate) fn is_positive<S: Scalar>(x: &S) -> bool {
    *x > S::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_bits() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let naive: f64 = xs.iter().sum();
        assert_eq!(f64::sum_all(xs), 2.0);
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn rational_pow_and_sum() {
        let half = ratio(1, 2);
        assert_eq!(half.powu(3), ratio(1, 8));
        assert_eq!(half.powu(0), BigRational::one());
        assert_eq!(BigRational::sum_all(vec![ratio(1, 3), ratio(2, 3)]), BigRational::one());
        assert_eq!(BigRational::from_f64(0.25), ratio(1, 4));
    }
}
