//! Compensated and directed floating-point summation.
//!
//! A directed sum evaluates the same nonnegative terms in ascending and in
//! descending order with Neumaier compensation, then widens the pair by a
//! fixed number of ulps. The result is a bracket that is safe to use in
//! either an upper-bound or a lower-bound role.

use serde::{Deserialize, Serialize};

/// Ulps added on each side of a directed sum.
pub const DIRECTED_SLACK_ULPS: f64 = 8.0;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
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

impl Extend<f64> for Neumaier {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = Neumaier::new();
    acc.extend(terms);
    acc.value()
}

/// Bracket produced by a directed summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedSum {
    /// Best estimate (ascending-order compensated sum).
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Absolute slack added beyond the spread of the two orders.
    pub slack: f64,
    pub terms: usize,
}

impl DirectedSum {
    pub fn exact(value: f64) -> Self {
        Self { value, lower: value, upper: value, slack: 0.0, terms: 1 }
    }

    /// Widens an estimate by `ulps` relative units on both sides.
    pub fn from_estimate(value: f64, ulps: f64, terms: usize) -> Self {
        let slack = ulps * f64::EPSILON * value.abs();
        Self { value, lower: value - slack, upper: value + slack, slack, terms }
    }

    /// Sums independent brackets.
    pub fn combine(parts: &[DirectedSum]) -> Self {
        let value = neumaier_sum(parts.iter().map(|p| p.value));
        let lower = neumaier_sum(parts.iter().map(|p| p.lower));
        let upper = neumaier_sum(parts.iter().map(|p| p.upper));
        let slack = DIRECTED_SLACK_ULPS * f64::EPSILON * upper.abs();
        Self {
            value,
            lower: lower - slack,
            upper: upper + slack,
            slack: slack + parts.iter().map(|p| p.slack).sum::<f64>(),
            terms: parts.iter().map(|p| p.terms).sum(),
        }
    }
}

/// Sums nonnegative terms in both orders and widens by the directed slack.
/// The slice is sorted in place.
pub fn directed_sum(terms: &mut [f64]) -> DirectedSum {
    terms.sort_unstable_by(f64::total_cmp);
    let asc = neumaier_sum(terms.iter().copied());
    let desc = neumaier_sum(terms.iter().rev().copied());
    let hi = asc.max(desc);
    let lo = asc.min(desc);
    let slack = DIRECTED_SLACK_ULPS * f64::EPSILON * hi.abs();
    DirectedSum { value: asc, lower: lo - slack, upper: hi + slack, slack, terms: terms.len() }
}

/// Nudges `x` down by `ulps` relative units.
#[inline]
pub fn round_down(x: f64, ulps: f64) -> f64 {
    x - ulps * f64::EPSILON * x.abs()
}

/// Nudges `x` up by `ulps` relative units.
#[inline]
pub fn round_up(x: f64, ulps: f64) -> f64 {
    x + ulps * f64::EPSILON * x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn directed_sum_brackets_exact_value() {
        let mut terms: Vec<f64> = (1..=1000).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let d = directed_sum(&mut terms);
        let exact = 1.643_934_566_681_56; // partial zeta(2) to 1000 terms
        assert!(d.lower <= exact && exact <= d.upper, "{d:?}");
        assert!(d.upper - d.lower < 1e-13);
    }

    #[test]
    fn directed_sum_of_single_term() {
        let d = directed_sum(&mut [0.25]);
        assert!(d.lower < 0.25 && d.upper > 0.25);
        assert_eq!(d.value, 0.25);
    }
}
