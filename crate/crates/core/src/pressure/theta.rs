use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet};
use crate::pressure::{partition_function, PartitionOptions};
use crate::systems::SystemDescriptor;

/// One infinite branch of a first-level partition function, `sum_{n >= start} term(n)^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "series", rename_all = "snake_case")]
pub enum ThetaSeries {
    /// term(n) = n^{-exponent}
    Power { exponent: f64, start: u64 },
    /// term(n) = e^{-rate n}
    Exponential { rate: f64, start: u64 },
}

impl ThetaSeries {
    /// Closed-form upper bound for the whole series, `None` if it diverges.
    pub fn upper_bound(&self, t: f64) -> Option<f64> {
        match *self {
            ThetaSeries::Power { exponent, start } => {
                let s = exponent * t;
                let a = start as f64;
                (s > 1.0).then(|| a.powf(-s) + a.powf(1.0 - s) / (s - 1.0))
            }
            ThetaSeries::Exponential { rate, start } => {
                let q = (-rate * t).exp();
                (q < 1.0).then(|| q.powf(start as f64) / (1.0 - q))
            }
        }
    }

    /// Closed-form lower bound for the first `terms` terms.
    pub fn partial_lower_bound(&self, t: f64, terms: f64) -> f64 {
        match *self {
            ThetaSeries::Power { exponent, start } => {
                let s = exponent * t;
                let (a, b) = (start as f64, start as f64 + terms);
                if (s - 1.0).abs() < 1e-12 {
                    (b / a).ln()
                } else {
                    (b.powf(1.0 - s) - a.powf(1.0 - s)) / (1.0 - s)
                }
            }
            ThetaSeries::Exponential { rate, start } => {
                let q = (-rate * t).exp();
                if q >= 1.0 {
                    terms
                } else {
                    q.powf(start as f64) * (1.0 - q.powf(terms)) / (1.0 - q)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaFamilyCheck {
    pub label: String,
    pub printed: f64,
    /// Largest tested t at which a partial sum already exceeds any fixed bound.
    pub lower: f64,
    /// Smallest tested t with a finite closed-form tail.
    pub upper: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta2Check {
    pub t: f64,
    /// `log q` for the cofinite set F(q) = {m >= q}.
    pub ln_q: f64,
    /// Upper bound for `2 sum_{n >= q} (n(n+1))^{-t}`.
    pub z2_bound: f64,
    /// Largest relative gap between enumerated `Z_2` and the closed form on truncations.
    pub z2_identity_gap: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub families: Vec<ThetaFamilyCheck>,
    pub theta2: Theta2Check,
}

/// Partial sums beyond this count as divergence evidence.
const DIVERGENCE_LEVEL: f64 = 100.0;

fn bracket_threshold(series: ThetaSeries, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 4.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if series.upper_bound(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn diverges_at(series: ThetaSeries, t: f64) -> bool {
    t <= 0.0 || series.partial_lower_bound(t, 1e300) > DIVERGENCE_LEVEL
}

fn family(label: &str, series: ThetaSeries, printed: f64, tol: f64) -> ThetaFamilyCheck {
    let (lo, hi) = bracket_threshold(series, tol);
    // The finite part of each Z_1 (the letters a, b) cannot move the threshold.
    let agrees = lo <= printed + tol
        && printed <= hi + tol
        && series.upper_bound(printed + tol).is_some()
        && (printed == 0.0 || diverges_at(series, printed - tol));
    ThetaFamilyCheck { label: label.to_string(), printed, lower: lo, upper: hi, agrees }
}

/// Checks the finiteness thresholds of three graph-directed example families
/// and the bound `theta_2 <= 1/2` for the nearest-neighbour family.
pub fn theta_examples_check() -> ThetaReport {
    let tol = 1e-4;
    let families = vec![
        family(
            "Z1 = 2((1/2)^t + sum n^-2t)",
            ThetaSeries::Power { exponent: 2.0, start: 1 },
            0.5,
            tol,
        ),
        family(
            "Z1 = 2((1/2)^t + sum e^-tn)",
            ThetaSeries::Exponential { rate: 1.0, start: 1 },
            0.0,
            tol,
        ),
        family("Z1 = 2^-t + sum_{m>=2} m^-t", ThetaSeries::Power { exponent: 1.0, start: 2 }, 1.0, tol),
    ];
    ThetaReport { families, theta2: theta2_check(0.5 + 5e-4) }
}

/// Finds `q` with `2 sum_{n >= q} (n(n+1))^{-t} < 1`, using
/// `sum_{n >= q} n^{-2t} <= q^{-2t} + q^{1-2t} / (2t - 1)` in log scale.
fn theta2_check(t: f64) -> Theta2Check {
    let s = 2.0 * t;
    let bound = |ln_q: f64| 2.0 * ((-s * ln_q).exp() + ((1.0 - s) * ln_q).exp() / (s - 1.0));
    let mut ln_q = 1.0f64;
    while bound(ln_q) >= 1.0 {
        ln_q *= 1.5;
    }
    let gap = z2_identity_gap();
    Theta2Check { t, ln_q, z2_bound: bound(ln_q), z2_identity_gap: gap, agrees: bound(ln_q) < 1.0 && gap < 1e-12 }
}

/// Enumerates `Z_2` of truncations of F(q) with incidence `m <-> m + 1` and
/// compares it with `2 sum (n(n+1))^{-t}` over the admissible pairs.
fn z2_identity_gap() -> f64 {
    let mut worst: f64 = 0.0;
    for (q, len, t) in [(2usize, 30usize, 1.0), (5, 40, 0.7), (10, 25, 1.6)] {
        let ratios: Vec<f64> = (q..q + len).map(|m| 1.0 / m as f64).collect();
        let incidence: Vec<Vec<u8>> = (0..len)
            .map(|i| (0..len).map(|j| u8::from(i.abs_diff(j) == 1)).collect())
            .collect();
        let sys = SystemDescriptor::finite_gdms(ratios, incidence).expect("valid truncation");
        let letters: LetterSet = (1..=len).map(GaussianLetter::index).collect();
        let z2 = partition_function(&sys, &letters, 2, t, &PartitionOptions::default()).expect("small");
        let closed: f64 = (q..q + len - 1).map(|n| 2.0 * ((n * (n + 1)) as f64).powf(-t)).sum();
        worst = worst.max((z2.value / closed - 1.0).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_agrees_with_printed_values() {
        let r = theta_examples_check();
        for f in &r.families {
            assert!(f.agrees, "{f:?}");
            assert!(f.upper - f.lower <= 1e-3);
        }
        assert!(r.theta2.agrees, "{:?}", r.theta2);
        assert!((r.theta2.t - 0.5).abs() < 1e-3);
    }

    #[test]
    fn power_series_bounds() {
        let s = ThetaSeries::Power { exponent: 2.0, start: 1 };
        let ub = s.upper_bound(1.0).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(ub >= zeta2);
        assert!(s.partial_lower_bound(1.0, 1e6) <= zeta2);
        assert!(s.upper_bound(0.5).is_none());
    }
}
