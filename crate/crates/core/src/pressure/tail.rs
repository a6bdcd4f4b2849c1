use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::summation::{directed_sum, DirectedSum};
use crate::systems::{RatioRule, SystemDescriptor, SystemKind};
use crate::spectrum::family_tail_lower;

/// Bracket for `sum over e not in F of ||phi_e'||^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBracket {
    pub t: f64,
    pub radius: u64,
    /// Directed sum over the explicit region.
    pub explicit: f64,
    pub lower: f64,
    /// `+inf` when the series diverges.
    pub upper: f64,
}

/// Sums the letters outside `excluded` explicitly up to `radius` and bounds
/// the remainder analytically.
///
/// Grid systems use the Chebyshev shells `max(m, |n|) = r`, each holding
/// exactly `4r - 1` letters with norm at most `(r - 1/2)^{-2}`; by convexity
/// the shells beyond `R` sum to at most
/// `4 R^{2-2t} / (2t - 2) + R^{1-2t} / (2t - 1)`.
pub fn tail_sum(system: &SystemDescriptor, excluded: &LetterSet, t: f64, radius: u64) -> Result<TailBracket> {
    tail_sum_with(system, excluded, t, radius, Exec::default())
}

pub fn tail_sum_with(
    system: &SystemDescriptor,
    excluded: &LetterSet,
    t: f64,
    radius: u64,
    exec: Exec,
) -> Result<TailBracket> {
    if radius == 0 {
        return Err(Error::InvalidParameter("tail radius must be positive".into()));
    }
    if let Some(e) = excluded.iter().find(|e| e.shell() > radius) {
        return Err(Error::TailRadiusTooSmall { radius, letter: e });
    }
    let r = radius as f64;
    let explicit = match &system.kind {
        SystemKind::ComplexCf | SystemKind::LinearizedCf => grid_box_sum(system, excluded, t, radius, exec),
        SystemKind::SimilarityIfs { ratios } => {
            return Ok(finite_tail(system, excluded, t, radius, ratios.len()));
        }
        SystemKind::FiniteGdms { .. } => {
            return Err(Error::Unsupported { system: system.name().into(), what: "tail sums".into() });
        }
        _ => {
            let mut terms: Vec<f64> = (1..=radius as usize)
                .map(GaussianLetter::index)
                .filter(|e| !excluded.contains(*e))
                .map(|e| system.deriv_norm_unchecked(e).powf(t))
                .collect();
            directed_sum(&mut terms)
        }
    };
    let remainder = match &system.kind {
        SystemKind::ComplexCf | SystemKind::LinearizedCf => {
            if t <= 1.0 {
                f64::INFINITY
            } else {
                4.0 * r.powf(2.0 - 2.0 * t) / (2.0 * t - 2.0) + r.powf(1.0 - 2.0 * t) / (2.0 * t - 1.0)
            }
        }
        SystemKind::RealCf => {
            if t <= 0.5 {
                f64::INFINITY
            } else {
                r.powf(1.0 - 2.0 * t) / (2.0 * t - 1.0)
            }
        }
        SystemKind::SimilarityFamily { family } => match *family {
            RatioRule::Geometric { ratio, scale } => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    let q = ratio.powf(t);
                    scale.powf(t) * q.powf(r + 1.0) / (1.0 - q)
                }
            }
            RatioRule::Power { exponent, scale } => {
                let s = exponent * t;
                if s <= 1.0 {
                    f64::INFINITY
                } else {
                    scale.powf(t) * (r + 1.0).powf(1.0 - s) / (s - 1.0)
                }
            }
        },
        SystemKind::SimilarityIfs { .. } | SystemKind::FiniteGdms { .. } => unreachable!(),
    };
    let upper = if remainder.is_finite() {
        (explicit.upper + remainder) * (1.0 + 1e-12)
    } else {
        f64::INFINITY
    };
    let lower = match &system.kind {
        SystemKind::SimilarityFamily { family } => {
            explicit.lower + family_tail_lower(family, radius, t) * (1.0 - 1e-12)
        }
        _ => explicit.lower,
    };
    Ok(TailBracket { t, radius, explicit: explicit.value, lower, upper })
}

fn finite_tail(system: &SystemDescriptor, excluded: &LetterSet, t: f64, radius: u64, len: usize) -> TailBracket {
    let mut terms: Vec<f64> = (1..=len)
        .map(GaussianLetter::index)
        .filter(|e| !excluded.contains(*e))
        .map(|e| system.deriv_norm_unchecked(e).powf(t))
        .collect();
    let s = directed_sum(&mut terms);
    TailBracket { t, radius, explicit: s.value, lower: s.lower, upper: s.upper }
}

/// Sum over `1 <= m <= R`, `|n| <= R`, skipping excluded letters.
pub(crate) fn grid_box_sum(
    system: &SystemDescriptor,
    excluded: &LetterSet,
    t: f64,
    radius: u64,
    exec: Exec,
) -> DirectedSum {
    let r = radius as i64;
    let rows = exec.map_range(r as usize, |i| {
        let m = i as i64 + 1;
        let mut terms = Vec::with_capacity(2 * r as usize + 1);
        for n in -r..=r {
            let e = GaussianLetter::new(m, n).expect("m >= 1");
            if !excluded.contains(e) {
                terms.push(system.deriv_norm_unchecked(e).powf(t));
            }
        }
        directed_sum(&mut terms)
    });
    DirectedSum::combine(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_count_is_four_r_minus_one() {
        for r in 1..20i64 {
            let count = (1..=r).flat_map(|m| (-r..=r).map(move |n| (m, n))).filter(|&(m, n)| m.max(n.abs()) == r).count();
            assert_eq!(count as i64, 4 * r - 1);
        }
    }

    #[test]
    fn complex_tail_brackets_larger_explicit_sum() {
        let s = SystemDescriptor::complex_cf();
        let ex: LetterSet = ["1", "1+1i", "1-1i"].iter().map(|x| x.parse().unwrap()).collect();
        let small = tail_sum(&s, &ex, 1.5, 40).unwrap();
        let big = tail_sum(&s, &ex, 1.5, 400).unwrap();
        assert!(small.lower <= big.lower);
        assert!(big.lower <= small.upper);
        assert!(big.upper <= small.upper);
    }

    #[test]
    fn divergent_below_threshold() {
        let s = SystemDescriptor::complex_cf();
        let b = tail_sum(&s, &LetterSet::new(), 1.0, 10).unwrap();
        assert!(b.upper.is_infinite());
    }

    #[test]
    fn geometric_family_tail_is_closed_form() {
        let s = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.5, scale: 1.0 }).unwrap();
        let b = tail_sum(&s, &LetterSet::new(), 1.0, 10).unwrap();
        assert!(b.lower <= 1.0 && 1.0 <= b.upper && b.upper - b.lower < 1e-10);
    }

    #[test]
    fn radius_must_cover_excluded_letters() {
        let s = SystemDescriptor::complex_cf();
        let ex: LetterSet = ["5+7i"].iter().map(|x| x.parse().unwrap()).collect();
        assert!(matches!(tail_sum(&s, &ex, 1.5, 6), Err(Error::TailRadiusTooSmall { .. })));
    }
}
