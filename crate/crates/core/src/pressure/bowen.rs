use serde::{Deserialize, Serialize};

use crate::alphabet::LetterSet;
use crate::error::{Error, Result};
use crate::pressure::{pressure_bracket, PartitionOptions};
use crate::systems::SystemDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowenOptions {
    /// Word length used for the pressure brackets.
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub partition: PartitionOptions,
}

impl Default for BowenOptions {
    fn default() -> Self {
        Self { n: 2, tol: 1e-10, max_iter: 200, partition: PartitionOptions::default() }
    }
}

/// `h_lower <= h_F <= h_upper` for the zero of `t -> P_F(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowenBracket {
    pub h_lower: f64,
    pub h_upper: f64,
    pub n: usize,
    pub iterations: usize,
    /// The pressure slack at this `n` keeps the bracket wider than `tol`.
    pub slack_limited: bool,
    /// Word length at which the distortion slack `t log K / n` drops below `tol / 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggested_n: Option<usize>,
}

impl BowenBracket {
    pub fn width(&self) -> f64 {
        self.h_upper - self.h_lower
    }
}

/// Bisects the pressure bracket for the Bowen parameter of F.
///
/// Requires `upper P(t_hi) <= 0 < lower P(t_lo)`. Two bisections run side by
/// side: one finds the smallest t at which the upper bound is nonpositive, the
/// other the largest t at which the lower bound is nonnegative.
pub fn bowen_bisect(
    system: &SystemDescriptor,
    letters: &LetterSet,
    t_lo: f64,
    t_hi: f64,
    opts: &BowenOptions,
) -> Result<BowenBracket> {
    if !(t_lo < t_hi) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need t_lo < t_hi and tol > 0, got [{t_lo}, {t_hi}]")));
    }
    let p = |t: f64| pressure_bracket(system, letters, opts.n, t, &opts.partition);
    let at_lo = p(t_lo)?;
    let at_hi = p(t_hi)?;
    if !(at_hi.upper <= 0.0 && at_lo.lower > 0.0) {
        return Err(Error::InvalidBisectionSigns {
            t_lo,
            t_hi,
            lower_at_lo: at_lo.lower,
            upper_at_hi: at_hi.upper,
        });
    }
    // Upper search: upper(a) > 0 >= upper(b).
    let (mut a, mut b) = (t_lo, t_hi);
    // Lower search: lower(c) >= 0 > lower(d), or d = t_hi if lower(t_hi) == 0.
    let (mut c, mut d) = (t_lo, t_hi);
    if at_hi.lower >= 0.0 {
        c = t_hi;
    }
    let half = opts.tol / 2.0;
    let mut iterations = 0;
    while iterations < opts.max_iter && (b - a > half || d - c > half) {
        iterations += 1;
        if b - a > half {
            let mid = 0.5 * (a + b);
            let pm = p(mid)?;
            if pm.upper <= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            // The same evaluation also informs the lower search.
            if c < mid && mid < d {
                if pm.lower >= 0.0 {
                    c = mid;
                } else {
                    d = mid;
                }
            }
        }
        if d - c > half {
            let mid = 0.5 * (c + d);
            if p(mid)?.lower >= 0.0 {
                c = mid;
            } else {
                d = mid;
            }
        }
    }
    let (h_lower, h_upper) = (c, b);
    let slack_limited = h_upper - h_lower > opts.tol;
    let k = system.distortion();
    let suggested_n = (slack_limited && k > 1.0)
        .then(|| (2.0 * h_upper * k.ln() / opts.tol).ceil() as usize)
        .filter(|&m| m > opts.n);
    Ok(BowenBracket { h_lower, h_upper, n: opts.n, iterations, slack_limited, suggested_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::GaussianLetter;

    fn idx(k: usize) -> LetterSet {
        (1..=k).map(GaussianLetter::index).collect()
    }

    #[test]
    fn middle_thirds_cantor_set() {
        let s = SystemDescriptor::similarity(vec![1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let opts = BowenOptions { tol: 1e-12, ..Default::default() };
        let h = bowen_bisect(&s, &idx(2), 0.0, 1.0, &opts).unwrap();
        let exact = 2f64.ln() / 3f64.ln();
        assert!(h.h_lower <= exact && exact <= h.h_upper, "{h:?}");
        assert!(h.width() <= 1e-12);
    }

    #[test]
    fn gdms_half_half_has_dimension_one() {
        let s = SystemDescriptor::finite_gdms(vec![0.5, 0.5], vec![vec![1, 1], vec![1, 1]]).unwrap();
        let opts = BowenOptions { tol: 1e-12, ..Default::default() };
        let h = bowen_bisect(&s, &idx(2), 0.0, 2.0, &opts).unwrap();
        assert!((h.h_lower - 1.0).abs() < 1e-12 && (h.h_upper - 1.0).abs() < 1e-12, "{h:?}");
    }

    #[test]
    fn wrong_signs_are_reported() {
        let s = SystemDescriptor::similarity(vec![0.5, 0.5]).unwrap();
        let r = bowen_bisect(&s, &idx(2), 0.0, 0.5, &BowenOptions::default());
        assert!(matches!(r, Err(Error::InvalidBisectionSigns { .. })));
    }

    #[test]
    fn distortion_slack_is_reported_not_fatal() {
        let s = SystemDescriptor::complex_cf();
        let f: LetterSet = ["1", "1+1i", "1-1i"].iter().map(|x| x.parse().unwrap()).collect();
        let h = bowen_bisect(&s, &f, 0.0, 2.0, &BowenOptions { tol: 1e-6, ..Default::default() }).unwrap();
        assert!(h.slack_limited);
        assert!(h.suggested_n.unwrap() > 2);
        assert!(h.h_lower < h.h_upper);
    }
}
