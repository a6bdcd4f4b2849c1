use serde::{Deserialize, Serialize};

use crate::alphabet::GaussianLetter;

/// Explicit terms summed before switching to the integral-test tail.
const EXPLICIT_TERMS: u64 = 256;

/// The four-rays lower bound for `f(k, t)` at `e = e_k` against `16^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCheck {
    pub letter: GaussianLetter,
    pub t: f64,
    /// Lower bound for `2 m^{2t} sum_{k > m} k^{-2t}`.
    pub m_term: f64,
    /// Lower bound for `2 b(|n|)^{2t} sum_{l > |n|} b(l)^{-2t}`, `b(x) = (x^2 + 1/4)^{1/2} - 1/2`.
    pub n_term: f64,
    pub threshold: f64,
    pub margin: f64,
    pub holds: bool,
    /// The bound was derived for `t` in `(1, 2]`.
    pub in_proven_range: bool,
}

/// `b(x) = (x^2 + 1/4)^{1/2} - 1/2`, evaluated without cancellation.
pub fn ray_b(x: f64) -> f64 {
    x * x / ((x * x + 0.25).sqrt() + 0.5)
}

/// Lower bound for `2 m^{2t} sum_{k > m} k^{-2t}`.
pub fn m_ray_term(m: u64, t: f64) -> f64 {
    let s = 2.0 * t;
    if s <= 1.0 {
        return f64::INFINITY;
    }
    let mf = m as f64;
    let mut acc = 0.0;
    for k in m + 1..=m + EXPLICIT_TERMS {
        acc += (mf / k as f64).powf(s);
    }
    // sum_{k >= K} k^{-s} >= K^{1-s} / (s - 1)
    let big_k = (m + EXPLICIT_TERMS + 1) as f64;
    acc += (mf / big_k).powf(s) * big_k / (s - 1.0);
    2.0 * acc * (1.0 - 1e-12)
}

/// Lower bound for `2 b(|n|)^{2t} sum_{l > |n|} b(l)^{-2t}`; zero when `n = 0`.
pub fn n_ray_term(n: u64, t: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let s = 2.0 * t;
    if s <= 1.0 {
        return f64::INFINITY;
    }
    let bn = ray_b(n as f64);
    let mut acc = 0.0;
    for l in n + 1..=n + EXPLICIT_TERMS {
        acc += (bn / ray_b(l as f64)).powf(s);
    }
    // b(l) <= l, so sum_{l >= L} b(l)^{-s} >= L^{1-s} / (s - 1).
    let big_l = (n + EXPLICIT_TERMS + 1) as f64;
    acc += (bn / big_l).powf(s) * big_l / (s - 1.0);
    2.0 * acc * (1.0 - 1e-12)
}

/// Evaluates the four-rays lower bound at `e` and compares it with `16^t`.
pub fn analytic_tail_condition(e: GaussianLetter, t: f64) -> AnalyticCheck {
    let m_term = m_ray_term(e.m() as u64, t);
    let n_term = n_ray_term(e.n().unsigned_abs(), t);
    let threshold = 16f64.powf(t);
    let margin = m_term + n_term - threshold;
    AnalyticCheck {
        letter: e,
        t,
        m_term,
        n_term,
        threshold,
        margin,
        holds: margin >= 0.0,
        in_proven_range: t > 1.0 && t <= 2.0,
    }
}

/// Smallest `x >= 1` with `term(x) >= threshold`, for a nondecreasing `term`.
pub fn first_passing(term: impl Fn(u64) -> f64, threshold: f64) -> u64 {
    let mut hi = 1u64;
    while term(hi) < threshold {
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 || term(lo) >= threshold {
        return hi.min(lo.max(1));
    }
    // term(lo) < threshold <= term(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if term(mid) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `A(n) = sum_{k=m+1}^{m+terms} (a_m(n) / a_k(n))^{2t}` with
/// `a_k(n) = ((k + 1/2)^2 + n^2)^{1/2} - 1/2`.
pub fn ray_ratio_a(m: u64, n: u64, t: f64, terms: u64) -> f64 {
    let a = |k: u64| {
        let x = (k as f64 + 0.5).hypot(n as f64);
        x - 0.5
    };
    let am = a(m);
    (m + 1..=m + terms).map(|k| (am / a(k)).powf(2.0 * t)).sum()
}

/// `B(m) = sum_{l=n+1}^{n+terms} (c_n(m) / c_l(m))^{2t}` with
/// `c_l(m) = ((m + 1/2)^2 + l^2)^{1/2} - 1/2`.
pub fn ray_ratio_b(m: u64, n: u64, t: f64, terms: u64) -> f64 {
    let c = |l: u64| (m as f64 + 0.5).hypot(l as f64) - 0.5;
    let cn = c(n);
    (n + 1..=n + terms).map(|l| (cn / c(l)).powf(2.0 * t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: i64, n: i64) -> GaussianLetter {
        GaussianLetter::new(m, n).unwrap()
    }

    /// Explicit partial sum to 10^6 terms, a lower bound for the series.
    fn brute_m_term(m: u64, t: f64) -> f64 {
        2.0 * (m + 1..=m + 1_000_000).map(|k| (m as f64 / k as f64).powf(2.0 * t)).sum::<f64>()
    }

    #[test]
    fn paper_corners_hold_at_two() {
        assert!(analytic_tail_condition(g(512, 0), 2.0).holds);
        assert!(analytic_tail_condition(g(1, 4096), 2.0).holds);
        assert!(analytic_tail_condition(g(3, -4096), 2.0).holds);
    }

    #[test]
    fn small_letter_fails() {
        let c = analytic_tail_condition(g(2, 0), 2.0);
        assert!(!c.holds);
        assert!(c.m_term <= brute_m_term(2, 2.0) + 1e-6);
    }

    #[test]
    fn integral_bound_is_below_long_partial_sum_limit() {
        for (m, t) in [(1, 1.5), (10, 1.2), (300, 1.885)] {
            let lb = m_ray_term(m, t);
            let partial = brute_m_term(m, t);
            // The 10^6-term partial sum plus its own integral upper tail dominates the bound.
            let big = (m + 1_000_000) as f64;
            let tail_up = 2.0 * (m as f64 / big).powf(2.0 * t) * big / (2.0 * t - 1.0);
            assert!(lb <= partial + tail_up, "m={m} t={t}");
            assert!(lb >= partial * 0.999, "m={m} t={t}");
        }
    }

    #[test]
    fn first_passing_finds_threshold() {
        let th = 16f64.powf(1.885);
        let m0 = first_passing(|m| m_ray_term(m, 1.885), th);
        assert!(m_ray_term(m0, 1.885) >= th);
        assert!(m_ray_term(m0 - 1, 1.885) < th);
        assert!(m0 > 128, "the reduced box alone does not reach the boundary");
    }
}
