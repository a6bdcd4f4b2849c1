//! Partition functions, pressure brackets and the Bowen parameter.
//!
//! For a finite letter set F the partition function is
//! `Z_n(F, t) = sum over admissible words w in F^n of ||phi_w'||^t`.
//! Subadditivity of `log Z_n` gives `P(t) <= log Z_n / n`; bounded
//! distortion gives `P(t) >= (log Z_n - t log K) / n`. The infimum form
//! `Z_n^inf`, built from inf |phi_w'|, is supermultiplicative and yields a
//! second lower bound `P(t) >= log Z_n^inf / n`; the bracket keeps the larger.

mod bowen;
mod perturb;
mod spectral;
mod tail;
mod theta;

use serde::{Deserialize, Serialize};

pub use bowen::{bowen_bisect, BowenBracket, BowenOptions};
pub use perturb::{add_letter_bounds, ExpPressureBracket, LambdaData};
pub use spectral::{spectral_radius_bracket, SpectralBracket};
pub use tail::{tail_sum, tail_sum_with, TailBracket};
pub use theta::{theta_examples_check, Theta2Check, ThetaFamilyCheck, ThetaReport, ThetaSeries};

use crate::alphabet::LetterSet;
use crate::continuant::disk_norms;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::summation::{directed_sum, neumaier_sum, DirectedSum};
use crate::systems::{SystemDescriptor, SystemKind};

/// Default cap on `n * |F|^n`.
pub const DEFAULT_BUDGET: u128 = 2_000_000_000;

/// Terms held in memory per partition block.
const BLOCK_TERMS: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummationPolicy {
    /// Compensated sums in ascending and descending order, widened by 8 ulps.
    #[default]
    Directed,
    /// One compensated pass, widened by 8 ulps.
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionOptions {
    /// Cap on `n * |F|^n`.
    pub budget: u128,
    pub policy: SummationPolicy,
    pub exec: Exec,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, policy: SummationPolicy::Directed, exec: Exec::default() }
    }
}

/// A partition function value with its directed bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub n: usize,
    pub t: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub words: usize,
}

impl PartitionValue {
    fn from_sum(n: usize, t: f64, s: DirectedSum) -> Self {
        Self { n, t, value: s.value, lower: s.lower.max(0.0), upper: s.upper, slack: s.slack, words: s.terms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    /// Subadditive upper bound, distortion or infimum lower bound.
    SuperadditiveSlack,
    /// Perron root of the weighted incidence matrix.
    SpectralExact,
    /// `P = log Z_1` for similarity systems on the full shift.
    ExactProduct,
}

/// `lower <= P_F(t) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureBracket {
    pub t: f64,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: PressureMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionValue>,
    /// `Z_n` built from inf |phi_w'|, when it was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_inf: Option<PartitionValue>,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_letters(system: &SystemDescriptor, letters: &LetterSet) -> Result<()> {
    if letters.is_empty() {
        return Err(Error::EmptySet);
    }
    for e in letters.iter() {
        if !system.contains(e) {
            return Err(Error::LetterNotInSystem(e));
        }
    }
    Ok(())
}

fn work(letters: usize, n: usize) -> u128 {
    (letters as u128).checked_pow(n as u32).and_then(|w| w.checked_mul(n as u128)).unwrap_or(u128::MAX)
}

/// `Z_n(F, t)` with sup-norms.
pub fn partition_function(
    system: &SystemDescriptor,
    letters: &LetterSet,
    n: usize,
    t: f64,
    opts: &PartitionOptions,
) -> Result<PartitionValue> {
    Ok(word_sums(system, letters, n, t, opts, false)?.0)
}

/// `Z_n(F, t)` with inf-norms, a supermultiplicative lower envelope.
pub fn partition_function_inf(
    system: &SystemDescriptor,
    letters: &LetterSet,
    n: usize,
    t: f64,
    opts: &PartitionOptions,
) -> Result<PartitionValue> {
    let (_, inf) = word_sums(system, letters, n, t, opts, true)?;
    Ok(inf.expect("requested"))
}

fn word_sums(
    system: &SystemDescriptor,
    letters: &LetterSet,
    n: usize,
    t: f64,
    opts: &PartitionOptions,
    want_inf: bool,
) -> Result<(PartitionValue, Option<PartitionValue>)> {
    check_letters(system, letters)?;
    if n == 0 {
        return Err(Error::InvalidParameter("word length must be positive".into()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be finite and nonnegative, got {t}")));
    }
    let required = work(letters.len(), n);
    if required > opts.budget {
        return Err(Error::BudgetExceeded { required, budget: opts.budget });
    }
    let alpha = letters.as_slice();
    let f = alpha.len();
    // Split words by a prefix so each block stays small.
    let mut prefix_len = 0;
    while prefix_len < n && (f as u128).pow((n - prefix_len) as u32) > BLOCK_TERMS as u128 {
        prefix_len += 1;
    }
    let blocks = f.pow(prefix_len as u32);
    let suffix_count = f.pow((n - prefix_len) as u32);

    let parts = opts.exec.map_range(blocks, |b| {
        let mut word = vec![alpha[0]; n];
        let mut digits = vec![0usize; n];
        let mut rem = b;
        for i in (0..prefix_len).rev() {
            digits[i] = rem % f;
            rem /= f;
        }
        let mut sup_terms = Vec::with_capacity(suffix_count);
        let mut inf_terms = Vec::with_capacity(if want_inf { suffix_count } else { 0 });
        for s in 0..suffix_count {
            let mut rem = s;
            for i in (prefix_len..n).rev() {
                digits[i] = rem % f;
                rem /= f;
            }
            for i in 0..n {
                word[i] = alpha[digits[i]];
            }
            if !system.admissible(&word) {
                continue;
            }
            let (sup, inf) = match system.kind {
                SystemKind::ComplexCf => {
                    let d = disk_norms(&word);
                    (d.sup, d.inf)
                }
                _ => {
                    let sup = system.word_deriv_norm_unchecked(&word);
                    let inf = if want_inf { system.word_deriv_inf_unchecked(&word) } else { sup };
                    (sup, inf)
                }
            };
            sup_terms.push(sup.powf(t));
            if want_inf {
                inf_terms.push(inf.powf(t));
            }
        }
        let sum = |v: &mut Vec<f64>| match opts.policy {
            SummationPolicy::Directed => directed_sum(v),
            SummationPolicy::Compensated => {
                DirectedSum::from_estimate(neumaier_sum(v.iter().copied()), 8.0, v.len())
            }
        };
        (sum(&mut sup_terms), want_inf.then(|| sum(&mut inf_terms)))
    });
    let sups: Vec<_> = parts.iter().map(|p| p.0).collect();
    let sup = PartitionValue::from_sum(n, t, DirectedSum::combine(&sups));
    let inf = want_inf.then(|| {
        let infs: Vec<_> = parts.iter().map(|p| p.1.unwrap()).collect();
        PartitionValue::from_sum(n, t, DirectedSum::combine(&infs))
    });
    Ok((sup, inf))
}

/// Rigorous bracket for the pressure `P_F(t)` from words of length `n`.
pub fn pressure_bracket(
    system: &SystemDescriptor,
    letters: &LetterSet,
    n: usize,
    t: f64,
    opts: &PartitionOptions,
) -> Result<PressureBracket> {
    check_letters(system, letters)?;
    if let SystemKind::FiniteGdms { ratios, incidence } = &system.kind {
        let idx: Vec<usize> = letters.iter().map(|e| e.m() as usize - 1).collect();
        let weights: Vec<f64> = idx.iter().map(|&i| ratios[i].powf(t)).collect();
        let adj: Vec<Vec<bool>> =
            idx.iter().map(|&i| idx.iter().map(|&j| incidence[i][j] == 1).collect()).collect();
        let rho = spectral_radius_bracket(&adj, &weights, 2000);
        let lower = if rho.lower > 0.0 { rho.lower.ln() } else { f64::NEG_INFINITY };
        return Ok(PressureBracket {
            t,
            n,
            lower,
            upper: rho.upper.ln(),
            method: PressureMethod::SpectralExact,
            partition: None,
            partition_inf: None,
        });
    }
    if system.distortion() == 1.0 && !system.is_gdms() {
        // Word norms multiply exactly, so Z_n = Z_1^n.
        let z1 = partition_function(system, letters, 1, t, opts)?;
        return Ok(PressureBracket {
            t,
            n,
            lower: z1.lower.ln(),
            upper: z1.upper.ln(),
            method: PressureMethod::ExactProduct,
            partition: Some(z1),
            partition_inf: None,
        });
    }
    let (sup, inf) = word_sums(system, letters, n, t, opts, true)?;
    let inf = inf.expect("requested");
    let nf = n as f64;
    let upper = sup.upper.ln() / nf;
    let by_distortion = (sup.lower.ln() - t * system.distortion().ln()) / nf;
    let by_infimum = inf.lower.ln() / nf;
    Ok(PressureBracket {
        t,
        n,
        lower: by_distortion.max(by_infimum),
        upper,
        method: PressureMethod::SuperadditiveSlack,
        partition: Some(sup),
        partition_inf: Some(inf),
    })
}

/// Derivative norms of a letter set, in set order.
pub fn letter_norms(system: &SystemDescriptor, letters: &LetterSet) -> Result<Vec<f64>> {
    letters.iter().map(|e| system.deriv_norm(e)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::GaussianLetter;

    fn g(m: i64, n: i64) -> GaussianLetter {
        GaussianLetter::new(m, n).unwrap()
    }

    #[test]
    fn similarity_pressure_is_log_z1() {
        let s = SystemDescriptor::similarity(vec![0.5, 0.5]).unwrap();
        let f = LetterSet::from_letters([GaussianLetter::index(1), GaussianLetter::index(2)]);
        for n in [1, 3, 7] {
            let b = pressure_bracket(&s, &f, n, 1.0, &PartitionOptions::default()).unwrap();
            assert!(b.lower.abs() < 1e-14 && b.upper.abs() < 1e-14, "{b:?}");
            assert!(b.lower <= 0.0 && 0.0 <= b.upper);
        }
    }

    #[test]
    fn partition_function_counts_words() {
        let s = SystemDescriptor::complex_cf();
        let f = LetterSet::from_letters([g(1, 0), g(1, 1), g(1, -1)]);
        let z = partition_function(&s, &f, 4, 0.0, &PartitionOptions::default()).unwrap();
        assert_eq!(z.words, 81);
        assert!(z.lower <= 81.0 && 81.0 <= z.upper);
    }

    #[test]
    fn z2_of_single_letter() {
        let s = SystemDescriptor::complex_cf();
        let f = LetterSet::from_letters([g(1, 0)]);
        let z = partition_function(&s, &f, 2, 1.0, &PartitionOptions::default()).unwrap();
        assert!((z.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let s = SystemDescriptor::complex_cf();
        let f = LetterSet::from_letters([g(1, 0), g(2, 0)]);
        let opts = PartitionOptions { budget: 10, ..Default::default() };
        assert!(matches!(
            partition_function(&s, &f, 8, 1.0, &opts),
            Err(Error::BudgetExceeded { required: 2048, budget: 10 })
        ));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let s = SystemDescriptor::complex_cf();
        let f: LetterSet = (1..=3).flat_map(|m| [g(m, 0), g(m, 1), g(m, -1)]).collect();
        let seq = PartitionOptions { exec: Exec::Sequential, ..Default::default() };
        let par = PartitionOptions { exec: Exec::Parallel, ..Default::default() };
        let a = partition_function(&s, &f, 6, 1.3, &seq).unwrap();
        let b = partition_function(&s, &f, 6, 1.3, &par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gdms_pressure_is_spectral() {
        let s = SystemDescriptor::finite_gdms(vec![0.5, 0.5], vec![vec![1, 1], vec![1, 1]]).unwrap();
        let f = LetterSet::from_letters([GaussianLetter::index(1), GaussianLetter::index(2)]);
        let b = pressure_bracket(&s, &f, 2, 1.0, &PartitionOptions::default()).unwrap();
        assert_eq!(b.method, PressureMethod::SpectralExact);
        assert!(b.lower.abs() < 1e-14 && b.upper.abs() < 1e-14);
    }

    #[test]
    fn empty_set_is_rejected() {
        let s = SystemDescriptor::complex_cf();
        assert_eq!(
            pressure_bracket(&s, &LetterSet::new(), 2, 1.0, &PartitionOptions::default()),
            Err(Error::EmptySet)
        );
    }
}
