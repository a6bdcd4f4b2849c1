//! Upper bound on `dim J_S - dim J_F` for a finite subsystem F.

use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet, OrderedAlphabet};
use crate::error::{Error, Result};
use crate::pressure::{tail_sum, BowenBracket, LambdaData, TailBracket};
use crate::systems::SystemDescriptor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBoundInput {
    pub letters: LetterSet,
    pub h_f: BowenBracket,
    /// Lower bound for the Lyapunov exponent, in nats per symbol.
    pub chi_lower: f64,
    pub lambda: LambdaData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub bound: f64,
    /// `#Lambda (K / kappa)^{h_upper} / chi`.
    pub prefactor: f64,
    pub tail: TailBracket,
    pub h_lower: f64,
    pub h_upper: f64,
    pub chi_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiBound {
    pub chi: f64,
    pub n: usize,
    pub max_word_norm: f64,
    pub argmax: Vec<GaussianLetter>,
    /// Letters whose words were enumerated.
    pub letters: usize,
}

/// `chi >= -(1/n) log max ||phi_w'||` over admissible words of length `n`.
///
/// Since every letter norm is at most 1, a word through a letter beyond
/// `I(L)` has norm at most `||phi_{e_{L+1}}'||`; `L` grows until the maximum
/// over `I(L)^n` reaches that value.
pub fn chi_lower_bound(alphabet: &OrderedAlphabet, n: usize) -> Result<ChiBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("chi bound needs n >= 1".into()));
    }
    let system = alphabet.system();
    let mut l = 1usize;
    loop {
        let letters = alphabet.prefix(l)?;
        if letters.iter().any(|&e| system.deriv_norm_unchecked(e) > 1.0) {
            return Err(Error::Unsupported { system: system.name().into(), what: "chi bounds with letter norms above 1".into() });
        }
        let (max, argmax) = max_word(system, &letters, n)?;
        let next = match alphabet.letter(l + 1) {
            Ok(e) => Some(system.deriv_norm_unchecked(e)),
            Err(Error::AlphabetExhausted { .. }) => None,
            Err(e) => return Err(e),
        };
        if next.is_none_or(|next| max >= next) {
            if !(max < 1.0) {
                return Err(Error::InvalidParameter(format!("maximal {n}-word norm {max} gives no positive chi")));
            }
            let chi = -max.ln() / n as f64;
            return Ok(ChiBound { chi: chi * (1.0 - 4.0 * f64::EPSILON), n, max_word_norm: max, argmax, letters: l });
        }
        l *= 2;
    }
}

fn max_word(system: &SystemDescriptor, letters: &[GaussianLetter], n: usize) -> Result<(f64, Vec<GaussianLetter>)> {
    let mut best = (0.0, Vec::new());
    let mut idx = vec![0usize; n];
    loop {
        let word: Vec<GaussianLetter> = idx.iter().map(|&i| letters[i]).collect();
        if system.admissible(&word) {
            let v = system.word_deriv_norm(&word)?;
            if v > best.0 {
                best = (v, word);
            }
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(best);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < letters.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `#Lambda (K/kappa)^{h_F} / chi * sum_{e not in F} ||phi_e'||^{h_F}`.
///
/// The prefactor uses the bracket's upper end and the tail its lower end, so
/// both factors dominate their values at the unknown true `h_F`.
pub fn dimension_gap_bound(system: &SystemDescriptor, input: &GapBoundInput, radius: u64) -> Result<GapBound> {
    if !(input.chi_lower > 0.0) {
        return Err(Error::InvalidParameter("chi_lower must be positive".into()));
    }
    let theta = system.theta();
    let h_lower = input.h_f.h_lower;
    let h_upper = input.h_f.h_upper.max(h_lower);
    if !(h_lower > theta) {
        return Err(Error::BelowFinitenessThreshold { h_lower, theta });
    }
    let tail = tail_sum(system, &input.letters, h_lower, radius)?;
    if !tail.upper.is_finite() {
        return Err(Error::DivergentTail { t: h_lower });
    }
    let lambda = input.lambda;
    let prefactor =
        lambda.count as f64 * (system.distortion() / lambda.kappa).powf(h_upper) / input.chi_lower * (1.0 + 4.0 * f64::EPSILON);
    Ok(GapBound {
        bound: prefactor * tail.upper * (1.0 + 2.0 * f64::EPSILON),
        prefactor,
        tail,
        h_lower,
        h_upper,
        chi_lower: input.chi_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::RatioRule;

    #[test]
    fn complex_cf_chi_is_log_two() {
        let c = chi_lower_bound(&OrderedAlphabet::new(SystemDescriptor::complex_cf()), 2).unwrap();
        assert!((c.chi - 2f64.ln()).abs() < 1e-12);
        assert_eq!(c.argmax, vec![GaussianLetter::index(1); 2]);
    }

    #[test]
    fn similarity_bound_collapses_to_tail_over_chi() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Power { exponent: 2.0, scale: 0.5 }).unwrap();
        let f: LetterSet = (1..=10).map(GaussianLetter::index).collect();
        let h = BowenBracket { h_lower: 0.7, h_upper: 0.8, n: 1, iterations: 0, slack_limited: false, suggested_n: None };
        let input = GapBoundInput { letters: f.clone(), h_f: h, chi_lower: 0.5, lambda: LambdaData::default() };
        let g = dimension_gap_bound(&sys, &input, 10).unwrap();
        let tail = tail_sum(&sys, &f, 0.7, 10).unwrap();
        assert!((g.bound - tail.upper / 0.5).abs() <= 1e-12 * g.bound);
    }

    #[test]
    fn exponent_below_theta_is_rejected() {
        let f: LetterSet = [GaussianLetter::index(1)].into_iter().collect();
        let h = BowenBracket { h_lower: 0.9, h_upper: 1.0, n: 2, iterations: 0, slack_limited: false, suggested_n: None };
        let input = GapBoundInput { letters: f, h_f: h, chi_lower: 0.5, lambda: LambdaData::default() };
        assert!(matches!(
            dimension_gap_bound(&SystemDescriptor::complex_cf(), &input, 10),
            Err(Error::BelowFinitenessThreshold { .. })
        ));
    }
}
