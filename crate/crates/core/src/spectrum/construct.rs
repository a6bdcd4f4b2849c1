//! Greedy subsystems with Bowen parameter just below a target.

use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet, OrderedAlphabet};
use crate::error::{Error, Result};
use crate::pressure::{bowen_bisect, pressure_bracket, BowenBracket, BowenOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    /// Candidates scanned per round before the window doubles.
    pub window: usize,
    pub window_cap: usize,
    pub bisect: BowenOptions,
}

impl Default for ConstructParams {
    fn default() -> Self {
        Self { window: 10_000, window_cap: 160_000, bisect: BowenOptions { tol: 1e-6, ..BowenOptions::default() } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructStep {
    pub letter: GaussianLetter,
    /// 1-based position in the natural order.
    pub position: usize,
    /// Upper pressure bound of the enlarged set at the target; negative.
    pub pressure_upper: f64,
    /// Bowen bracket of the set after this step.
    pub bracket: BowenBracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxLetters,
    TargetNonPositive,
    AlphabetExhausted,
    SearchWindowExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub target_t: f64,
    pub letters: LetterSet,
    pub steps: Vec<ConstructStep>,
    pub stop: StopReason,
    pub candidates_scanned: usize,
}

impl Construction {
    /// `[h_F lower, target]`, or `[0, 0]` for a singleton.
    pub fn bracket(&self) -> (f64, f64) {
        match self.steps.last() {
            Some(s) if self.letters.len() > 1 => (s.bracket.h_lower, self.target_t),
            _ => (0.0, 0.0),
        }
    }
}

fn singleton_bracket(params: &ConstructParams) -> BowenBracket {
    BowenBracket { h_lower: 0.0, h_upper: 0.0, n: params.bisect.n, iterations: 0, slack_limited: false, suggested_n: None }
}

/// Appends, in natural order, every letter that keeps the upper pressure at
/// `target_t` negative, until `max_letters` letters are chosen.
///
/// A rejected letter stays rejected as F grows since pressure is monotone in F,
/// so the scan never revisits earlier positions.
pub fn construct_subsystem(
    alphabet: &OrderedAlphabet,
    target_t: f64,
    max_letters: usize,
    params: &ConstructParams,
) -> Result<Construction> {
    if max_letters == 0 || params.window == 0 {
        return Err(Error::InvalidParameter("max_letters and window must be positive".into()));
    }
    let system = alphabet.system();
    let mut out = Construction {
        target_t,
        letters: LetterSet::new(),
        steps: Vec::new(),
        stop: StopReason::MaxLetters,
        candidates_scanned: 0,
    };
    let mut pos = 1;
    let mut window = params.window;
    if target_t <= 0.0 {
        let e = alphabet.letter(1)?;
        out.letters.insert(e);
        out.steps.push(ConstructStep { letter: e, position: 1, pressure_upper: 0.0, bracket: singleton_bracket(params) });
        out.stop = StopReason::TargetNonPositive;
        return Ok(out);
    }
    while out.letters.len() < max_letters {
        let mut scanned = 0;
        let found = loop {
            if alphabet.len().is_some_and(|n| pos > n) {
                break None;
            }
            if scanned >= window {
                if window >= params.window_cap {
                    break None;
                }
                window = (window * 2).min(params.window_cap);
                continue;
            }
            let e = alphabet.letter(pos)?;
            pos += 1;
            scanned += 1;
            let candidate = out.letters.with(e);
            let p = pressure_bracket(system, &candidate, params.bisect.n, target_t, &params.bisect.partition)?;
            if p.upper < 0.0 {
                break Some((e, pos - 1, p.upper, candidate));
            }
        };
        out.candidates_scanned += scanned;
        let Some((e, position, pressure_upper, candidate)) = found else {
            out.stop = if alphabet.len().is_some_and(|n| pos > n) {
                StopReason::AlphabetExhausted
            } else {
                StopReason::SearchWindowExhausted
            };
            break;
        };
        let bracket = if candidate.len() == 1 {
            singleton_bracket(params)
        } else {
            bowen_bisect(system, &candidate, 0.0, target_t, &params.bisect)?
        };
        out.letters = candidate;
        out.steps.push(ConstructStep { letter: e, position, pressure_upper, bracket });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{RatioRule, SystemDescriptor};

    #[test]
    fn zero_target_gives_a_singleton() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let c = construct_subsystem(&a, 0.0, 10, &ConstructParams::default()).unwrap();
        assert_eq!(c.letters.len(), 1);
        assert_eq!(c.bracket(), (0.0, 0.0));
    }

    #[test]
    fn halving_family_skips_the_second_letter() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.5, scale: 1.0 }).unwrap();
        let target = 2f64.ln() / 3f64.ln();
        let c = construct_subsystem(&OrderedAlphabet::new(sys), target, 3, &ConstructParams::default()).unwrap();
        let pos: Vec<usize> = c.steps.iter().map(|s| s.position).collect();
        assert_eq!(pos[..2], [1, 3]);
        for s in &c.steps {
            assert!(s.bracket.h_upper < target);
        }
    }
}
