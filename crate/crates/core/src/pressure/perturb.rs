use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet};
use crate::error::{Error, Result};
use crate::pressure::PressureBracket;
use crate::systems::SystemDescriptor;

/// Finite set of connecting words for a graph-directed system: its size,
/// the minimal derivative norm `kappa` among them and their maximal length `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaData {
    pub count: usize,
    pub kappa: f64,
    pub p: usize,
}

impl Default for LambdaData {
    /// The trivial data of a full shift.
    fn default() -> Self {
        Self { count: 1, kappa: 1.0, p: 0 }
    }
}

/// Bracket for `exp(P_{F u {e}}(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPressureBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds the change in pressure caused by adding one letter to F.
///
/// For a full shift:
/// `e^{P_F} + K^{-t} ||phi_e'||^t <= e^{P_{F+e}} <= e^{P_F} + K^t ||phi_e'||^t`.
/// For a graph-directed system only the upper bound
/// `e^{P_F} + #Lambda (K/kappa)^t max(1, e^{p P_F}) ||phi_e'||^t` is available;
/// the lower end falls back to monotonicity `e^{P_F}`.
pub fn add_letter_bounds(
    system: &SystemDescriptor,
    letters: &LetterSet,
    e: GaussianLetter,
    t: f64,
    p_f: &PressureBracket,
    lambda: Option<LambdaData>,
) -> Result<ExpPressureBracket> {
    if letters.contains(e) {
        return Err(Error::LetterAlreadyPresent(e));
    }
    let w = system.deriv_norm(e)?.powf(t);
    let k = system.distortion();
    if system.is_gdms() {
        let lambda = lambda.ok_or(Error::MissingLambda)?;
        let factor = lambda.count as f64
            * (k / lambda.kappa).powf(t)
            * (lambda.p as f64 * p_f.upper).exp().max(1.0);
        return Ok(ExpPressureBracket { lower: p_f.lower.exp(), upper: p_f.upper.exp() + factor * w });
    }
    Ok(ExpPressureBracket {
        lower: p_f.lower.exp() + k.powf(-t) * w,
        upper: p_f.upper.exp() + k.powf(t) * w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{pressure_bracket, PartitionOptions};

    #[test]
    fn similarity_bounds_are_exact() {
        let s = SystemDescriptor::similarity(vec![0.5, 0.25, 0.25]).unwrap();
        let f = LetterSet::from_letters([GaussianLetter::index(1)]);
        let pf = pressure_bracket(&s, &f, 1, 1.0, &PartitionOptions::default()).unwrap();
        let b = add_letter_bounds(&s, &f, GaussianLetter::index(2), 1.0, &pf, None).unwrap();
        assert!((b.lower - 0.75).abs() < 1e-14 && (b.upper - 0.75).abs() < 1e-14);
    }

    #[test]
    fn duplicate_letter_is_rejected() {
        let s = SystemDescriptor::complex_cf();
        let e = GaussianLetter::new(1, 0).unwrap();
        let f = LetterSet::from_letters([e]);
        let pf = pressure_bracket(&s, &f, 2, 1.0, &PartitionOptions::default()).unwrap();
        assert_eq!(add_letter_bounds(&s, &f, e, 1.0, &pf, None), Err(Error::LetterAlreadyPresent(e)));
    }

    #[test]
    fn gdms_needs_lambda() {
        let s = SystemDescriptor::finite_gdms(vec![0.5, 0.5, 0.3], vec![vec![1; 3]; 3]).unwrap();
        let f = LetterSet::from_letters([GaussianLetter::index(1)]);
        let pf = pressure_bracket(&s, &f, 1, 1.0, &PartitionOptions::default()).unwrap();
        let e = GaussianLetter::index(2);
        assert_eq!(add_letter_bounds(&s, &f, e, 1.0, &pf, None), Err(Error::MissingLambda));
        let b = add_letter_bounds(&s, &f, e, 1.0, &pf, Some(LambdaData::default())).unwrap();
        assert!(b.upper >= 1.0 - 1e-12);
    }
}
