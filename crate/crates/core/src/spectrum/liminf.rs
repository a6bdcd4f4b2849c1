//! Ratio-liminf criteria for strong cofinite full spectrum.

use serde::{Deserialize, Serialize};

use crate::alphabet::OrderedAlphabet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiminfThresholds {
    /// Liminf at least 1.
    pub unit: f64,
    /// `2^{-1/theta}`, similarity systems only.
    pub similarity: Option<f64>,
    /// `K^2 / (1 + K^{2 theta})^{1/theta}`, or 0 when `theta = 0`.
    pub distortion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiminfVerdict {
    StrongCofiniteFullSpectrum,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiminfReport {
    pub q: usize,
    pub window: usize,
    pub theta: f64,
    pub distortion: f64,
    /// Minimum of consecutive norm ratios over `[q, q + window)`.
    pub liminf_estimate: f64,
    /// Same minimum over `[q/2, q/2 + window)`, to show the trend.
    pub earlier_estimate: f64,
    pub thresholds: LiminfThresholds,
    /// The gap to 1 shrinks from the earlier window to this one.
    pub unit_met: bool,
    pub similarity_met: Option<bool>,
    pub distortion_met: bool,
    pub verdict: LiminfVerdict,
    /// A finite window only suggests the liminf.
    pub advisory: bool,
}

fn window_min(alphabet: &OrderedAlphabet, start: usize, window: usize) -> Result<f64> {
    let system = alphabet.system();
    let letters = alphabet.prefix(start + window)?;
    let norms: Vec<f64> = letters[start - 1..].iter().map(|&e| system.deriv_norm_unchecked(e)).collect();
    Ok(norms.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min))
}

pub fn liminf_thresholds(k: f64, theta: f64, similarity: bool) -> LiminfThresholds {
    let distortion = if theta > 0.0 { k * k / (1.0 + k.powf(2.0 * theta)).powf(1.0 / theta) } else { 0.0 };
    let sim = similarity.then(|| if theta > 0.0 { 2f64.powf(-1.0 / theta) } else { 0.0 });
    LiminfThresholds { unit: 1.0, similarity: sim, distortion }
}

/// Estimates `liminf ||phi'_{e_{n+1}}|| / ||phi'_{e_n}||` over a window from `q`.
pub fn liminf_criterion(alphabet: &OrderedAlphabet, q: usize, window: usize) -> Result<LiminfReport> {
    if q < 2 || window < 2 {
        return Err(Error::InvalidParameter("liminf window needs q >= 2 and window >= 2".into()));
    }
    let system = alphabet.system();
    let est = window_min(alphabet, q, window)?;
    let earlier = window_min(alphabet, (q / 2).max(1), window)?;
    let theta = system.theta();
    let k = system.distortion();
    let thresholds = liminf_thresholds(k, theta, k == 1.0 && !system.is_gdms());
    let unit_met = est >= 1.0 || (est > earlier && 1.0 - est <= 0.9 * (1.0 - earlier));
    let similarity_met = thresholds.similarity.map(|s| est > s);
    let distortion_met = est > thresholds.distortion;
    let met = unit_met || distortion_met || similarity_met == Some(true);
    Ok(LiminfReport {
        q,
        window,
        theta,
        distortion: k,
        liminf_estimate: est,
        earlier_estimate: earlier,
        thresholds,
        unit_met,
        similarity_met,
        distortion_met,
        verdict: if met { LiminfVerdict::StrongCofiniteFullSpectrum } else { LiminfVerdict::Inconclusive },
        advisory: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{RatioRule, SystemDescriptor};

    #[test]
    fn geometric_ratios_give_the_ratio() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.5, scale: 1.0 }).unwrap();
        let r = liminf_criterion(&OrderedAlphabet::new(sys), 100, 50).unwrap();
        assert!((r.liminf_estimate - 0.5).abs() < 1e-12);
        assert!(r.distortion_met);
        assert_eq!(r.verdict, LiminfVerdict::StrongCofiniteFullSpectrum);
    }

    #[test]
    fn power_ratios_tend_to_one() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Power { exponent: 2.0, scale: 1.0 }).unwrap();
        let r = liminf_criterion(&OrderedAlphabet::new(sys), 1000, 100).unwrap();
        assert!(r.liminf_estimate > 0.99 && r.liminf_estimate < 1.0);
        assert!(r.unit_met);
        assert_eq!(r.thresholds.similarity, Some(0.25));
    }

    #[test]
    fn complex_cf_threshold_is_sixteen_seventeenths() {
        let r = liminf_criterion(&OrderedAlphabet::new(SystemDescriptor::complex_cf()), 2000, 500).unwrap();
        assert!((r.thresholds.distortion - 16.0 / 17.0).abs() < 1e-15);
        assert!(r.liminf_estimate > 0.99);
        assert!(r.distortion_met);
    }
}
