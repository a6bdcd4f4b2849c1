//! System descriptors and derivative norms.
//!
//! Letters of the grid systems are Gaussian integers `m + ni` with `m >= 1`.
//! Letters of indexed systems (real continued fractions, similarity lists and
//! families, finite graph-directed systems) are encoded as `k + 0i` with the
//! 1-based index `k`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::GaussianLetter;
use crate::continuant::{disk_norms, interval_norms};
use crate::error::{Error, Result};

/// Ratio rule for an infinite family of similarities indexed by `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RatioRule {
    /// r_k = scale * ratio^k
    Geometric {
        ratio: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// r_k = scale * (k + 1)^(-exponent)
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl RatioRule {
    pub fn ratio(&self, k: u64) -> f64 {
        match *self {
            RatioRule::Geometric { ratio, scale } => scale * ratio.powf(k as f64),
            RatioRule::Power { exponent, scale } => scale * ((k + 1) as f64).powf(-exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// phi_e(z) = 1 / (e + z) on B(1/2, 1/2), e = m + ni, m >= 1.
    ComplexCf,
    /// phi_k(x) = 1 / (k + x) on [0, 1].
    RealCf,
    /// Similarities with the ratios and image disks of the complex system.
    LinearizedCf,
    SimilarityIfs { ratios: Vec<f64> },
    SimilarityFamily { family: RatioRule },
    /// Similarities with an incidence matrix; word `ij` is admissible iff `incidence[i][j] = 1`.
    FiniteGdms { ratios: Vec<f64>, incidence: Vec<Vec<u8>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    #[serde(flatten)]
    pub kind: SystemKind,
    /// Bounded distortion constant K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
}

impl SystemDescriptor {
    pub fn new(kind: SystemKind) -> Self {
        Self { kind, distortion: None }
    }

    pub fn complex_cf() -> Self {
        Self::new(SystemKind::ComplexCf)
    }

    pub fn real_cf() -> Self {
        Self::new(SystemKind::RealCf)
    }

    pub fn linearized_cf() -> Self {
        Self::new(SystemKind::LinearizedCf)
    }

    pub fn similarity(ratios: Vec<f64>) -> Result<Self> {
        let s = Self::new(SystemKind::SimilarityIfs { ratios });
        s.validate()?;
        Ok(s)
    }

    pub fn similarity_family(family: RatioRule) -> Result<Self> {
        let s = Self::new(SystemKind::SimilarityFamily { family });
        s.validate()?;
        Ok(s)
    }

    pub fn finite_gdms(ratios: Vec<f64>, incidence: Vec<Vec<u8>>) -> Result<Self> {
        let s = Self::new(SystemKind::FiniteGdms { ratios, incidence });
        s.validate()?;
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSystem(msg.to_string()));
        let ratios_ok = |r: &[f64]| r.iter().all(|&x| x > 0.0 && x < 1.0);
        match &self.kind {
            SystemKind::SimilarityIfs { ratios } => {
                if ratios.is_empty() || !ratios_ok(ratios) {
                    return bad("similarity ratios must be nonempty and lie in (0, 1)");
                }
            }
            SystemKind::SimilarityFamily { family } => match *family {
                RatioRule::Geometric { ratio, scale } => {
                    if !(ratio > 0.0 && ratio < 1.0 && scale > 0.0 && scale * ratio < 1.0) {
                        return bad("geometric family needs 0 < ratio < 1 and scale * ratio < 1");
                    }
                }
                RatioRule::Power { exponent, scale } => {
                    if !(exponent > 0.0 && scale > 0.0 && scale * 2f64.powf(-exponent) < 1.0) {
                        return bad("power family needs a positive exponent and ratios below 1");
                    }
                }
            },
            SystemKind::FiniteGdms { ratios, incidence } => {
                if ratios.is_empty() || !ratios_ok(ratios) {
                    return bad("gdms ratios must be nonempty and lie in (0, 1)");
                }
                if incidence.len() != ratios.len()
                    || incidence.iter().any(|row| row.len() != ratios.len() || row.iter().any(|&a| a > 1))
                {
                    return bad("incidence must be a square 0/1 matrix matching the ratios");
                }
            }
            _ => {}
        }
        if let Some(k) = self.distortion {
            if !(k >= 1.0 && k.is_finite()) {
                return bad("distortion constant must be finite and at least 1");
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SystemKind::ComplexCf => "complex_cf",
            SystemKind::RealCf => "real_cf",
            SystemKind::LinearizedCf => "linearized_cf",
            SystemKind::SimilarityIfs { .. } => "similarity_ifs",
            SystemKind::SimilarityFamily { .. } => "similarity_family",
            SystemKind::FiniteGdms { .. } => "finite_gdms",
        }
    }

    /// Bounded distortion constant K.
    pub fn distortion(&self) -> f64 {
        self.distortion.unwrap_or(match self.kind {
            SystemKind::ComplexCf | SystemKind::RealCf => 4.0,
            _ => 1.0,
        })
    }

    /// Finiteness parameter: inf of t with Z_1(t) finite.
    pub fn theta(&self) -> f64 {
        match &self.kind {
            SystemKind::ComplexCf | SystemKind::LinearizedCf => 1.0,
            SystemKind::RealCf => 0.5,
            SystemKind::SimilarityIfs { .. } | SystemKind::FiniteGdms { .. } => 0.0,
            SystemKind::SimilarityFamily { family } => match *family {
                RatioRule::Geometric { .. } => 0.0,
                RatioRule::Power { exponent, .. } => 1.0 / exponent,
            },
        }
    }

    /// Dimension of the ambient space, an upper bound for every Bowen parameter.
    pub fn ambient_dimension(&self) -> f64 {
        match self.kind {
            SystemKind::ComplexCf | SystemKind::LinearizedCf => 2.0,
            _ => 1.0,
        }
    }

    /// Letters are Gaussian integers rather than indices.
    pub fn is_grid(&self) -> bool {
        matches!(self.kind, SystemKind::ComplexCf | SystemKind::LinearizedCf)
    }

    pub fn is_gdms(&self) -> bool {
        matches!(self.kind, SystemKind::FiniteGdms { .. })
    }

    /// Number of letters, `None` for infinite alphabets.
    pub fn letter_count(&self) -> Option<usize> {
        match &self.kind {
            SystemKind::SimilarityIfs { ratios } | SystemKind::FiniteGdms { ratios, .. } => Some(ratios.len()),
            _ => None,
        }
    }

    pub fn contains(&self, e: GaussianLetter) -> bool {
        if self.is_grid() {
            return true;
        }
        e.n() == 0 && self.letter_count().is_none_or(|len| e.m() as usize <= len)
    }

    fn check(&self, e: GaussianLetter) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::LetterNotInSystem(e))
        }
    }

    /// Sup-norm of phi_e' over the seed set.
    pub fn deriv_norm(&self, e: GaussianLetter) -> Result<f64> {
        self.check(e)?;
        Ok(self.deriv_norm_unchecked(e))
    }

    pub(crate) fn deriv_norm_unchecked(&self, e: GaussianLetter) -> f64 {
        let (m, n) = (e.m() as f64, e.n() as f64);
        match &self.kind {
            SystemKind::ComplexCf => {
                let s = (e.cf_key() as f64).sqrt() - 1.0;
                4.0 / (s * s)
            }
            SystemKind::RealCf => 1.0 / (m * m),
            SystemKind::LinearizedCf => 1.0 / (e.linear_key() as f64),
            SystemKind::SimilarityIfs { ratios } | SystemKind::FiniteGdms { ratios, .. } => {
                ratios[e.m() as usize - 1]
            }
            SystemKind::SimilarityFamily { family } => {
                debug_assert_eq!(n, 0.0);
                family.ratio(e.m() as u64)
            }
        }
    }

    /// Inf of |phi_e'| over the seed set.
    pub fn deriv_inf(&self, e: GaussianLetter) -> Result<f64> {
        self.word_deriv_inf(&[e])
    }

    /// Whether consecutive letters are allowed to follow each other.
    pub fn admissible(&self, word: &[GaussianLetter]) -> bool {
        match &self.kind {
            SystemKind::FiniteGdms { incidence, .. } => word
                .windows(2)
                .all(|p| incidence[p[0].m() as usize - 1][p[1].m() as usize - 1] == 1),
            _ => true,
        }
    }

    fn check_word(&self, word: &[GaussianLetter]) -> Result<()> {
        if word.is_empty() {
            return Err(Error::InvalidParameter("empty word".into()));
        }
        for &e in word {
            self.check(e)?;
        }
        if !self.admissible(word) {
            return Err(Error::InadmissibleWord(word.to_vec()));
        }
        Ok(())
    }

    /// Sup-norm of the derivative of phi_w = phi_{w_1} o ... o phi_{w_n}.
    ///
    /// Exact for every supported kind: continuants for the continued
    /// fraction systems and ratio products for similarities.
    pub fn word_deriv_norm(&self, word: &[GaussianLetter]) -> Result<f64> {
        self.check_word(word)?;
        Ok(self.word_deriv_norm_unchecked(word))
    }

    pub(crate) fn word_deriv_norm_unchecked(&self, word: &[GaussianLetter]) -> f64 {
        match self.kind {
            SystemKind::ComplexCf => disk_norms(word).sup,
            SystemKind::RealCf => interval_norms(&indices(word)).sup,
            _ => word.iter().map(|&e| self.deriv_norm_unchecked(e)).product(),
        }
    }

    /// Inf of |phi_w'| over the seed set.
    pub fn word_deriv_inf(&self, word: &[GaussianLetter]) -> Result<f64> {
        self.check_word(word)?;
        Ok(self.word_deriv_inf_unchecked(word))
    }

    pub(crate) fn word_deriv_inf_unchecked(&self, word: &[GaussianLetter]) -> f64 {
        match self.kind {
            SystemKind::ComplexCf => disk_norms(word).inf,
            SystemKind::RealCf => interval_norms(&indices(word)).inf,
            _ => self.word_deriv_norm_unchecked(word),
        }
    }

    /// Bracket for the word norm implied by bounded distortion alone:
    /// `[K^{-(n-1)} prod, prod]` with `prod` the product of letter norms.
    pub fn quasi_multiplicative_bracket(&self, word: &[GaussianLetter]) -> Result<(f64, f64)> {
        self.check_word(word)?;
        let prod: f64 = word.iter().map(|&e| self.deriv_norm_unchecked(e)).product();
        let k = self.distortion();
        Ok((prod * k.powi(1 - word.len() as i32), prod))
    }

    /// Image of the seed disk under phi_e for the grid systems, as (center, radius).
    pub fn image_disk(&self, e: GaussianLetter) -> Result<((f64, f64), f64)> {
        let (m, n) = (e.m() as f64, e.n() as f64);
        match self.kind {
            SystemKind::ComplexCf | SystemKind::LinearizedCf => {
                // 1/(e + z) maps B(1/2, 1/2) onto B(conj(e + 1/2) / L, 1/(2L)), L = m^2 + m + n^2.
                let l = e.linear_key() as f64;
                Ok((((m + 0.5) / l, -n / l), 0.5 / l))
            }
            _ => Err(Error::Unsupported { system: self.name().into(), what: "image disk".into() }),
        }
    }
}

fn indices(word: &[GaussianLetter]) -> Vec<u64> {
    word.iter().map(|e| e.m() as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: i64, n: i64) -> GaussianLetter {
        GaussianLetter::new(m, n).unwrap()
    }

    /// Sup of |phi_w'(z)| sampled densely on the boundary circle of B(1/2, 1/2).
    fn sampled_sup(word: &[GaussianLetter]) -> f64 {
        let mut best: f64 = 0.0;
        let samples = 20_000;
        for s in 0..samples {
            let th = std::f64::consts::TAU * s as f64 / samples as f64;
            let (mut zr, mut zi) = (0.5 + 0.5 * th.cos(), 0.5 * th.sin());
            let mut d = 1.0;
            for e in word.iter().rev() {
                let (wr, wi) = (e.m() as f64 + zr, e.n() as f64 + zi);
                let r2 = wr * wr + wi * wi;
                d /= r2;
                zr = wr / r2;
                zi = -wi / r2;
            }
            best = best.max(d);
        }
        best
    }

    #[test]
    fn letter_norm_matches_closed_form() {
        let s = SystemDescriptor::complex_cf();
        assert_eq!(s.deriv_norm(g(1, 0)).unwrap(), 1.0);
        assert_eq!(s.deriv_norm(g(2, 0)).unwrap(), 0.25);
        let e = g(3, -2);
        let closed = (((3.5f64).powi(2) + 4.0).sqrt() - 0.5).powi(-2);
        assert!((s.deriv_norm(e).unwrap() / closed - 1.0).abs() < 1e-14);
    }

    #[test]
    fn word_norm_matches_boundary_sampling() {
        let s = SystemDescriptor::complex_cf();
        for word in [
            vec![g(1, 0), g(1, 0)],
            vec![g(1, 1), g(2, 0)],
            vec![g(1, 0), g(1, 1), g(1, -1)],
            vec![g(2, -3), g(1, 2), g(4, 1), g(1, 0)],
        ] {
            let exact = s.word_deriv_norm(&word).unwrap();
            let sampled = sampled_sup(&word);
            assert!(sampled <= exact * (1.0 + 1e-12), "{word:?}");
            assert!((sampled / exact - 1.0).abs() < 1e-6, "{word:?}: {sampled} vs {exact}");
        }
    }

    #[test]
    fn known_word_norms() {
        let s = SystemDescriptor::complex_cf();
        assert!((s.word_deriv_norm(&[g(1, 0), g(1, 0)]).unwrap() - 0.25).abs() < 1e-15);
        assert!((s.word_deriv_norm(&[g(1, 1), g(2, 0)]).unwrap() - 0.077_415_9).abs() < 1e-7);
        assert!((s.word_deriv_norm(&[g(1, 0), g(1, 1), g(1, -1)]).unwrap() - 0.065_514_1).abs() < 1e-7);
    }

    #[test]
    fn similarity_words_are_products() {
        let s = SystemDescriptor::similarity(vec![1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let w = [g(1, 0), g(2, 0), g(2, 0)];
        assert!((s.word_deriv_norm(&w).unwrap() - 1.0 / 27.0).abs() < 1e-17);
    }

    #[test]
    fn gdms_rejects_inadmissible_words() {
        let s = SystemDescriptor::finite_gdms(vec![0.5, 0.5], vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert!(matches!(s.word_deriv_norm(&[g(1, 0), g(1, 0)]), Err(Error::InadmissibleWord(_))));
        assert!(s.word_deriv_norm(&[g(1, 0), g(2, 0)]).is_ok());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let s = SystemDescriptor::finite_gdms(vec![0.5, 0.25], vec![vec![1, 1], vec![1, 0]]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(SystemDescriptor::from_json_str(&json).unwrap(), s);
        let fam = SystemDescriptor::from_json_str(r#"{"kind":"similarity_family","family":{"rule":"power","exponent":2}}"#)
            .unwrap();
        assert_eq!(fam.theta(), 0.5);
        assert!(SystemDescriptor::from_json_str(r#"{"kind":"similarity_ifs","ratios":[1.5]}"#).is_err());
    }

    #[test]
    fn image_disk_contains_sampled_images() {
        let s = SystemDescriptor::complex_cf();
        let e = g(2, -1);
        let ((cx, cy), r) = s.image_disk(e).unwrap();
        for k in 0..64 {
            let th = std::f64::consts::TAU * k as f64 / 64.0;
            let (zr, zi) = (0.5 + 0.5 * th.cos() + 2.0, 0.5 * th.sin() - 1.0);
            let d = zr * zr + zi * zi;
            let (ir, ii) = (zr / d, -zi / d);
            assert!(((ir - cx).hypot(ii - cy) - r).abs() < 1e-12);
        }
    }
}
