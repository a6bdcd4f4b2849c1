//! Interval certificates `[t_low, t_high] ⊆ DS(S)`.
//!
//! Two conditions are checked:
//! (i) `P_{I(d)}(t_low) <= 0`, from the upper pressure bracket;
//! (ii) `f(k, t_high) >= K^{2 t_high}` for every `k > d`: explicitly via the
//! tail-ratio recursion inside a box, analytically outside it.
//! Condition (ii) at `t_high` transfers to every smaller exponent.

use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, LetterSet, OrderedAlphabet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pressure::{pressure_bracket, PartitionOptions, PressureBracket};
use crate::spectrum::analytic::{analytic_tail_condition, first_passing, m_ray_term, n_ray_term, AnalyticCheck};
use crate::spectrum::tail_ratio::{step, tail_ratio_seed_at, GridBox, SeedRegion, STEP_SLACK};
use crate::systems::{RatioRule, SystemKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub t_low: f64,
    pub t_high: f64,
    /// Size of the initial block `I(d)`.
    pub d: usize,
    pub cert_box: GridBox,
    pub seed_box: GridBox,
    /// Explicitly checked prefix for indexed systems.
    pub prefix: usize,
    /// Seed prefix for indexed systems.
    pub seed_prefix: usize,
    /// Word length for the pressure condition.
    pub n: usize,
    pub partition: PartitionOptions,
    /// Keep every per-letter margin in the report.
    pub keep_margins: bool,
}

impl CertifyParams {
    pub fn desk(t_low: f64, t_high: f64, d: usize) -> Self {
        Self {
            t_low,
            t_high,
            d,
            cert_box: GridBox::DESK,
            seed_box: GridBox::DESK_SEED,
            prefix: 2_000,
            seed_prefix: 20_000,
            n: 2,
            partition: PartitionOptions::default(),
            keep_margins: false,
        }
    }

    pub fn paper(t_low: f64, t_high: f64, d: usize) -> Self {
        Self { cert_box: GridBox::PAPER, seed_box: GridBox::PAPER_SEED, ..Self::desk(t_low, t_high, d) }
    }

    fn exec(&self) -> Exec {
        self.partition.exec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterMargin {
    pub k: usize,
    pub letter: GaussianLetter,
    pub f_lower: f64,
    /// `f~(k, t_high) - K^{2 t_high}`.
    pub margin: f64,
}

/// How letters outside the explicit region are covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailProof {
    /// Four-rays bound: every letter with `m >= m0` or `|n| >= n0` passes.
    Analytic {
        t: f64,
        m0: u64,
        n0: u64,
        corner_m: AnalyticCheck,
        corner_n: AnalyticCheck,
        effective_box: GridBox,
    },
    /// `f(k, t)` is nondecreasing in `k` beyond the explicit prefix.
    MonotoneFamily { last_index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionScan {
    pub threshold: f64,
    /// Seed value `f~(1, t_high)`.
    pub seed: f64,
    pub letters_walked: usize,
    pub letters_checked: usize,
    pub failures: usize,
    pub min_margin: Option<LetterMargin>,
    pub first_failure: Option<LetterMargin>,
    /// Positions at which the recursion was re-seeded from a direct boxed sum.
    pub reseeds: Vec<usize>,
    /// Relative downward slack applied per recursion step.
    pub step_slack: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub margins: Vec<LetterMargin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCertificate {
    pub system: String,
    pub excluded: LetterSet,
    pub t_low: f64,
    pub t_high: f64,
    pub d: usize,
    pub initial_block: LetterSet,
    pub pressure: PressureBracket,
    pub min_margin: LetterMargin,
    pub letters_checked: usize,
    pub tail_proof: TailProof,
    /// Hypotheses taken from outside the computation.
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyVerdict {
    Certified,
    PressureConditionFailed,
    CounterexampleFound,
    BothConditionsFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub verdict: CertifyVerdict,
    pub params: CertifyParams,
    pub system: String,
    pub excluded: LetterSet,
    pub initial_block: LetterSet,
    pub pressure: PressureBracket,
    pub pressure_ok: bool,
    pub tail_proof: TailProof,
    pub scan: ConditionScan,
    pub certificate: Option<SpectrumCertificate>,
}

impl CertifyReport {
    pub fn certified(&self) -> bool {
        self.verdict == CertifyVerdict::Certified
    }
}

/// Explicit letters and the proof covering the rest.
struct Region {
    letters: Vec<GaussianLetter>,
    in_box: Box<dyn Fn(GaussianLetter) -> bool + Sync>,
    seed: SeedRegion,
    proof: TailProof,
}

fn grid_region(alphabet: &OrderedAlphabet, p: &CertifyParams, threshold: f64) -> Result<Region> {
    let t = p.t_high;
    if t > 2.0 {
        return Err(Error::Unsupported {
            system: alphabet.system().name().into(),
            what: format!("certificates at t_high = {t} > 2, where the analytic boundary is not available"),
        });
    }
    let m0 = first_passing(|m| m_ray_term(m, t), threshold);
    let n0 = first_passing(|n| n_ray_term(n, t), threshold);
    let eff = GridBox::new(p.cert_box.m_max.max(m0 - 1), p.cert_box.n_max.max(n0.max(1) - 1));
    let corner_m = analytic_tail_condition(GaussianLetter::new(m0 as i64, 0)?, t);
    let corner_n = analytic_tail_condition(GaussianLetter::new(1, n0 as i64)?, t);
    debug_assert!(corner_m.holds && corner_n.holds);
    if let Some(e) = alphabet.excluded().iter().find(|&e| !eff.contains(e)) {
        return Err(Error::InvalidParameter(format!("excluded letter {e} lies outside the certification box")));
    }
    if !p.seed_box.covers(&eff) {
        return Err(Error::InvalidParameter(format!(
            "seed box {}x{} must cover the effective certification box {}x{}",
            p.seed_box.m_max, p.seed_box.n_max, eff.m_max, eff.n_max
        )));
    }
    let corner = GaussianLetter::new(eff.m_max as i64, eff.n_max as i64)?;
    let letters = alphabet.letters_up_to_key(corner.cf_key());
    Ok(Region {
        letters,
        in_box: Box::new(move |e| eff.contains(e)),
        seed: SeedRegion::Grid(p.seed_box),
        proof: TailProof::Analytic { t, m0, n0, corner_m, corner_n, effective_box: eff },
    })
}

fn family_region(alphabet: &OrderedAlphabet, p: &CertifyParams) -> Result<Region> {
    let count = p.prefix.max(p.d + 1);
    let letters = alphabet.prefix(count)?;
    Ok(Region {
        letters,
        in_box: Box::new(|_| true),
        seed: SeedRegion::Prefix { count: p.seed_prefix.max(count + 1) },
        proof: TailProof::MonotoneFamily { last_index: count },
    })
}

/// Checks both conditions and issues a certificate when they hold.
pub fn certify_interval(alphabet: &OrderedAlphabet, p: &CertifyParams) -> Result<CertifyReport> {
    let system = alphabet.system();
    if !(p.t_low <= p.t_high) || p.d == 0 || p.n == 0 {
        return Err(Error::InvalidParameter("need t_low <= t_high, d >= 1 and n >= 1".into()));
    }
    let initial_block = alphabet.initial_block(p.d)?;
    let pressure = pressure_bracket(system, &initial_block, p.n, p.t_low, &p.partition)?;
    let pressure_ok = pressure.upper <= 0.0;

    let k_const = system.distortion();
    let threshold = k_const.powf(2.0 * p.t_high) * (1.0 + 1e-12);
    let region = match &system.kind {
        SystemKind::ComplexCf => grid_region(alphabet, p, threshold)?,
        SystemKind::SimilarityFamily { family: RatioRule::Geometric { .. } | RatioRule::Power { .. } } => {
            family_region(alphabet, p)?
        }
        _ => {
            return Err(Error::Unsupported { system: system.name().into(), what: "interval certificates".into() })
        }
    };
    if region.letters.len() <= p.d {
        return Err(Error::InvalidParameter(format!("d = {} leaves no letter in the certification region", p.d)));
    }
    let scan = scan_conditions(alphabet, p, &region, threshold)?;
    let conditions_ok = scan.failures == 0;
    let verdict = match (pressure_ok, conditions_ok) {
        (true, true) => CertifyVerdict::Certified,
        (false, true) => CertifyVerdict::PressureConditionFailed,
        (true, false) => CertifyVerdict::CounterexampleFound,
        (false, false) => CertifyVerdict::BothConditionsFailed,
    };
    let certificate = (verdict == CertifyVerdict::Certified).then(|| SpectrumCertificate {
        system: system.name().into(),
        excluded: alphabet.excluded().clone(),
        t_low: p.t_low,
        t_high: p.t_high,
        d: p.d,
        initial_block: initial_block.clone(),
        pressure,
        min_margin: scan.min_margin.expect("nonempty scan"),
        letters_checked: scan.letters_checked,
        tail_proof: region.proof.clone(),
        assumptions: vec![format!("t_high = {} does not exceed the dimension of the system", p.t_high)],
    });
    Ok(CertifyReport {
        verdict,
        params: p.clone(),
        system: system.name().into(),
        excluded: alphabet.excluded().clone(),
        initial_block,
        pressure,
        pressure_ok,
        tail_proof: region.proof,
        scan,
        certificate,
    })
}

fn scan_conditions(
    alphabet: &OrderedAlphabet,
    p: &CertifyParams,
    region: &Region,
    threshold: f64,
) -> Result<ConditionScan> {
    let system = alphabet.system();
    let t = p.t_high;
    let letters = &region.letters;
    let norms = p.exec().map_slice(letters, |&e| system.deriv_norm_unchecked(e));
    let seed = tail_ratio_seed_at(alphabet, 1, t, region.seed, p.exec())?;
    let mut f = seed.f_lower;
    let mut scan = ConditionScan {
        threshold,
        seed: f,
        letters_walked: letters.len(),
        letters_checked: 0,
        failures: 0,
        min_margin: None,
        first_failure: None,
        reseeds: Vec::new(),
        step_slack: STEP_SLACK,
        margins: Vec::new(),
    };
    for (i, &e) in letters.iter().enumerate() {
        let k = i + 1;
        if k > p.d && (region.in_box)(e) {
            let rec = LetterMargin { k, letter: e, f_lower: f, margin: f - threshold };
            scan.letters_checked += 1;
            if scan.min_margin.is_none_or(|m| rec.margin < m.margin) {
                scan.min_margin = Some(rec);
            }
            if rec.margin < 0.0 {
                scan.failures += 1;
                scan.first_failure.get_or_insert(rec);
            }
            if p.keep_margins {
                scan.margins.push(rec);
            }
        }
        if k < letters.len() {
            f = step(f, norms[i], norms[i + 1], t);
            if f < 0.0 {
                f = tail_ratio_seed_at(alphabet, k + 1, t, region.seed, p.exec())?.f_lower;
                scan.reseeds.push(k + 1);
            }
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemDescriptor;

    #[test]
    fn geometric_family_certifies_when_ratio_is_large() {
        // r_k = 0.9^k: f(k, t) = q / (1 - q) with q = 0.9^t, at least 1 iff q >= 1/2.
        let sys = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.9, scale: 1.0 }).unwrap();
        let a = OrderedAlphabet::new(sys);
        let p = CertifyParams { prefix: 50, seed_prefix: 400, ..CertifyParams::desk(0.5, 1.0, 1) };
        let r = certify_interval(&a, &p).unwrap();
        assert!(r.scan.failures == 0, "{:?}", r.scan.first_failure);
        assert!(r.pressure_ok);
        assert!(r.certified());
    }

    #[test]
    fn geometric_family_fails_when_ratio_is_small() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.3, scale: 1.0 }).unwrap();
        let a = OrderedAlphabet::new(sys);
        let p = CertifyParams { prefix: 20, seed_prefix: 200, ..CertifyParams::desk(0.5, 0.6, 1) };
        let r = certify_interval(&a, &p).unwrap();
        assert_eq!(r.verdict, CertifyVerdict::CounterexampleFound);
        assert!(r.scan.first_failure.unwrap().margin < 0.0);
    }

    #[test]
    fn large_exponent_is_refused_for_the_grid() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let r = certify_interval(&a, &CertifyParams::desk(1.5, 2.1, 28));
        assert!(matches!(r, Err(Error::Unsupported { .. })));
    }

    #[test]
    fn small_seed_box_is_rejected() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let p = CertifyParams { seed_box: GridBox::new(100, 100), ..CertifyParams::desk(1.5, 1.6, 28) };
        assert!(matches!(certify_interval(&a, &p), Err(Error::InvalidParameter(_))));
    }
}
