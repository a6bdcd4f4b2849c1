//! Lower approximations of `f(k, t) = sum_{n > k} ||phi_{e_n}'||^t / ||phi_{e_k}'||^t`.
//!
//! The exact identity `f(k+1, t) = alpha(k)^{-t} f(k, t) - 1` with
//! `alpha(k) = ||phi_{e_{k+1}}'|| / ||phi_{e_k}'||` is monotone in `f(k, t)`,
//! so a lower seed stays a lower bound along the recursion.

use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, OrderedAlphabet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::summation::{DirectedSum, Neumaier};
use crate::systems::{RatioRule, SystemKind};

/// Relative slack applied per recursion step.
pub const STEP_SLACK: f64 = 8.0 * f64::EPSILON;

/// A conjugate-closed grid box `1 <= m <= m_max`, `|n| <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub m_max: u64,
    pub n_max: u64,
}

impl GridBox {
    /// Reduced certification box.
    pub const DESK: GridBox = GridBox { m_max: 128, n_max: 256 };
    pub const DESK_SEED: GridBox = GridBox { m_max: 4000, n_max: 4000 };
    pub const PAPER: GridBox = GridBox { m_max: 512, n_max: 4096 };
    pub const PAPER_SEED: GridBox = GridBox { m_max: 40000, n_max: 40000 };

    pub fn new(m_max: u64, n_max: u64) -> Self {
        Self { m_max, n_max }
    }

    pub fn contains(&self, e: GaussianLetter) -> bool {
        e.m() as u64 <= self.m_max && e.n().unsigned_abs() <= self.n_max
    }

    pub fn covers(&self, other: &GridBox) -> bool {
        self.m_max >= other.m_max && self.n_max >= other.n_max
    }

    pub fn letter_count(&self) -> u64 {
        self.m_max * (2 * self.n_max + 1)
    }
}

/// Region over which the seed sum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum SeedRegion {
    Grid(GridBox),
    /// The first `count` letters of an indexed system plus a closed-form lower tail.
    Prefix { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRatioState {
    pub k: usize,
    pub t: f64,
    pub letter: GaussianLetter,
    /// `||phi_{e_k}'||`.
    pub norm: f64,
    /// `f~(k, t) <= f(k, t)`.
    pub f_lower: f64,
    pub region: SeedRegion,
}

fn check_t(alphabet: &OrderedAlphabet, t: f64) -> Result<()> {
    let theta = alphabet.system().theta();
    if !(t > theta) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t = {t} must exceed the finiteness threshold {theta}"
        )));
    }
    Ok(())
}

/// `f~(1, t)`: the seed sum over the region, divided by `||phi_{e_1}'||^t`.
pub fn tail_ratio_seed(alphabet: &OrderedAlphabet, t: f64, region: SeedRegion) -> Result<TailRatioState> {
    tail_ratio_seed_at(alphabet, 1, t, region, Exec::default())
}

/// Direct boxed sum for `f~(k, t)` at an arbitrary position `k`.
pub fn tail_ratio_seed_at(
    alphabet: &OrderedAlphabet,
    k: usize,
    t: f64,
    region: SeedRegion,
    exec: Exec,
) -> Result<TailRatioState> {
    check_t(alphabet, t)?;
    let letter = alphabet.letter(k)?;
    let system = alphabet.system();
    let norm = system.deriv_norm_unchecked(letter);
    let (sum, count) = match region {
        SeedRegion::Grid(b) => {
            if !system.is_grid() {
                return Err(Error::Unsupported { system: system.name().into(), what: "grid seed boxes".into() });
            }
            grid_seed(alphabet, letter, norm, t, b, exec)
        }
        SeedRegion::Prefix { count } => prefix_seed(alphabet, k, norm, t, count)?,
    };
    if count == 0 {
        return Err(Error::EmptySeedRegion);
    }
    Ok(TailRatioState { k, t, letter, norm, f_lower: sum.lower.max(0.0), region })
}

/// Sum of `(||e|| / ||e_k||)^t` over letters of the box after `e_k` in the order.
fn grid_seed(
    alphabet: &OrderedAlphabet,
    ek: GaussianLetter,
    norm_k: f64,
    t: f64,
    b: GridBox,
    exec: Exec,
) -> (DirectedSum, usize) {
    let system = alphabet.system();
    let key_k = alphabet.key(ek);
    let excluded = alphabet.excluded();
    let nmax = b.n_max as i64;
    let rows = exec.map_range(b.m_max as usize, |i| {
        let m = i as i64 + 1;
        let mut acc = Neumaier::new();
        let mut count = 0usize;
        for n in -nmax..=nmax {
            let e = GaussianLetter::new(m, n).expect("m >= 1");
            if alphabet.key(e) <= key_k || excluded.contains(e) {
                continue;
            }
            acc.add((system.deriv_norm_unchecked(e) / norm_k).powf(t));
            count += 1;
        }
        (DirectedSum::from_estimate(acc.value(), 8.0, count), count)
    });
    let count = rows.iter().map(|r| r.1).sum();
    let parts: Vec<_> = rows.into_iter().map(|r| r.0).collect();
    (DirectedSum::combine(&parts), count)
}

fn prefix_seed(alphabet: &OrderedAlphabet, k: usize, norm_k: f64, t: f64, count: usize) -> Result<(DirectedSum, usize)> {
    let system = alphabet.system();
    let letters = alphabet.prefix(count.max(k))?;
    let mut acc = Neumaier::new();
    let mut n = 0;
    for &e in &letters[k..] {
        acc.add((system.deriv_norm_unchecked(e) / norm_k).powf(t));
        n += 1;
    }
    let last = letters.last().map_or(0, |e| e.m() as u64);
    let tail = match &system.kind {
        SystemKind::SimilarityFamily { family } if alphabet.excluded().max_shell() <= last => {
            family_tail_lower(family, last, t) / norm_k.powf(t)
        }
        _ => 0.0,
    };
    if tail > 0.0 {
        acc.add(tail);
        n += 1;
    }
    Ok((DirectedSum::from_estimate(acc.value(), 16.0, n), n))
}

/// Lower bound for `sum_{j > n} r_j^t` of a similarity family.
pub fn family_tail_lower(family: &RatioRule, n: u64, t: f64) -> f64 {
    match *family {
        RatioRule::Geometric { ratio, scale } => {
            let q = ratio.powf(t);
            scale.powf(t) * q.powf(n as f64 + 1.0) / (1.0 - q)
        }
        RatioRule::Power { exponent, scale } => {
            let s = exponent * t;
            if s <= 1.0 {
                f64::INFINITY
            } else {
                // sum_{j > n} (j+1)^{-s} >= int_{n+2}^inf x^{-s} dx
                scale.powf(t) * (n as f64 + 2.0).powf(1.0 - s) / (s - 1.0)
            }
        }
    }
}

/// One recursion step with downward rounding.
#[inline]
pub fn step(f: f64, norm_k: f64, norm_next: f64, t: f64) -> f64 {
    if f.is_infinite() {
        return f;
    }
    let grow = (norm_k / norm_next).powf(t) * (1.0 - STEP_SLACK);
    (grow * f) * (1.0 - STEP_SLACK) - 1.0
}

/// Applies the recursion once.
pub fn advance_tail_ratio(alphabet: &OrderedAlphabet, state: &TailRatioState) -> Result<TailRatioState> {
    let next = alphabet.letter(state.k + 1)?;
    let norm_next = alphabet.system().deriv_norm_unchecked(next);
    let f = step(state.f_lower, state.norm, norm_next, state.t);
    if f < 0.0 {
        return Err(Error::EnlargeSeedBox { k: state.k + 1 });
    }
    Ok(TailRatioState { k: state.k + 1, letter: next, norm: norm_next, f_lower: f, ..*state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemDescriptor;

    #[test]
    fn one_letter_region_gives_alpha_power() {
        // The box {1, 2} holds e_1 = 1 and the single later letter 2.
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let s = tail_ratio_seed(&a, 2.0, SeedRegion::Grid(GridBox::new(2, 0))).unwrap();
        assert!((s.f_lower - 0.25f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn geometric_family_is_a_fixed_point() {
        let sys = SystemDescriptor::similarity_family(RatioRule::Geometric { ratio: 0.5, scale: 1.0 }).unwrap();
        let a = OrderedAlphabet::new(sys);
        let t = 1.3;
        let q = 0.5f64.powf(t);
        let exact = q / (1.0 - q);
        let mut s = tail_ratio_seed(&a, t, SeedRegion::Prefix { count: 40 }).unwrap();
        // Seed rounding grows by q^-1 per step.
        for _ in 0..12 {
            assert!(s.f_lower <= exact && exact - s.f_lower < 1e-8, "{s:?}");
            s = advance_tail_ratio(&a, &s).unwrap();
        }
    }

    #[test]
    fn step_inverts_seed() {
        let (nk, nn, t, x) = (0.3, 0.2, 1.7, 5.25);
        let alpha: f64 = nn / nk;
        let seed = alpha.powf(t) * (x + 1.0);
        assert!((step(seed, nk, nn, t) - x).abs() < 1e-13);
    }

    #[test]
    fn empty_region_is_an_error() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let r = tail_ratio_seed(&a, 2.0, SeedRegion::Grid(GridBox::new(1, 0)));
        assert_eq!(r, Err(Error::EmptySeedRegion));
    }

    #[test]
    fn seed_grows_with_the_box() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let small = tail_ratio_seed(&a, 2.0, SeedRegion::Grid(GridBox::new(100, 100))).unwrap();
        let big = tail_ratio_seed(&a, 2.0, SeedRegion::Grid(GridBox::new(200, 200))).unwrap();
        assert!(small.f_lower <= big.f_lower);
    }
}
