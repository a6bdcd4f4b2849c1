//! Gaussian-integer continuants for continued fraction words.
//!
//! For a word w = (w_1, ..., w_n) the continuants are q_0 = 1, q_1 = w_1 and
//! q_k = w_k q_{k-1} + q_{k-2}. The composed map has derivative
//! 1 / (q_n + q_{n-1} z)^2, so its extreme values on the closed disk
//! B(1/2, 1/2) depend only on |2 q_n + q_{n-1}| and |q_{n-1}|.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::alphabet::GaussianLetter;

/// Words longer than this skip exact arithmetic.
const EXACT_LEN_CAP: usize = 48;

/// Sup and inf of |phi_w'| over the closed disk B(1/2, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DiskNorms {
    pub sup: f64,
    pub inf: f64,
}

/// Quantities from which both norms follow:
/// `num` = |a|^2 - |b|^2 with a = 2 q_n + q_{n-1}, b = q_{n-1}.
struct Moduli {
    num: f64,
    a_abs: f64,
    b_abs: f64,
    /// Common scale already divided out, as a natural log.
    log_scale: f64,
}

impl Moduli {
    fn norms(&self) -> DiskNorms {
        // |a| - |b| = (|a|^2 - |b|^2) / (|a| + |b|) avoids cancellation.
        let sum = self.a_abs + self.b_abs;
        let diff = self.num / sum;
        let scale = (-2.0 * self.log_scale).exp();
        DiskNorms { sup: 4.0 / (diff * diff) * scale, inf: 4.0 / (sum * sum) * scale }
    }
}

pub(crate) fn disk_norms(word: &[GaussianLetter]) -> DiskNorms {
    debug_assert!(!word.is_empty());
    if let Some(m) = small_moduli(word) {
        return m.norms();
    }
    if word.len() <= EXACT_LEN_CAP {
        if let Some(m) = big_moduli(word) {
            return m.norms();
        }
    }
    float_moduli(word).norms()
}

/// Real continued fractions act on [0, 1]: sup is 1/q_n^2, inf 1/(q_n + q_{n-1})^2.
pub(crate) fn interval_norms(word: &[u64]) -> DiskNorms {
    let (mut p, mut q) = (1.0f64, word[0] as f64);
    let mut log_scale = 0.0;
    for &a in &word[1..] {
        let next = a as f64 * q + p;
        p = q;
        q = next;
        if q > 1e150 {
            p /= 1e150;
            q /= 1e150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    let scale = (-2.0 * log_scale).exp();
    DiskNorms { sup: scale / (q * q), inf: scale / ((q + p) * (q + p)) }
}

fn small_moduli(word: &[GaussianLetter]) -> Option<Moduli> {
    let (mut pr, mut pi) = (1i128, 0i128);
    let (mut qr, mut qi) = (word[0].m() as i128, word[0].n() as i128);
    for w in &word[1..] {
        let (wr, wi) = (w.m() as i128, w.n() as i128);
        let nr = wr.checked_mul(qr)?.checked_sub(wi.checked_mul(qi)?)?.checked_add(pr)?;
        let ni = wr.checked_mul(qi)?.checked_add(wi.checked_mul(qr)?)?.checked_add(pi)?;
        (pr, pi) = (qr, qi);
        (qr, qi) = (nr, ni);
    }
    let ar = qr.checked_mul(2)?.checked_add(pr)?;
    let ai = qi.checked_mul(2)?.checked_add(pi)?;
    let a2 = ar.checked_mul(ar)?.checked_add(ai.checked_mul(ai)?)?;
    let b2 = pr.checked_mul(pr)?.checked_add(pi.checked_mul(pi)?)?;
    let num = a2.checked_sub(b2)?;
    Some(Moduli {
        num: num as f64,
        a_abs: (a2 as f64).sqrt(),
        b_abs: (b2 as f64).sqrt(),
        log_scale: 0.0,
    })
}

fn big_moduli(word: &[GaussianLetter]) -> Option<Moduli> {
    let (mut pr, mut pi) = (BigInt::from(1), BigInt::from(0));
    let (mut qr, mut qi) = (BigInt::from(word[0].m()), BigInt::from(word[0].n()));
    for w in &word[1..] {
        let (wr, wi) = (BigInt::from(w.m()), BigInt::from(w.n()));
        let nr = &wr * &qr - &wi * &qi + &pr;
        let ni = &wr * &qi + &wi * &qr + &pi;
        pr = std::mem::replace(&mut qr, nr);
        pi = std::mem::replace(&mut qi, ni);
    }
    let ar: BigInt = &qr * 2 + &pr;
    let ai: BigInt = &qi * 2 + &pi;
    let a2 = &ar * &ar + &ai * &ai;
    let b2 = &pr * &pr + &pi * &pi;
    let num = &a2 - &b2;
    // Divide out a power of two so the conversions stay finite.
    let bits = a2.bits().saturating_sub(900);
    let shift = bits - bits % 2;
    let num = (num >> shift).to_f64()?;
    let a2 = (a2 >> shift).to_f64()?;
    let b2 = (b2 >> shift).to_f64()?;
    if !(num.is_finite() && a2.is_finite()) || num <= 0.0 {
        return None;
    }
    Some(Moduli {
        num,
        a_abs: a2.sqrt(),
        b_abs: b2.sqrt(),
        log_scale: (shift / 2) as f64 * std::f64::consts::LN_2,
    })
}

fn float_moduli(word: &[GaussianLetter]) -> Moduli {
    let (mut pr, mut pi) = (1.0f64, 0.0f64);
    let (mut qr, mut qi) = (word[0].m() as f64, word[0].n() as f64);
    let mut log_scale = 0.0;
    for w in &word[1..] {
        let (wr, wi) = (w.m() as f64, w.n() as f64);
        let nr = wr * qr - wi * qi + pr;
        let ni = wr * qi + wi * qr + pi;
        (pr, pi) = (qr, qi);
        (qr, qi) = (nr, ni);
        let mag = qr.abs().max(qi.abs());
        if mag > 1e100 {
            for x in [&mut pr, &mut pi, &mut qr, &mut qi] {
                *x /= 1e100;
            }
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    // |a|^2 - |b|^2 = 4 (|q|^2 + Re(q conj p)).
    let num = 4.0 * (qr * qr + qi * qi + qr * pr + qi * pi);
    let (ar, ai) = (2.0 * qr + pr, 2.0 * qi + pi);
    Moduli { num, a_abs: ar.hypot(ai), b_abs: pr.hypot(pi), log_scale }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[(i64, i64)]) -> Vec<GaussianLetter> {
        letters.iter().map(|&(m, n)| GaussianLetter::new(m, n).unwrap()).collect()
    }

    #[test]
    fn exact_paths_agree_with_float_path() {
        let word = w(&[(3, -2), (1, 1), (5, 4), (2, 0), (1, -1)]);
        let a = small_moduli(&word).unwrap().norms();
        let b = big_moduli(&word).unwrap().norms();
        let c = float_moduli(&word).norms();
        assert!((a.sup / b.sup - 1.0).abs() < 1e-14);
        assert!((a.sup / c.sup - 1.0).abs() < 1e-12);
        assert!((a.inf / c.inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn big_path_handles_i128_overflow() {
        let word: Vec<_> = (0..20).map(|k| GaussianLetter::new(1000 + k, 999 - k).unwrap()).collect();
        assert!(small_moduli(&word).is_none());
        let b = big_moduli(&word).unwrap().norms();
        let c = float_moduli(&word).norms();
        assert!((b.sup.ln() / c.sup.ln() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interval_norms_match_hand_values() {
        // [1, 1]: q = 2, p = 1.
        let d = interval_norms(&[1, 1]);
        assert_eq!(d.sup, 0.25);
        assert_eq!(d.inf, 1.0 / 9.0);
    }
}
