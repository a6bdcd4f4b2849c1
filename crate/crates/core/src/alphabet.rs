//! Letters, letter sets and the natural ordering of an alphabet.
//!
//! The natural ordering lists letters by non-increasing derivative norm. For
//! the complex continued fraction system the norm is a strictly decreasing
//! function of the integer key `(2m+1)^2 + 4n^2`, so the ordering is computed
//! exactly; ties are broken by ascending `m`, then ascending `|n|`, then
//! `n > 0` before `n < 0`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::systems::{SystemDescriptor, SystemKind};

/// A letter `m + ni` with `m >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianLetter {
    m: i64,
    n: i64,
}

impl GaussianLetter {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidLetter { m, n });
        }
        Ok(Self { m, n })
    }

    /// Letter `k + 0i`, used for indexed alphabets.
    pub fn index(k: usize) -> Self {
        assert!(k >= 1, "letter indices are 1-based");
        Self { m: k as i64, n: 0 }
    }

    pub fn m(self) -> i64 {
        self.m
    }

    pub fn n(self) -> i64 {
        self.n
    }

    pub fn conj(self) -> Self {
        Self { m: self.m, n: -self.n }
    }

    /// `(2m+1)^2 + 4n^2`, the exact ordering key of the complex system.
    pub fn cf_key(self) -> u128 {
        let a = 2 * self.m as i128 + 1;
        let b = 2 * self.n as i128;
        (a * a + b * b) as u128
    }

    /// `m^2 + m + n^2`, the reciprocal ratio of the linearized system.
    pub fn linear_key(self) -> u128 {
        let (m, n) = (self.m as i128, self.n as i128);
        (m * m + m + n * n) as u128
    }

    /// Chebyshev radius `max(m, |n|)`.
    pub fn shell(self) -> u64 {
        self.m.unsigned_abs().max(self.n.unsigned_abs())
    }

    fn tie_break(self) -> (i64, u64, u8) {
        (self.m, self.n.unsigned_abs(), u8::from(self.n < 0))
    }
}

impl fmt::Display for GaussianLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.n {
            0 => write!(f, "{}", self.m),
            n if n > 0 => write!(f, "{}+{}i", self.m, n),
            n => write!(f, "{}-{}i", self.m, -n),
        }
    }
}

impl FromStr for GaussianLetter {
    type Err = Error;

    /// Accepts `m`, `m+ni`, `m-ni`, `m+i` and `m-i`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParseLetter(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = t.strip_suffix('i') else {
            let m = t.parse().map_err(|_| err())?;
            return Self::new(m, 0);
        };
        let split = body.rfind(['+', '-']).filter(|&p| p > 0).ok_or_else(err)?;
        let m: i64 = body[..split].parse().map_err(|_| err())?;
        let coeff = &body[split + 1..];
        let mag: i64 = if coeff.is_empty() { 1 } else { coeff.parse().map_err(|_| err())? };
        let n = if &body[split..=split] == "-" { -mag } else { mag };
        Self::new(m, n)
    }
}

impl Serialize for GaussianLetter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GaussianLetter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered set of letters, serialized as a JSON array of strings.
#[derive(Debug, Clone, Default)]
pub struct LetterSet {
    letters: Vec<GaussianLetter>,
    lookup: BTreeSet<GaussianLetter>,
}

impl PartialEq for LetterSet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for LetterSet {}

impl Serialize for LetterSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.letters.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LetterSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Self::from_letters(Vec::<GaussianLetter>::deserialize(d)?))
    }
}

impl LetterSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the first occurrence of each letter.
    pub fn from_letters(letters: impl IntoIterator<Item = GaussianLetter>) -> Self {
        let mut s = Self::new();
        for e in letters {
            s.insert(e);
        }
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: Vec<GaussianLetter> = serde_json::from_str(s)?;
        Ok(Self::from_letters(raw))
    }

    /// Returns false if the letter was already present.
    pub fn insert(&mut self, e: GaussianLetter) -> bool {
        if self.lookup.insert(e) {
            self.letters.push(e);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, e: GaussianLetter) -> bool {
        self.lookup.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = GaussianLetter> + '_ {
        self.letters.iter().copied()
    }

    pub fn as_slice(&self) -> &[GaussianLetter] {
        &self.letters
    }

    pub fn with(&self, e: GaussianLetter) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    /// Closure under complex conjugation.
    pub fn is_conjugate_closed(&self) -> bool {
        self.iter().all(|e| self.contains(e.conj()))
    }

    pub fn max_shell(&self) -> u64 {
        self.iter().map(GaussianLetter::shell).max().unwrap_or(0)
    }

    /// Same letters, order ignored.
    pub fn same_letters(&self, other: &LetterSet) -> bool {
        self.len() == other.len() && self.iter().all(|e| other.contains(e))
    }
}

impl FromIterator<GaussianLetter> for LetterSet {
    fn from_iter<I: IntoIterator<Item = GaussianLetter>>(iter: I) -> Self {
        Self::from_letters(iter)
    }
}

/// Total order key for the natural ordering of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OrderKey {
    primary: u128,
    tie: (i64, u64, u8),
}

pub(crate) fn order_key(system: &SystemDescriptor, e: GaussianLetter) -> OrderKey {
    let primary = match system.kind {
        SystemKind::ComplexCf => e.cf_key(),
        SystemKind::LinearizedCf => e.linear_key(),
        _ => e.m() as u128,
    };
    OrderKey { primary, tie: e.tie_break() }
}

/// Initial segment built from the nonnegative quadrant and its conjugates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeBlock {
    pub k: usize,
    /// `|I~_k|`.
    pub n_k: usize,
    pub letters: LetterSet,
    /// Whether `I~_k` equals the initial block `I(n_k)`.
    pub is_initial_block: bool,
}

#[derive(Debug, Default)]
struct Cache {
    letters: Vec<GaussianLetter>,
    /// Every letter with primary key at most `frontier` is cached.
    frontier: u128,
}

/// The letters of a system (minus an optional excluded set) in natural order.
#[derive(Debug)]
pub struct OrderedAlphabet {
    system: SystemDescriptor,
    excluded: LetterSet,
    /// Natural order of a finite indexed system.
    finite_order: Option<Vec<GaussianLetter>>,
    cache: RwLock<Cache>,
}

impl Clone for OrderedAlphabet {
    fn clone(&self) -> Self {
        Self::with_excluded(self.system.clone(), self.excluded.clone())
    }
}

impl OrderedAlphabet {
    pub fn new(system: SystemDescriptor) -> Self {
        Self::with_excluded(system, LetterSet::new())
    }

    pub fn with_excluded(system: SystemDescriptor, excluded: LetterSet) -> Self {
        let finite_order = match &system.kind {
            SystemKind::SimilarityIfs { ratios } | SystemKind::FiniteGdms { ratios, .. } => {
                let mut idx: Vec<usize> = (1..=ratios.len()).collect();
                // Stable: equal ratios keep their index order.
                idx.sort_by(|&a, &b| ratios[b - 1].total_cmp(&ratios[a - 1]));
                Some(
                    idx.into_iter()
                        .map(GaussianLetter::index)
                        .filter(|e| !excluded.contains(*e))
                        .collect(),
                )
            }
            _ => None,
        };
        Self { system, excluded, finite_order, cache: RwLock::new(Cache::default()) }
    }

    pub fn system(&self) -> &SystemDescriptor {
        &self.system
    }

    pub fn excluded(&self) -> &LetterSet {
        &self.excluded
    }

    pub fn contains(&self, e: GaussianLetter) -> bool {
        self.system.contains(e) && !self.excluded.contains(e)
    }

    pub fn len(&self) -> Option<usize> {
        self.finite_order.as_ref().map(Vec::len)
    }

    pub fn key(&self, e: GaussianLetter) -> OrderKey {
        match &self.finite_order {
            Some(order) => OrderKey {
                primary: order.iter().position(|&x| x == e).unwrap_or(usize::MAX) as u128,
                tie: e.tie_break(),
            },
            None => order_key(&self.system, e),
        }
    }

    /// The first `count` letters.
    pub fn prefix(&self, count: usize) -> Result<Vec<GaussianLetter>> {
        if let Some(order) = &self.finite_order {
            if count > order.len() {
                return Err(Error::AlphabetExhausted { requested: count, available: order.len() });
            }
            return Ok(order[..count].to_vec());
        }
        self.ensure(count);
        Ok(self.cache.read().unwrap().letters[..count].to_vec())
    }

    /// The `k`-th letter, 1-based.
    pub fn letter(&self, k: usize) -> Result<GaussianLetter> {
        if k == 0 {
            return Err(Error::InvalidParameter("letter positions are 1-based".into()));
        }
        if let Some(order) = &self.finite_order {
            return order
                .get(k - 1)
                .copied()
                .ok_or(Error::AlphabetExhausted { requested: k, available: order.len() });
        }
        self.ensure(k);
        Ok(self.cache.read().unwrap().letters[k - 1])
    }

    /// Initial block `I(k)`.
    pub fn initial_block(&self, k: usize) -> Result<LetterSet> {
        Ok(LetterSet::from_letters(self.prefix(k)?))
    }

    /// 1-based position of `e` in the ordering.
    pub fn position(&self, e: GaussianLetter) -> Result<usize> {
        if !self.contains(e) {
            return Err(Error::LetterNotInSystem(e));
        }
        if let Some(order) = &self.finite_order {
            return Ok(order.iter().position(|&x| x == e).unwrap() + 1);
        }
        let key = self.key(e);
        let mut want = 1;
        loop {
            self.ensure(want);
            let cache = self.cache.read().unwrap();
            let slice = &cache.letters[..];
            if let Some(p) = slice.iter().position(|&x| x == e) {
                return Ok(p + 1);
            }
            debug_assert!(self.key(*slice.last().unwrap()) < key);
            want = slice.len() * 2;
        }
    }

    /// Next letter after `e` in the ordering, `None` past the end of a finite alphabet.
    pub fn successor(&self, e: GaussianLetter) -> Result<Option<GaussianLetter>> {
        let k = self.position(e)?;
        match self.letter(k + 1) {
            Ok(next) => Ok(Some(next)),
            Err(Error::AlphabetExhausted { .. }) => Ok(None),
            Err(other) => Err(other),
        }
    }

    /// All letters whose primary key is at most `primary_max`, in order.
    pub fn letters_up_to_key(&self, primary_max: u128) -> Vec<GaussianLetter> {
        if let Some(order) = &self.finite_order {
            return order.iter().copied().filter(|&e| self.key(e).primary <= primary_max).collect();
        }
        self.extend_to(primary_max);
        let cache = self.cache.read().unwrap();
        let end = cache.letters.partition_point(|&e| self.key(e).primary <= primary_max);
        cache.letters[..end].to_vec()
    }

    /// `I~_k`: the first `k` letters with `n >= 0` in the natural order of the
    /// full system, together with their conjugates.
    pub fn tilde_block(&self, k: usize) -> Result<TildeBlock> {
        if !self.system.is_grid() {
            return Err(Error::Unsupported { system: self.system.name().into(), what: "tilde blocks".into() });
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        let full = OrderedAlphabet::new(self.system.clone());
        let mut base = Vec::with_capacity(k);
        let mut pos = 1;
        while base.len() < k {
            let e = full.letter(pos)?;
            if e.n() >= 0 {
                base.push(e);
            }
            pos += 1;
        }
        let letters: LetterSet = base.iter().flat_map(|&e| [e, e.conj()]).collect();
        let n_k = letters.len();
        let is_initial_block = full.initial_block(n_k)?.same_letters(&letters);
        Ok(TildeBlock { k, n_k, letters, is_initial_block })
    }

    fn ensure(&self, count: usize) {
        loop {
            let (have, frontier) = {
                let c = self.cache.read().unwrap();
                (c.letters.len(), c.frontier)
            };
            if have >= count {
                return;
            }
            let next = frontier.max(16).saturating_mul(2);
            self.extend_to(next);
        }
    }

    /// Caches every letter with primary key at most `frontier`.
    fn extend_to(&self, frontier: u128) {
        let mut cache = self.cache.write().unwrap();
        if cache.frontier >= frontier {
            return;
        }
        let lo = cache.frontier;
        let mut fresh = annulus(&self.system, lo, frontier);
        fresh.retain(|e| !self.excluded.contains(*e));
        fresh.sort_unstable_by_key(|&e| self.key(e));
        cache.letters.extend(fresh);
        cache.frontier = frontier;
    }
}

fn isqrt(x: u128) -> u128 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Letters with `lo < primary key <= hi`.
fn annulus(system: &SystemDescriptor, lo: u128, hi: u128) -> Vec<GaussianLetter> {
    let mut out = Vec::new();
    match system.kind {
        SystemKind::ComplexCf => {
            // (2m+1)^2 + 4n^2 in (lo, hi]
            let mut m: u128 = 1;
            while (2 * m + 1) * (2 * m + 1) <= hi {
                let a = (2 * m + 1) * (2 * m + 1);
                let n_hi = isqrt((hi - a) / 4);
                let n_lo = if lo < a { 0 } else { isqrt((lo - a) / 4) + 1 };
                for n in n_lo..=n_hi {
                    if a + 4 * n * n > lo {
                        push_pair(&mut out, m, n);
                    }
                }
                m += 1;
            }
        }
        SystemKind::LinearizedCf => {
            let mut m: u128 = 1;
            while m * m + m <= hi {
                let a = m * m + m;
                let n_hi = isqrt(hi - a);
                let n_lo = if lo < a { 0 } else { isqrt(lo - a) + 1 };
                for n in n_lo..=n_hi {
                    if a + n * n > lo {
                        push_pair(&mut out, m, n);
                    }
                }
                m += 1;
            }
        }
        _ => {
            for k in lo + 1..=hi {
                out.push(GaussianLetter::index(k as usize));
            }
        }
    }
    out
}

fn push_pair(out: &mut Vec<GaussianLetter>, m: u128, n: u128) {
    let (m, n) = (m as i64, n as i64);
    out.push(GaussianLetter { m, n });
    if n != 0 {
        out.push(GaussianLetter { m, n: -n });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: i64, n: i64) -> GaussianLetter {
        GaussianLetter::new(m, n).unwrap()
    }

    #[test]
    fn display_and_parse_round_trip() {
        for (m, n, s) in [(1, 0, "1"), (2, 3, "2+3i"), (4, -1, "4-1i")] {
            assert_eq!(g(m, n).to_string(), s);
            assert_eq!(s.parse::<GaussianLetter>().unwrap(), g(m, n));
        }
        assert_eq!("1+i".parse::<GaussianLetter>().unwrap(), g(1, 1));
        assert_eq!("3 - i".parse::<GaussianLetter>().unwrap(), g(3, -1));
        assert!("0+1i".parse::<GaussianLetter>().is_err());
        assert!("x".parse::<GaussianLetter>().is_err());
    }

    #[test]
    fn rejects_nonpositive_real_part() {
        assert!(matches!(GaussianLetter::new(0, 2), Err(Error::InvalidLetter { .. })));
    }

    #[test]
    fn complex_order_starts_as_expected() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let got: Vec<String> = a.prefix(9).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(got, ["1", "1+1i", "1-1i", "1+2i", "1-2i", "2", "2+1i", "2-1i", "2+2i"]);
    }

    #[test]
    fn order_matches_brute_force() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let mut brute: Vec<_> = (1..=60).flat_map(|m| (-60..=60).map(move |n| g(m, n))).collect();
        brute.sort_by_key(|&e| (e.cf_key(), e.tie_break()));
        let cutoff = g(30, 0).cf_key();
        brute.retain(|e| e.cf_key() <= cutoff);
        assert_eq!(a.prefix(brute.len()).unwrap(), brute);
    }

    #[test]
    fn excluded_letters_are_skipped() {
        let s = SystemDescriptor::complex_cf();
        let ex = LetterSet::from_letters([g(1, 0), g(1, 1), g(1, -1)]);
        let a = OrderedAlphabet::with_excluded(s, ex);
        assert_eq!(a.letter(1).unwrap(), g(1, 2));
        assert!(a.position(g(1, 0)).is_err());
    }

    #[test]
    fn tilde_blocks_are_initial_blocks() {
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        for (k, n) in [(2, 3), (9, 15), (10, 17), (16, 28)] {
            let b = a.tilde_block(k).unwrap();
            assert_eq!(b.n_k, n);
            assert!(b.is_initial_block, "k = {k}");
        }
    }

    #[test]
    fn finite_order_sorts_by_ratio() {
        let s = SystemDescriptor::similarity(vec![0.1, 0.5, 0.3]).unwrap();
        let a = OrderedAlphabet::new(s);
        assert_eq!(a.prefix(3).unwrap(), vec![GaussianLetter::index(2), GaussianLetter::index(3), GaussianLetter::index(1)]);
        assert!(matches!(a.letter(4), Err(Error::AlphabetExhausted { .. })));
        assert_eq!(a.successor(GaussianLetter::index(1)).unwrap(), None);
    }

    #[test]
    fn letter_set_json() {
        let s = LetterSet::from_json_str(r#"["1", "1+i", "1-1i", "1"]"#).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.is_conjugate_closed());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"["1","1+1i","1-1i"]"#);
    }
}
