//! Certified lower bounds for the Bowen parameter from a discretized
//! transfer operator.
//!
//! `X = B(1/2, 1/2)` is covered by a `p x p` grid on `[0,1] x [-1/2,1/2]`. For
//! a nonnegative step function `g = sum v_c 1_c`, each source cell `c'` gets a
//! lower bound `(Mv)_{c'} <= inf_{z in c'} (L_t g)(z)`. If `Mv >= lambda v` on
//! the support of `v` then `L_t g >= lambda g`, so `rho(L_t) >= lambda`.

use serde::{Deserialize, Serialize};

use crate::alphabet::{GaussianLetter, OrderedAlphabet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::systems::{SystemDescriptor, SystemKind};

/// Relative downward slack applied to every weight.
const WEIGHT_SLACK: f64 = 8.0 * f64::EPSILON;
/// Images spanning more cells than this per axis are dropped.
const MAX_SPAN: usize = 4;

/// Treatment of a letter whose cell image meets several cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StraddleRule {
    /// Drop the contribution.
    Drop,
    /// Credit the weight times the minimum of `v` over the cells met.
    #[default]
    MinOverCells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorGrid {
    pub p: usize,
    /// `(i, j)` of each active cell, row-major.
    pub active: Vec<(u16, u16)>,
    index: Vec<u32>,
}

impl OperatorGrid {
    const INACTIVE: u32 = u32::MAX;

    /// Cells whose closed square meets `X`.
    pub fn new(p: usize) -> Result<Self> {
        if !(2..=u16::MAX as usize).contains(&p) {
            return Err(Error::InvalidParameter(format!("grid size p = {p} must lie in [2, 65535]")));
        }
        let h = 1.0 / p as f64;
        let mut active = Vec::new();
        let mut index = vec![Self::INACTIVE; p * p];
        for i in 0..p {
            for j in 0..p {
                let (x0, y0) = (i as f64 * h, j as f64 * h - 0.5);
                let dx = (0.5f64).clamp(x0, x0 + h) - 0.5;
                let dy = 0f64.clamp(y0, y0 + h);
                if dx * dx + dy * dy <= 0.25 {
                    index[i * p + j] = active.len() as u32;
                    active.push((i as u16, j as u16));
                }
            }
        }
        Ok(Self { p, active, index })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.p as f64
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    fn cell(&self, i: usize, j: usize) -> Option<u32> {
        let k = self.index[i * self.p + j];
        (k != Self::INACTIVE).then_some(k)
    }

    /// Index range of the cells meeting `[lo, hi]` along one axis.
    fn span(&self, lo: f64, hi: f64) -> (usize, usize) {
        let p = self.p as f64;
        let a = (lo * p).floor().clamp(0.0, p - 1.0) as usize;
        let b = (hi * p).floor().clamp(0.0, p - 1.0) as usize;
        (a, b)
    }
}

/// A cell rectangle `[i0, i1] x [j0, j1]` of target cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Rect([u16; 4]);

/// Monotone, positively homogeneous lower operator on step functions.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerMatrix {
    pub size: usize,
    /// Per source cell: `(target, weight)`, merged by target.
    pub linear: Vec<Vec<(u32, f64)>>,
    /// Per source cell: weights credited with the minimum over a rectangle.
    straddle: Vec<Vec<(Rect, f64)>>,
    grid: Option<OperatorGrid>,
    pub stats: AssemblyStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyStats {
    pub contained: usize,
    pub straddling: usize,
    pub dropped: usize,
}

impl LowerMatrix {
    /// Plain nonnegative matrix: `(Mv)_i = sum_j m[i][j] v_j`.
    pub fn from_dense(m: &[Vec<f64>]) -> Result<Self> {
        let size = m.len();
        if m.iter().any(|r| r.len() != size || r.iter().any(|x| !(*x >= 0.0))) {
            return Err(Error::InvalidParameter("matrix must be square and nonnegative".into()));
        }
        let linear = m
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(j, &x)| (j as u32, x)).collect())
            .collect();
        Ok(Self { size, linear, straddle: vec![Vec::new(); size], grid: None, stats: AssemblyStats::default() })
    }

    pub fn nonzeros(&self) -> usize {
        self.linear.iter().map(Vec::len).sum::<usize>() + self.straddle.iter().map(Vec::len).sum::<usize>()
    }

    fn row_len(&self, i: usize) -> usize {
        self.linear[i].len() + self.straddle[i].len()
    }

    fn rect_min(&self, r: Rect, v: &[f64]) -> f64 {
        let g = self.grid.as_ref().expect("straddle entries need a grid");
        let [i0, i1, j0, j1] = r.0;
        let mut best = f64::INFINITY;
        for i in i0..=i1 {
            for j in j0..=j1 {
                if let Some(k) = g.cell(i as usize, j as usize) {
                    best = best.min(v[k as usize]);
                }
            }
        }
        if best.is_finite() { best } else { 0.0 }
    }

    /// `M v`, rounded down.
    pub fn apply(&self, v: &[f64], exec: Exec) -> Vec<f64> {
        exec.map_range(self.size, |i| {
            let mut s: f64 = self.linear[i].iter().map(|&(j, w)| w * v[j as usize]).sum();
            s += self.straddle[i].iter().map(|&(r, w)| w * self.rect_min(r, v)).sum::<f64>();
            s * (1.0 - (self.row_len(i) as f64 + 2.0) * f64::EPSILON)
        })
    }
}

/// `inf_{z in cell} |e + z|^{-2t}`, attained at the far corner.
fn cell_weight(e: GaussianLetter, x1: f64, y0: f64, y1: f64, t: f64) -> f64 {
    let (m, n) = (e.m() as f64, e.n() as f64);
    let re = m + x1;
    let im = (n + y0).abs().max((n + y1).abs());
    (re * re + im * im).powf(-t) * (1.0 - WEIGHT_SLACK)
}

/// Assembles the lower operator at exponent `t` from the first `letter_cut`
/// letters of `alphabet`. Letters beyond the cut are dropped.
pub fn build_lower_matrix(
    alphabet: &OrderedAlphabet,
    t: f64,
    p: usize,
    letter_cut: usize,
    rule: StraddleRule,
    exec: Exec,
) -> Result<LowerMatrix> {
    if letter_cut == 0 {
        return Err(Error::InvalidParameter("letter_cut must be positive".into()));
    }
    let cut = alphabet.len().map_or(letter_cut, |n| n.min(letter_cut));
    let letters = alphabet.prefix(cut)?;
    build_lower_matrix_from(alphabet.system(), &letters, t, p, rule, exec)
}

/// Same as [`build_lower_matrix`] for an explicit finite letter list.
pub fn build_lower_matrix_from(
    system: &SystemDescriptor,
    letters: &[GaussianLetter],
    t: f64,
    p: usize,
    rule: StraddleRule,
    exec: Exec,
) -> Result<LowerMatrix> {
    if letters.is_empty() || !(t >= 0.0) {
        return Err(Error::InvalidParameter("need a nonempty letter list and t >= 0".into()));
    }
    if let Some(&e) = letters.iter().find(|&&e| !system.contains(e)) {
        return Err(Error::LetterNotInSystem(e));
    }
    let cut = letters.len();
    match system.kind {
        SystemKind::SimilarityIfs { .. } | SystemKind::SimilarityFamily { .. } => {
            // Constants are eigenfunctions: one cell carries the exact action.
            let w: f64 = letters.iter().map(|&e| system.deriv_norm_unchecked(e).powf(t) * (1.0 - WEIGHT_SLACK)).sum();
            let mut m = LowerMatrix::from_dense(&[vec![w * (1.0 - cut as f64 * f64::EPSILON)]])?;
            m.stats.contained = cut;
            return Ok(m);
        }
        SystemKind::ComplexCf => {}
        _ => return Err(Error::Unsupported { system: system.name().into(), what: "transfer operator bounds".into() }),
    }
    let grid = OperatorGrid::new(p)?;
    let h = grid.h();
    let r = h * std::f64::consts::FRAC_1_SQRT_2;
    let rows = exec.map_range(grid.len(), |c| {
        let (i, j) = grid.active[c];
        let (x0, y0) = (i as f64 * h, j as f64 * h - 0.5);
        let (cx, cy) = (x0 + h / 2.0, y0 + h / 2.0);
        let mut stats = AssemblyStats::default();
        let mut lin: Vec<(u32, f64)> = Vec::new();
        let mut strad: Vec<(Rect, f64)> = Vec::new();
        for &e in letters {
            // 1/(w + z) maps B(w, r) onto B(conj(w) / D, r / D), D = |w|^2 - r^2.
            let (wr, wi) = (e.m() as f64 + cx, e.n() as f64 + cy);
            let d = wr * wr + wi * wi - r * r;
            let (ix, iy, ir) = (wr / d, -wi / d, r / d * (1.0 + 1e-12) + 1e-15);
            let (a0, a1) = grid.span(ix - ir, ix + ir);
            let (b0, b1) = grid.span(iy - ir + 0.5, iy + ir + 0.5);
            let w = cell_weight(e, x0 + h, y0, y0 + h, t);
            if a0 == a1 && b0 == b1 {
                if let Some(k) = grid.cell(a0, b0) {
                    lin.push((k, w));
                    stats.contained += 1;
                } else {
                    stats.dropped += 1;
                }
            } else if rule == StraddleRule::MinOverCells && a1 - a0 < MAX_SPAN && b1 - b0 < MAX_SPAN {
                strad.push((Rect([a0 as u16, a1 as u16, b0 as u16, b1 as u16]), w));
                stats.straddling += 1;
            } else {
                stats.dropped += 1;
            }
        }
        (merge(lin), merge(strad), stats)
    });
    let mut m = LowerMatrix {
        size: grid.len(),
        linear: Vec::with_capacity(rows.len()),
        straddle: Vec::with_capacity(rows.len()),
        grid: None,
        stats: AssemblyStats::default(),
    };
    for (lin, strad, s) in rows {
        m.linear.push(lin);
        m.straddle.push(strad);
        m.stats.contained += s.contained;
        m.stats.straddling += s.straddling;
        m.stats.dropped += s.dropped;
    }
    m.grid = Some(grid);
    if m.nonzeros() == 0 {
        return Err(Error::InvalidParameter(format!("grid p = {p} is too coarse: no letter contributes")));
    }
    Ok(m)
}

fn merge<K: Ord + Copy>(mut v: Vec<(K, f64)>) -> Vec<(K, f64)> {
    v.sort_by_key(|a| a.0);
    let mut out: Vec<(K, f64)> = Vec::with_capacity(v.len());
    for (k, w) in v {
        match out.last_mut() {
            Some((last, acc)) if *last == k => *acc += w,
            _ => out.push((k, w)),
        }
    }
    for e in &mut out {
        e.1 *= 1.0 - 64.0 * f64::EPSILON;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwBound {
    /// Best Collatz–Wielandt value over all iterates.
    pub value: f64,
    /// Iterate at which the best value was attained.
    pub best_iteration: usize,
    pub iterations: usize,
}

/// `max_k min_{i : v_k(i) > 0} (M v_k)_i / v_k(i)` over power iterates
/// `v_{k+1} = M v_k / |M v_k|_inf`.
pub fn cw_lower_bound(m: &LowerMatrix, iters: usize, v0: &[f64], exec: Exec) -> Result<CwBound> {
    if v0.len() != m.size || v0.iter().any(|x| !(*x >= 0.0)) || !v0.iter().any(|&x| x > 0.0) {
        return Err(Error::InvalidParameter("start vector must be nonnegative, nonzero and sized to the matrix".into()));
    }
    let mut v = v0.to_vec();
    let mut best = CwBound { value: 0.0, best_iteration: 0, iterations: 0 };
    for k in 0..=iters {
        let mv = m.apply(&v, exec);
        let cw = v
            .iter()
            .zip(&mv)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| y / x * (1.0 - 2.0 * f64::EPSILON))
            .fold(f64::INFINITY, f64::min);
        best.iterations = k;
        if cw > best.value {
            best.value = cw;
            best.best_iteration = k;
        }
        let norm = mv.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 || k == iters {
            break;
        }
        v = mv.into_iter().map(|x| x / norm).collect();
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub p: usize,
    pub letter_cut: usize,
    pub iters: usize,
    pub rule: StraddleRule,
    /// Required excess of the bound over 1.
    pub margin: f64,
    pub exec: Exec,
}

impl Default for TransferParams {
    fn default() -> Self {
        Self { p: 64, letter_cut: 2000, iters: 200, rule: StraddleRule::default(), margin: 1e-9, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimLowerReport {
    pub t: f64,
    pub params: TransferParams,
    pub cells: usize,
    pub cw: CwBound,
    pub stats: AssemblyStats,
    /// `cw - 1`.
    pub margin: f64,
    /// Certified `h >= t`; otherwise inconclusive.
    pub certified: bool,
}

/// Certifies `h >= t` when the Collatz–Wielandt bound reaches `1 + margin`.
/// Rounding is already folded into the bound.
pub fn certify_dim_lower(alphabet: &OrderedAlphabet, t: f64, params: &TransferParams) -> Result<DimLowerReport> {
    let m = build_lower_matrix(alphabet, t, params.p, params.letter_cut, params.rule, params.exec)?;
    report(m, t, params)
}

/// [`certify_dim_lower`] for the subsystem on an explicit letter list; `letter_cut` is ignored.
pub fn certify_dim_lower_from(
    system: &SystemDescriptor,
    letters: &[GaussianLetter],
    t: f64,
    params: &TransferParams,
) -> Result<DimLowerReport> {
    let m = build_lower_matrix_from(system, letters, t, params.p, params.rule, params.exec)?;
    report(m, t, params)
}

fn report(m: LowerMatrix, t: f64, params: &TransferParams) -> Result<DimLowerReport> {
    let cw = cw_lower_bound(&m, params.iters, &vec![1.0; m.size], params.exec)?;
    Ok(DimLowerReport {
        t,
        params: params.clone(),
        cells: m.size,
        margin: cw.value - 1.0,
        certified: cw.value > 1.0 + params.margin,
        stats: m.stats,
        cw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemDescriptor;

    #[test]
    fn two_by_two_perron_root() {
        let m = LowerMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let b = cw_lower_bound(&m, 50, &[1.0, 0.3], Exec::Sequential).unwrap();
        assert!((b.value - 3.0).abs() < 1e-9 && b.value <= 3.0);
        let b1 = cw_lower_bound(&m, 1, &[1.0, 0.3], Exec::Sequential).unwrap();
        assert!(b1.value <= b.value);
    }

    #[test]
    fn single_ratio_in_one_step() {
        let m = LowerMatrix::from_dense(&[vec![0.3f64.powf(1.5)]]).unwrap();
        let b = cw_lower_bound(&m, 0, &[2.0], Exec::Sequential).unwrap();
        assert!((b.value - 0.3f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn two_halves_at_one() {
        let a = OrderedAlphabet::new(SystemDescriptor::similarity(vec![0.5, 0.5]).unwrap());
        let r = certify_dim_lower(&a, 1.0, &TransferParams::default()).unwrap();
        assert!((r.cw.value - 1.0).abs() < 1e-14 && r.cw.value <= 1.0);
        assert!(!r.certified);
    }

    #[test]
    fn grid_covers_the_disk() {
        let g = OperatorGrid::new(16).unwrap();
        assert!(g.len() > 16 * 16 * 3 / 4);
        assert!(g.len() < 16 * 16);
    }

    #[test]
    fn full_system_small_grid_is_sound_below_one() {
        // h > 1.8, so t = 1.2 must certify once the grid is fine enough.
        let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
        let p = TransferParams { p: 16, letter_cut: 200, iters: 60, ..TransferParams::default() };
        let r = certify_dim_lower(&a, 1.2, &p).unwrap();
        assert!(r.certified, "{r:?}");
    }
}
