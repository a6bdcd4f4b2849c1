use serde::{Deserialize, Serialize};

/// Collatz-Wielandt bracket for the Perron root of a nonnegative matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Brackets the spectral radius of `M[i][j] = adj[i][j] * w[j]`.
///
/// For every positive vector v, `min (Mv)_i / v_i <= rho(M) <= max (Mv)_i / v_i`.
/// The vector is refined by power iteration and the best bounds seen are kept.
pub fn spectral_radius_bracket(adj: &[Vec<bool>], w: &[f64], max_iter: usize) -> SpectralBracket {
    let d = w.len();
    if is_nilpotent(adj, w) {
        return SpectralBracket { lower: 0.0, upper: 0.0, iterations: 0 };
    }
    let mut v = vec![1.0; d];
    let mut lower: f64 = 0.0;
    let mut upper = f64::INFINITY;
    // Row sums carry at most d roundings.
    let rel = 4.0 * (d as f64 + 1.0) * f64::EPSILON;
    let mut iterations = 0;
    for it in 0..max_iter.max(1) {
        iterations = it + 1;
        let mv: Vec<f64> = (0..d)
            .map(|i| (0..d).filter(|&j| adj[i][j]).map(|j| w[j] * v[j]).sum())
            .collect();
        let ratios = mv.iter().zip(&v).map(|(a, b)| a / b);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        lower = lower.max(lo * (1.0 - rel));
        upper = upper.min(hi * (1.0 + rel));
        if upper - lower <= 1e-15 * upper {
            break;
        }
        let top = mv.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            // Nilpotent pattern.
            return SpectralBracket { lower: 0.0, upper: 0.0, iterations };
        }
        // Keep v strictly positive so the upper ratio stays valid.
        v = mv.iter().map(|x| (x / top).max(1e-200)).collect();
    }
    SpectralBracket { lower, upper, iterations }
}

/// No cycle through positive weights.
fn is_nilpotent(adj: &[Vec<bool>], w: &[f64]) -> bool {
    let d = w.len();
    let edge = |i: usize, j: usize| adj[i][j] && w[j] > 0.0;
    let mut indeg: Vec<usize> = (0..d).map(|j| (0..d).filter(|&i| edge(i, j)).count()).collect();
    let mut stack: Vec<usize> = (0..d).filter(|&j| indeg[j] == 0).collect();
    let mut seen = 0;
    while let Some(i) = stack.pop() {
        seen += 1;
        for j in (0..d).filter(|&j| edge(i, j)) {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                stack.push(j);
            }
        }
    }
    seen == d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_two_by_two() {
        let adj = vec![vec![true, true], vec![true, true]];
        let b = spectral_radius_bracket(&adj, &[0.5, 0.5], 10);
        assert!(b.lower <= 1.0 && 1.0 <= b.upper && b.upper - b.lower < 1e-14);
    }

    #[test]
    fn golden_mean_shift() {
        // [[1, 1], [1, 0]] has Perron root the golden ratio.
        let adj = vec![vec![true, true], vec![true, false]];
        let b = spectral_radius_bracket(&adj, &[1.0, 1.0], 200);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(b.lower <= phi && phi <= b.upper, "{b:?}");
        assert!(b.upper - b.lower < 1e-12);
    }

    #[test]
    fn nilpotent_matrix_has_zero_radius() {
        let adj = vec![vec![false, true], vec![false, false]];
        let b = spectral_radius_bracket(&adj, &[1.0, 1.0], 50);
        assert_eq!(b.upper, 0.0);
    }
}
