//! Independent numerical oracles shared by test suites.
//!
//! Everything here is written directly from the textbook definitions and must
//! stay independent of the sampling / fitting code it is used to check.

/// Two-sided Kolmogorov–Smirnov statistic of a sample against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Stationary distribution of a row-stochastic matrix by power iteration.
pub fn stationary_distribution(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for (i, row) in matrix.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                next[j] += pi[i] * p;
            }
        }
        let diff: f64 = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .sum();
        pi = next;
        if diff < 1e-14 {
            break;
        }
    }
    pi
}

/// Least squares by explicit normal equations with Gaussian elimination.
/// Brute-force reference for checking QR-based fits.
pub fn normal_equations_fit(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let p = x[0].len();
    assert_eq!(n, y.len());
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            xty[j] += x[i][j] * y[i];
            for k in 0..p {
                xtx[j][k] += x[i][j] * x[i][k];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut a = xtx;
    let mut b = xty;
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-12, "singular normal equations");
        for row in (col + 1)..p {
            let f = a[row][col] / a[col][col];
            for k in col..p {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut beta = vec![0.0; p];
    for row in (0..p).rev() {
        let mut s = b[row];
        for k in (row + 1)..p {
            s -= a[row][k] * beta[k];
        }
        beta[row] = s / a[row][row];
    }
    beta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_grid_is_small() {
        // Sample = exact uniform quantile grid; D = 1/(2n) shifted by grid offset.
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn stationary_of_identity_is_uniform_start() {
        let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let pi = stationary_distribution(&m);
        assert!((pi[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn stationary_of_two_state_chain() {
        // P(stay in 0) = 0.9, P(1 -> 0) = 0.3: pi = (0.75, 0.25).
        let m = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
        let pi = stationary_distribution(&m);
        assert!((pi[0] - 0.75).abs() < 1e-9);
        assert!((pi[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn normal_equations_recover_exact_line() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let beta = normal_equations_fit(&x, &y);
        assert!((beta[0] - 2.0).abs() < 1e-10);
        assert!((beta[1] - 3.0).abs() < 1e-10);
    }
}
