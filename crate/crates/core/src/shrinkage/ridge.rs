//! Ridge regression with an unpenalized first column and cross-validated strength.

use rayon::prelude::*;

use crate::linalg::{dot, solve_spd};

/// Coefficients minimizing `|y - X w|^2 + alpha * sum_{k>0} (s_k w_k)^2`, where
/// `s_k` is the root-mean-square of column `k` (so the penalty acts on
/// standardized columns). Column 0 is not penalized.
pub(crate) fn fit(columns: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    let k = columns.len();
    let n = y.len().max(1) as f64;
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        rhs[i] = dot(&columns[i], y);
        for j in 0..=i {
            let v = dot(&columns[i], &columns[j]);
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
    }
    for i in 1..k {
        let ms = gram[i * k + i] / n;
        gram[i * k + i] += alpha * if ms > 0.0 { ms } else { 1.0 };
    }
    solve_spd(&gram, k, &rhs, 0.0)
}

fn predict(columns: &[Vec<f64>], w: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter()
        .map(|&i| columns.iter().zip(w).map(|(c, b)| c[i] * b).sum())
        .collect()
}

/// Log-spaced candidate strengths, relative to the sample size.
pub(crate) fn alpha_grid(n: usize) -> Vec<f64> {
    (-6..=3).map(|e| n as f64 * 10f64.powi(e)).collect()
}

/// Strength with the smallest K-fold squared error over `alphas`.
pub(crate) fn cross_validate(
    columns: &[Vec<f64>],
    y: &[f64],
    fold_of: &[usize],
    folds: usize,
    alphas: &[f64],
) -> f64 {
    let errors: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] != f).collect();
            let test: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] == f).collect();
            let sub: Vec<Vec<f64>> = columns
                .iter()
                .map(|c| train.iter().map(|&i| c[i]).collect())
                .collect();
            let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            alphas
                .iter()
                .map(|&a| {
                    let w = fit(&sub, &ty, a);
                    predict(columns, &w, &test)
                        .iter()
                        .zip(&test)
                        .map(|(p, &i)| (y[i] - p).powi(2))
                        .sum()
                })
                .collect()
        })
        .collect();
    let total = |a: usize| errors.iter().map(|e| e[a]).sum::<f64>();
    let best = (0..alphas.len()).fold(0, |b, a| if total(a) < total(b) { a } else { b });
    alphas[best]
}
