//! Slow reference implementations used to certify the production solvers.
//!
//! Nothing here calls into the crate's solver internals: least squares goes
//! through nalgebra's SVD and the group-LASSO oracle is plain proximal gradient.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use scbm::basis::{BasisFunction, HingeTerm, Sign};
use scbm::rng::rng_from;
use scbm::simbench::{draw_response, Scenario};

pub fn matrix(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, columns.len(), |i, k| columns[k][i])
}

/// Minimum-norm least squares via SVD; returns `(coefficients, rss)`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let x = matrix(columns);
    let y = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let top = svd.singular_values.max();
    let beta = svd
        .solve(&y, 1e-12 * top.max(f64::MIN_POSITIVE))
        .expect("svd has both factors");
    let r = &y - &x * &beta;
    (beta.iter().copied().collect(), r.norm_squared())
}

/// Group layout for [`proximal_gradient_group_lasso`].
pub struct Groups {
    pub members: Vec<Vec<usize>>,
    pub penalized: Vec<bool>,
}

/// Minimizes `||y - X b||^2 + lambda * sum_g ||b_g||` over the penalized groups
/// with a fixed step `1 / L`, `L = 2 * sigma_max(X)^2`.
pub fn proximal_gradient_group_lasso(
    columns: &[Vec<f64>],
    groups: &Groups,
    y: &[f64],
    lambda: f64,
    iters: usize,
) -> Vec<f64> {
    let x = matrix(columns);
    let yv = DVector::from_column_slice(y);
    let sigma = x.clone().svd(false, false).singular_values.max();
    let step = 1.0 / (2.0 * sigma * sigma).max(f64::MIN_POSITIVE);
    let gram = x.transpose() * &x;
    let xty = x.transpose() * yv;
    let mut b = DVector::zeros(columns.len());
    for _ in 0..iters {
        let grad = (&gram * &b - &xty) * 2.0;
        let mut next = &b - grad * step;
        for (g, cols) in groups.members.iter().enumerate() {
            if !groups.penalized[g] {
                continue;
            }
            let norm = cols.iter().map(|&k| next[k] * next[k]).sum::<f64>().sqrt();
            let shrink = if norm > 0.0 {
                (1.0 - step * lambda / norm).max(0.0)
            } else {
                0.0
            };
            for &k in cols {
                next[k] *= shrink;
            }
        }
        b = next;
    }
    b.iter().copied().collect()
}

pub fn group_lasso_objective(columns: &[Vec<f64>], groups: &Groups, y: &[f64], lambda: f64, b: &[f64]) -> f64 {
    let x = matrix(columns);
    let r = DVector::from_column_slice(y) - x * DVector::from_column_slice(b);
    let penalty: f64 = groups
        .members
        .iter()
        .zip(&groups.penalized)
        .filter(|(_, &p)| p)
        .map(|(cols, _)| cols.iter().map(|&k| b[k] * b[k]).sum::<f64>().sqrt())
        .sum();
    r.norm_squared() + lambda * penalty
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub parent: usize,
    pub variable: usize,
    pub knot: f64,
    pub lof: f64,
}

fn hinge(parent: &[f64], x: &[f64], c: f64, sign: f64) -> Vec<f64> {
    parent.iter().zip(x).map(|(h, v)| h * (sign * (v - c)).max(0.0)).collect()
}

fn column(b: &BasisFunction, x: &Array2<f64>) -> Vec<f64> {
    x.rows().into_iter().map(|r| b.eval(r).unwrap()).collect()
}

/// Best admissible `(parent, variable, knot)` by full least-squares refits.
///
/// Candidates are visited in lexicographic order and a later one wins only
/// when its RSS is lower by more than `1e-9 * rss_now`.
pub fn exhaustive_forward_step(
    x: &Array2<f64>,
    response: &[f64],
    basis: &[BasisFunction],
    k_max: usize,
    min_active: usize,
) -> Result<Option<Step>, String> {
    let (n, p) = x.dim();
    if n > 50 {
        return Err(format!("exhaustive search is limited to n <= 50, got {n}"));
    }
    let design: Vec<Vec<f64>> = basis.iter().map(|b| column(b, x)).collect();
    let (_, rss_now) = least_squares(&design, response);
    let tie = 1e-9 * rss_now.max(f64::MIN_POSITIVE);
    let mut best: Option<Step> = None;
    for (m, b) in basis.iter().enumerate() {
        let parent = &design[m];
        if b.degree() >= k_max || parent.iter().filter(|&&h| h > 0.0).count() < min_active {
            continue;
        }
        for j in 0..p {
            if b.uses_variable(j) {
                continue;
            }
            let xj: Vec<f64> = x.column(j).to_vec();
            let mut knots: Vec<f64> = (0..n).filter(|&i| parent[i] > 0.0).map(|i| xj[i]).collect();
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            for c in knots {
                let mut cols = design.clone();
                cols.push(hinge(parent, &xj, c, 1.0));
                cols.push(hinge(parent, &xj, c, -1.0));
                let (_, lof) = least_squares(&cols, response);
                if best.is_none_or(|s| lof < s.lof - tie) {
                    best = Some(Step { parent: m, variable: j, knot: c, lof });
                }
            }
        }
    }
    Ok(best)
}

/// Grows a basis by repeated [`exhaustive_forward_step`] with the same stopping rules
/// as a forward pass: pair budget, relative improvement and exact fit.
pub fn exhaustive_forward_pass(
    x: &Array2<f64>,
    response: &[f64],
    m_max: usize,
    k_max: usize,
    min_active: usize,
) -> Vec<Step> {
    let mut basis = vec![BasisFunction::constant()];
    let mut steps = Vec::new();
    let floor = 1e-24 * response.iter().map(|v| v * v).sum::<f64>();
    while basis.len() - 1 < m_max {
        let design: Vec<Vec<f64>> = basis.iter().map(|b| column(b, x)).collect();
        let (_, rss_now) = least_squares(&design, response);
        if rss_now <= floor {
            break;
        }
        let Some(step) = exhaustive_forward_step(x, response, &basis, k_max, min_active).unwrap() else {
            break;
        };
        if rss_now - step.lof <= 1e-12 * rss_now {
            break;
        }
        let parent = basis[step.parent].clone();
        for sign in [Sign::Positive, Sign::Negative] {
            basis.push(parent.with_term(HingeTerm::new(step.variable, sign, step.knot)).unwrap());
        }
        steps.push(step);
    }
    steps
}

/// Mean and standard error of `y(treated) - y(control)` at a fixed `x`,
/// from outcomes drawn by the scenario generator.
pub fn monte_carlo_tau(scenario: Scenario, x: &[f64], draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = rng_from(seed);
    let row = Array1::from(x.to_vec());
    let mut arms = [Vec::new(), Vec::new()];
    while arms[0].len() < draws || arms[1].len() < draws {
        let (t, y) = draw_response(scenario, row.view(), &mut rng);
        if arms[t as usize].len() < draws {
            arms[t as usize].push(y);
        }
    }
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let (m1, v1) = stats(&arms[1]);
    let (m0, v0) = stats(&arms[0]);
    (m1 - m0, (v1 + v0).sqrt())
}
