//! Ridge-penalized logistic regression by Newton / IRLS.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;

pub const MAX_ITER: usize = 100;
pub const GRADIENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub ridge: f64,
    pub iterations: usize,
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

impl LogisticModel {
    /// Minimizes `mean(-loglik) + ridge/2 * |w|^2` (intercept unpenalized).
    pub fn fit(x: &Array2<f64>, t: &[u8], ridge: f64) -> Result<Self> {
        let (n, p) = x.dim();
        let k = p + 1;
        let nf = n as f64;
        let mut beta = vec![0.0; k];
        let treated = t.iter().filter(|&&v| v == 1).count() as f64;
        beta[0] = (treated / (nf - treated)).ln();

        let eta_of = |beta: &[f64], i: usize| -> f64 {
            let row = x.row(i);
            beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>()
        };
        let objective = |beta: &[f64]| -> f64 {
            let mut loss = 0.0;
            for i in 0..n {
                let eta = eta_of(beta, i);
                loss += softplus(eta) - t[i] as f64 * eta;
            }
            loss / nf + 0.5 * ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
        };

        let mut current = objective(&beta);
        let mut grad_norm = f64::INFINITY;
        for iter in 0..=MAX_ITER {
            let mut grad = vec![0.0; k];
            let mut hess = vec![0.0; k * k];
            let mut z = vec![0.0; k];
            for i in 0..n {
                let row = x.row(i);
                let prob = sigmoid(eta_of(&beta, i));
                let w = (prob * (1.0 - prob)).max(1e-12);
                let resid = prob - t[i] as f64;
                z[0] = 1.0;
                for (zj, xj) in z[1..].iter_mut().zip(row.iter()) {
                    *zj = *xj;
                }
                for a in 0..k {
                    grad[a] += resid * z[a];
                    let wa = w * z[a];
                    for b in 0..=a {
                        hess[a * k + b] += wa * z[b];
                    }
                }
            }
            for a in 0..k {
                grad[a] /= nf;
                for b in 0..=a {
                    hess[a * k + b] /= nf;
                    hess[b * k + a] = hess[a * k + b];
                }
            }
            for a in 1..k {
                grad[a] += ridge * beta[a];
                hess[a * k + a] += ridge;
            }
            grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if grad_norm <= GRADIENT_TOL {
                return Ok(Self {
                    intercept: beta[0],
                    coefficients: beta[1..].to_vec(),
                    ridge,
                    iterations: iter,
                });
            }
            if iter == MAX_ITER {
                break;
            }
            let step = solve_spd(&hess, k, &grad, 0.0);
            let mut scale = 1.0;
            loop {
                let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b - scale * s).collect();
                let value = objective(&trial);
                if value <= current || scale < 1e-10 {
                    beta = trial;
                    current = value;
                    break;
                }
                scale *= 0.5;
            }
        }
        Err(Error::Convergence {
            solver: "logistic IRLS",
            iterations: MAX_ITER,
            residual: grad_norm,
        })
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let eta = self.intercept
            + x.iter()
                .zip(&self.coefficients)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        sigmoid(eta)
    }
}
