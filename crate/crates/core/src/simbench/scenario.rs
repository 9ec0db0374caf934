//! The twelve simulation scenarios.
//!
//! Covariates are indexed from 1 in the formulas below (`x1` is column 0).
//! Odd-numbered covariates are standard normal, even-numbered ones are
//! Bernoulli(1/2). Scenarios 1-6 are randomized (`e = 1/2`); 7-12 reuse the
//! same `mu` and `tau` with `e(x) = logistic(mu(x) - tau(x) / 2)`. Outcomes are
//! `y ~ N(mu + (t - 1/2) tau, 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng as _;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, Rng};

/// Smallest covariate count any scenario references.
pub const MIN_FEATURES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Rct,
    Observational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Scenario(u8);

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        Scenario::new(id)
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.0
    }
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn ind(cond: bool) -> f64 {
    f64::from(u8::from(cond))
}

/// Eight-cell piecewise function of the binary covariates `x2, x4, x6`.
pub fn f1(x: &[f64]) -> f64 {
    let (a, b, c) = (x[1], x[3], x[5]);
    a * b * c
        + 2.0 * a * b * (1.0 - c)
        + 3.0 * a * (1.0 - b) * c
        + 4.0 * a * (1.0 - b) * (1.0 - c)
        + 5.0 * (1.0 - a) * b * c
        + 6.0 * (1.0 - a) * b * (1.0 - c)
        + 7.0 * (1.0 - a) * (1.0 - b) * c
        + 8.0 * (1.0 - a) * (1.0 - b) * (1.0 - c)
}

pub fn f2(x: &[f64]) -> f64 {
    x[0] + x[2] + x[4] + x[6] + x[7] + x[8] - 2.0
}

impl Scenario {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=12).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::config("scenario", format!("must be 1..=12, got {id}")))
        }
    }

    pub fn all() -> impl Iterator<Item = Scenario> {
        (1..=12).map(Scenario)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn regime(self) -> Regime {
        if self.0 <= 6 {
            Regime::Rct
        } else {
            Regime::Observational
        }
    }

    /// The randomized scenario with the same `mu` and `tau`.
    pub fn model(self) -> u8 {
        (self.0 - 1) % 6 + 1
    }

    /// Scenario with this model under the given regime.
    pub fn with_regime(self, regime: Regime) -> Scenario {
        match regime {
            Regime::Rct => Scenario(self.model()),
            Regime::Observational => Scenario(self.model() + 6),
        }
    }

    pub fn mu(self, x: &[f64]) -> f64 {
        match self.model() {
            1 => 2.0 * x[0] - 4.0,
            2 => 5.0 * ind(x[0] > 1.0) - 5.0,
            3 => {
                0.5 * (x[0] * x[0] + x[1] + x[2] * x[2] + x[3] + x[4] * x[4] + x[5] + x[6] * x[6]
                    + x[7]
                    + x[8] * x[8]
                    - 11.0)
            }
            4 => {
                4.0 * ind(x[0] > 1.0) * ind(x[2] > 1.0)
                    + 4.0 * ind(x[4] > 1.0) * ind(x[6] > 1.0)
                    + 2.0 * x[7] * x[8]
            }
            5 => f1(x),
            _ => {
                0.5 - 0.1 / (1.0 + (-x[0]).exp()) + 0.1 * x[2].sin()
                    - 0.1 * x[4] * x[4]
                    - 0.2 * x[4]
                    - 0.1 * x[6] * x[6]
            }
        }
    }

    pub fn tau(self, x: &[f64]) -> f64 {
        match self.model() {
            1 => 0.0,
            2 => {
                4.0 * ind(x[0] > 1.0) * ind(x[2] > 1.0)
                    + 4.0 * ind(x[4] > 1.0) * ind(x[6] > 1.0)
                    + 2.0 * x[7] * x[8]
            }
            3 => FRAC_1_SQRT_2 * (f1(x) + f2(x)),
            4 => f2(x),
            5 => (PI * x[0] * x[2]).sin() + 2.0 * (x[4] - 0.5).powi(2) + x[6] + 0.5 * x[8],
            _ => {
                -0.2 + 0.5 * (PI * x[0] * x[2]).sin() + 0.2 / (1.0 + (-x[4]).exp())
                    + 0.2 * x[1]
                    + 0.3 * x[3]
            }
        }
    }

    /// True propensity score.
    pub fn propensity(self, x: &[f64]) -> f64 {
        match self.regime() {
            Regime::Rct => 0.5,
            Regime::Observational => logistic(self.mu(x) - self.tau(x) / 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDraw {
    pub scenario: Scenario,
    pub train: Dataset,
    pub true_propensity_train: Array1<f64>,
    pub true_tau_train: Array1<f64>,
    pub test_covariates: Array2<f64>,
    pub true_tau_test: Array1<f64>,
}

/// Covariates by the parity rule.
pub fn draw_covariates(n: usize, p: usize, rng: &mut Rng) -> Array2<f64> {
    let coin = Bernoulli::new(0.5).expect("valid probability");
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            // column j holds covariate j + 1
            x[[i, j]] = if j % 2 == 0 {
                StandardNormal.sample(rng)
            } else {
                f64::from(u8::from(coin.sample(rng)))
            };
        }
    }
    x
}

/// Treatment and outcome for one row.
pub fn draw_response(scenario: Scenario, x: ArrayView1<'_, f64>, rng: &mut Rng) -> (u8, f64) {
    let xs = x.as_slice().map(<[f64]>::to_vec).unwrap_or_else(|| x.to_vec());
    let e = scenario.propensity(&xs);
    let t = u8::from(rng.random::<f64>() < e);
    let noise: f64 = StandardNormal.sample(rng);
    let y = scenario.mu(&xs) + (f64::from(t) - 0.5) * scenario.tau(&xs) + noise;
    (t, y)
}

pub fn draw_scenario(scenario: Scenario, n: usize, p: usize, n_test: usize, seed: u64) -> Result<SimDraw> {
    if p < MIN_FEATURES {
        return Err(Error::config(
            "p",
            format!("scenarios reference x1..x9, so p must be >= {MIN_FEATURES}, got {p}"),
        ));
    }
    if n == 0 {
        return Err(Error::config("n", "must be >= 1"));
    }
    let mut rng = rng_from(derive_seed(seed, 0));
    let x = draw_covariates(n, p, &mut rng);
    let mut t = Array1::zeros(n);
    let mut y = Array1::zeros(n);
    let mut e = Array1::zeros(n);
    let mut tau = Array1::zeros(n);
    for i in 0..n {
        let row = x.row(i);
        let xs = row.to_vec();
        e[i] = scenario.propensity(&xs);
        tau[i] = scenario.tau(&xs);
        let (ti, yi) = draw_response(scenario, row, &mut rng);
        t[i] = ti;
        y[i] = yi;
    }
    let mut test_rng = rng_from(derive_seed(seed, 1));
    let test = draw_covariates(n_test, p, &mut test_rng);
    let true_tau_test = test.rows().into_iter().map(|r| scenario.tau(&r.to_vec())).collect();
    Ok(SimDraw {
        scenario,
        train: Dataset::new(x, t, y)?,
        true_propensity_train: e,
        true_tau_train: tau,
        test_covariates: test,
        true_tau_test,
    })
}

fn check_lengths(a: &Array1<f64>, b: &Array1<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("metrics need at least one point".into()));
    }
    Ok(())
}

/// Mean squared error of `tau_hat` against `tau_true`.
pub fn mse(tau_hat: &Array1<f64>, tau_true: &Array1<f64>) -> Result<f64> {
    check_lengths(tau_hat, tau_true)?;
    Ok(tau_hat
        .iter()
        .zip(tau_true)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / tau_hat.len() as f64)
}

/// Absolute value of the mean error.
pub fn abs_bias(tau_hat: &Array1<f64>, tau_true: &Array1<f64>) -> Result<f64> {
    check_lengths(tau_hat, tau_true)?;
    Ok((tau_hat.iter().zip(tau_true).map(|(a, b)| a - b).sum::<f64>() / tau_hat.len() as f64).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scenario_one_formulas() {
        let s = Scenario::new(1).unwrap();
        let x = [1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(s.mu(&x), -1.0);
        assert_eq!(s.tau(&x), 0.0);
        assert_eq!(s.propensity(&x), 0.5);
        let obs = Scenario::new(7).unwrap();
        let zero = [0.0; 9];
        assert!((obs.propensity(&zero) - 1.0 / (1.0 + 4f64.exp())).abs() < 1e-15);
        assert!((obs.propensity(&zero) - 0.018).abs() < 5e-4);
    }

    #[test]
    fn f1_cells() {
        let mut x = [0.0; 9];
        assert_eq!(f1(&x), 8.0);
        x[1] = 1.0;
        x[3] = 1.0;
        x[5] = 1.0;
        assert_eq!(f1(&x), 1.0);
        x[1] = 0.0;
        assert_eq!(f1(&x), 5.0);
    }

    #[test]
    fn ids_and_regimes() {
        assert!(Scenario::new(0).is_err());
        assert!(Scenario::new(13).is_err());
        assert_eq!(Scenario::new(10).unwrap().model(), 4);
        assert_eq!(Scenario::new(4).unwrap().with_regime(Regime::Observational).id(), 10);
        assert_eq!(Scenario::all().count(), 12);
    }

    #[test]
    fn metric_examples() {
        let t = array![1.0, 2.0, 3.0, 4.0];
        assert_eq!(mse(&t, &t).unwrap(), 0.0);
        assert_eq!(abs_bias(&t, &t).unwrap(), 0.0);
        let up = &t + 1.0;
        assert_eq!(mse(&up, &t).unwrap(), 1.0);
        assert_eq!(abs_bias(&up, &t).unwrap(), 1.0);
        let alt = array![2.0, 1.0, 4.0, 3.0];
        assert_eq!(mse(&alt, &t).unwrap(), 1.0);
        assert_eq!(abs_bias(&alt, &t).unwrap(), 0.0);
        assert!(mse(&alt, &array![1.0]).is_err());
    }

    #[test]
    fn draw_shapes_and_determinism() {
        let s = Scenario::new(4).unwrap();
        let a = draw_scenario(s, 50, 10, 20, 3).unwrap();
        let b = draw_scenario(s, 50, 10, 20, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.test_covariates.dim(), (20, 10));
        assert!(draw_scenario(s, 50, 8, 20, 3).is_err());
        for i in 0..50 {
            let v = a.train.covariates()[[i, 1]];
            assert!(v == 0.0 || v == 1.0);
        }
    }
}
