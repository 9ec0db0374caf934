//! Generator checks shared by the simulation tests and the acceptance run.

#![allow(dead_code)]

use scbm::simbench::{draw_scenario, Regime, Scenario};

/// Moment and propensity-law violations of one scenario at sample size `n`.
pub fn generator_violations(scenario: Scenario, n: usize, seed: u64) -> Vec<String> {
    let p = 10;
    let draw = draw_scenario(scenario, n, p, 1, seed).unwrap();
    let x = draw.train.covariates();
    let t = draw.train.treatment();
    let y = draw.train.outcome();
    let mut bad = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        let mean = col.mean().unwrap();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // column j holds covariate j + 1, so even columns are the odd (Gaussian) covariates
        if j % 2 == 0 {
            if mean.abs() >= 0.02 || (var - 1.0).abs() > 0.03 {
                bad.push(format!("x{}: mean {mean:.4}, variance {var:.4}", j + 1));
            }
        } else if (mean - 0.5).abs() > 0.01 {
            bad.push(format!("x{}: mean {mean:.4}", j + 1));
        }
    }
    let resid: Vec<f64> = (0..n)
        .map(|i| {
            let row = x.row(i).to_vec();
            y[i] - scenario.mu(&row) - (f64::from(t[i]) - 0.5) * scenario.tau(&row)
        })
        .collect();
    let rm = resid.iter().sum::<f64>() / n as f64;
    let rv = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (n - 1) as f64;
    if (rv - 1.0).abs() > 0.03 {
        bad.push(format!("residual variance {rv:.4}"));
    }
    let e = &draw.true_propensity_train;
    match scenario.regime() {
        Regime::Rct => {
            let rate = t.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
            if (rate - 0.5).abs() > 0.02 {
                bad.push(format!("treatment rate {rate:.4}"));
            }
        }
        Regime::Observational => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
            for d in 0..10 {
                let bin = &order[d * n / 10..(d + 1) * n / 10];
                let m = bin.len() as f64;
                let observed = bin.iter().map(|&i| f64::from(t[i])).sum::<f64>() / m;
                let expected = bin.iter().map(|&i| e[i]).sum::<f64>() / m;
                if (observed - expected).abs() > 0.02 {
                    bad.push(format!("decile {d}: P(t=1) {observed:.4} vs e {expected:.4}"));
                }
            }
        }
    }
    bad
}
