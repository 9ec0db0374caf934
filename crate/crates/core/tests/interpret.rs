use ndarray::ArrayView1;
use proptest::prelude::*;
use scbm::interpret::{
    partial_dependence, spearman, subgroup_calibration, variable_importance, CalibrationConfig, Grid, ImportanceMode,
    PdTarget,
};
use scbm::simbench::{draw_scenario, Scenario};
use scbm::{fit_scbm, Arm, Dataset, HteModel, ScbmConfig};

/// `tau(x) = a + b . x`, outcomes `mu = 0` plus half the effect per arm.
struct Linear {
    a: f64,
    b: Vec<f64>,
}

impl HteModel for Linear {
    fn n_features(&self) -> usize {
        self.b.len()
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> scbm::Result<f64> {
        Ok(self.a + x.iter().zip(&self.b).map(|(v, w)| v * w).sum::<f64>())
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> scbm::Result<f64> {
        let tau = self.predict_hte(x)?;
        Ok(if arm == Arm::Treated { tau / 2.0 } else { -tau / 2.0 })
    }
}

/// The data-generating effect of a scenario, as a model.
struct Truth(Scenario, usize);

impl HteModel for Truth {
    fn n_features(&self) -> usize {
        self.1
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> scbm::Result<f64> {
        Ok(self.0.tau(&x.to_vec()))
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> scbm::Result<f64> {
        let xs = x.to_vec();
        let half = if arm == Arm::Treated { 0.5 } else { -0.5 };
        Ok(self.0.mu(&xs) + half * self.0.tau(&xs))
    }
}

fn small_data(seed: u64) -> Dataset {
    draw_scenario(Scenario::new(2).unwrap(), 60, 10, 1, seed).unwrap().train
}

#[test]
fn pdp_of_linear_model_is_the_line_through_the_mean() {
    let data = small_data(1);
    let model = Linear { a: 0.5, b: (0..10).map(|j| j as f64 * 0.1 - 0.3).collect() };
    let curve = partial_dependence(&model, &data, 2, &Grid::Explicit(vec![1.0, -1.0, 0.0, 1.0]), PdTarget::Hte).unwrap();
    assert_eq!(curve.grid, vec![-1.0, 0.0, 1.0]);
    let x = data.covariates();
    let rest: f64 = (0..data.n())
        .map(|i| (0..10).filter(|&j| j != 2).map(|j| x[[i, j]] * model.b[j]).sum::<f64>())
        .sum::<f64>()
        / data.n() as f64;
    for (g, v) in curve.grid.iter().zip(&curve.values) {
        assert!((v - (0.5 + rest + model.b[2] * g)).abs() < 1e-12);
    }
    let treated = partial_dependence(&model, &data, 2, &Grid::Explicit(vec![0.0]), PdTarget::Outcome(Arm::Treated)).unwrap();
    assert!((treated.values[0] - curve.values[1] / 2.0).abs() < 1e-12);
}

#[test]
fn pdp_rejects_bad_requests() {
    let data = small_data(2);
    let model = Linear { a: 0.0, b: vec![1.0; 10] };
    assert!(partial_dependence(&model, &data, 10, &Grid::default(), PdTarget::Hte).is_err());
    assert!(partial_dependence(&model, &data, 0, &Grid::Explicit(vec![]), PdTarget::Hte).is_err());
    assert!(partial_dependence(&model, &data, 0, &Grid::Explicit(vec![f64::NAN]), PdTarget::Hte).is_err());
    let narrow = Linear { a: 0.0, b: vec![1.0; 3] };
    assert!(partial_dependence(&narrow, &data, 0, &Grid::default(), PdTarget::Hte).is_err());
}

#[test]
fn importance_ranks_the_effect_modifiers() {
    let draw = draw_scenario(Scenario::new(4).unwrap(), 300, 10, 1, 6).unwrap();
    let model = fit_scbm(&draw.train, &ScbmConfig { b: 5, ..Default::default() }).unwrap();
    for mode in [ImportanceMode::ZeroGroups, ImportanceMode::Refit] {
        let report = variable_importance(&model, &draw.train, mode).unwrap();
        assert_eq!(report.variables.len(), 10);
        let top = report.variables.iter().map(|v| v.normalized).fold(0.0, f64::max);
        assert!(top == 100.0 || top == 0.0);
        for v in &report.variables {
            assert!((0.0..=100.0).contains(&v.normalized));
            let used = model.basis.functions().iter().any(|f| f.uses_variable(v.variable));
            if !used {
                assert_eq!(v.raw, 0.0);
            }
        }
    }
}

#[test]
fn calibration_with_the_true_effect_is_monotone() {
    let s4 = Scenario::new(4).unwrap();
    let data = draw_scenario(s4, 2000, 10, 1, 12).unwrap().train;
    let config = CalibrationConfig { k: 5, replications: 4, ..Default::default() };
    let report = subgroup_calibration(&data, &config, |_, _| Ok(Truth(s4, 10))).unwrap();
    assert_eq!(report.replicates.len(), 4);
    for rep in &report.replicates {
        assert_eq!(rep.subgroups.len(), 5);
        for w in rep.subgroups.windows(2) {
            assert!(w[0].mean_tau_hat <= w[1].mean_tau_hat);
        }
        assert!(rep.spearman.unwrap() > 0.5);
    }
    let again = subgroup_calibration(&data, &config, |_, _| Ok(Truth(s4, 10))).unwrap();
    assert_eq!(report, again);
}

#[test]
fn spearman_handles_ties_and_degenerate_input() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
    assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!(r > 0.9 && r < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pdp_is_linear_in_the_model(a in -5.0f64..5.0, s in -3.0f64..3.0, j in 0usize..10, seed in 0u64..1000) {
        let data = small_data(seed);
        let b: Vec<f64> = (0..10).map(|k| (k as f64 - 4.0) * 0.2).collect();
        let base = Linear { a, b: b.clone() };
        let scaled = Linear { a: s * a, b: b.iter().map(|w| s * w).collect() };
        let grid = Grid::Quantiles(7);
        let p = partial_dependence(&base, &data, j, &grid, PdTarget::Hte).unwrap();
        let q = partial_dependence(&scaled, &data, j, &grid, PdTarget::Hte).unwrap();
        prop_assert_eq!(&p.grid, &q.grid);
        for (u, v) in p.values.iter().zip(&q.values) {
            prop_assert!((s * u - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
        for w in p.grid.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn spearman_is_rank_invariant(v in proptest::collection::vec(-100.0f64..100.0, 3..30)) {
        let w: Vec<f64> = v.iter().map(|x| x.powi(3) + 2.0).collect();
        if let Some(r) = spearman(&v, &w) {
            prop_assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
