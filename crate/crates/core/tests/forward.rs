mod oracles;

use ndarray::{Array1, Array2};
use oracles::{exhaustive_forward_pass, exhaustive_forward_step};
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::StandardNormal;
use scbm::basis::BasisFunction;
use scbm::forward::{forward_pass, scan_candidates, ForwardConfig};
use scbm::rng::rng_from;

fn tiny(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
    let mut rng = rng_from(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
    let y = x.rows().into_iter().map(|r| (r[0] - 0.4).max(0.0) * 2.0 + rng.sample::<f64, _>(StandardNormal) * 0.3).collect();
    (x, y)
}

fn config(m_max: usize) -> ForwardConfig {
    ForwardConfig { m_max, k_max: 2, min_active: 1, ..Default::default() }
}

#[test]
fn accepted_triples_match_exhaustive_search() {
    for seed in 0..20 {
        let (x, y) = tiny(seed, 10, 2);
        let fit = forward_pass(&x, y.view(), &config(4), 0).unwrap();
        let reference = exhaustive_forward_pass(&x, y.as_slice().unwrap(), 4, 2, 1);
        assert_eq!(fit.splits.len(), reference.len(), "seed {seed}");
        for (a, b) in fit.splits.iter().zip(&reference) {
            assert_eq!((a.parent, a.variable, a.knot), (b.parent, b.variable, b.knot), "seed {seed}");
            assert!((a.lof - b.lof).abs() <= 1e-8 * b.lof.max(1e-12), "seed {seed}: {} vs {}", a.lof, b.lof);
        }
    }
}

#[test]
fn naive_scoring_agrees_with_sweep() {
    for seed in 0..5 {
        let (x, y) = tiny(50 + seed, 30, 3);
        let fast = forward_pass(&x, y.view(), &config(6), 0).unwrap();
        let naive = forward_pass(&x, y.view(), &ForwardConfig { naive_lof: true, ..config(6) }, 0).unwrap();
        let key = |f: &scbm::forward::ForwardFit| f.splits.iter().map(|s| (s.parent, s.variable, s.knot)).collect::<Vec<_>>();
        assert_eq!(key(&fast), key(&naive));
    }
}

#[test]
fn near_duplicate_knots_are_scored_exactly() {
    let xs = [0.55, 0.6, 0.66, 0.36, 0.989_117_7, 0.84, 0.78, 0.71, 0.989_124_8, 0.37];
    let x = Array2::from_shape_fn((10, 1), |(i, _)| xs[i]);
    let y = Array1::from(vec![0.3, -0.2, 0.5, 0.1, 0.9, -0.4, 0.2, 0.0, -1.1, 0.6]);
    let basis = [BasisFunction::constant()];
    let sweep = scan_candidates(&x, y.view(), &basis, &config(2)).unwrap();
    let naive = scan_candidates(&x, y.view(), &basis, &ForwardConfig { naive_lof: true, ..config(2) }).unwrap();
    for (a, b) in sweep.iter().zip(&naive) {
        assert_eq!(a.knot, b.knot);
        assert!((a.lof - b.lof).abs() <= 1e-9 * b.lof, "knot {}: {} vs {}", a.knot, a.lof, b.lof);
    }
    let step = exhaustive_forward_step(&x, y.as_slice().unwrap(), &basis, 2, 1).unwrap().unwrap();
    let fit = forward_pass(&x, y.view(), &config(2), 0).unwrap();
    assert_eq!(fit.splits[0].knot, step.knot);
}

#[test]
fn noiseless_hinge_is_recovered() {
    let mut rng = rng_from(11);
    let x = Array2::from_shape_fn((200, 3), |_| rng.random::<f64>());
    let y: Array1<f64> = x.column(0).mapv(|v| 3.0 * (v - 0.5).max(0.0));
    let fit = forward_pass(&x, y.view(), &ForwardConfig::default(), 0).unwrap();
    assert_eq!(fit.splits[0].variable, 0);
    let tss: f64 = {
        let m = y.mean().unwrap();
        y.iter().map(|v| (v - m).powi(2)).sum()
    };
    let r2 = 1.0 - fit.rss_trace.last().unwrap() / tss;
    assert!(r2 > 0.99, "R^2 = {r2}");
}

#[test]
fn oracle_guards_and_trivial_cases() {
    let (x, _) = tiny(1, 60, 2);
    let y = vec![0.0; 60];
    assert!(exhaustive_forward_step(&x, &y, &[BasisFunction::constant()], 2, 1).is_err());

    let (x, _) = tiny(2, 10, 2);
    let constant = vec![4.0; 10];
    let fit = forward_pass(&x, Array1::from(constant.clone()).view(), &config(4), 0).unwrap();
    assert!(fit.splits.is_empty());
    assert!(exhaustive_forward_pass(&x, &constant, 4, 2, 1).is_empty());

    // one row, one covariate: the only admissible knot is that row's value
    let x1 = Array2::from_elem((1, 1), 0.25);
    let step = exhaustive_forward_step(&x1, &[1.0], &[BasisFunction::constant()], 1, 1).unwrap().unwrap();
    assert_eq!((step.parent, step.variable, step.knot), (0, 0, 0.25));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rss_trace_is_non_increasing(seed in 0u64..100_000, n in 8usize..40, p in 1usize..4) {
        let (x, y) = tiny(seed, n, p);
        let fit = forward_pass(&x, y.view(), &config(8), 0).unwrap();
        prop_assert_eq!(fit.rss_trace.len(), fit.splits.len() + 1);
        prop_assert_eq!(fit.basis.len(), 1 + 2 * fit.splits.len());
        for w in fit.rss_trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for (s, before) in fit.splits.iter().zip(&fit.rss_trace) {
            prop_assert!(s.lof <= *before * (1.0 + 1e-12));
        }
        for b in &fit.basis {
            prop_assert!(b.degree() <= 2);
        }
    }

    #[test]
    fn identical_inputs_give_identical_passes(seed in 0u64..100_000) {
        let (x, y) = tiny(seed, 25, 3);
        let a = forward_pass(&x, y.view(), &config(6), 3).unwrap();
        let b = forward_pass(&x, y.view(), &config(6), 3).unwrap();
        prop_assert_eq!(a, b);
    }
}
