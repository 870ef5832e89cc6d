mod common;

use common::expm;
use mmisq_core::mgf::{mgf_curve_with, transient_mgf_m, transient_mgf_u, OdeOptions};
use mmisq_core::{limit_mgf, replicate, Generator, ModelSpec, ScalingSpec, TimeGrid};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `E e^{sM(t)}` from the joint chain `(J, M)` with `M` truncated at `cap`,
/// propagated by a dense matrix exponential.
fn joint_chain_mgf(model: &ModelSpec, scale: &ScalingSpec, t: f64, s: f64, cap: usize) -> f64 {
    let d = model.dim();
    let size = d * (cap + 1);
    let idx = |j: usize, m: usize| j * (cap + 1) + m;
    let q = model.generator().rates();
    let speed = scale.background_speed();
    let n = scale.n_f64();
    let mut a = DMatrix::<f64>::zeros(size, size);
    for j in 0..d {
        for m in 0..=cap {
            let from = idx(j, m);
            for k in 0..d {
                if k != j {
                    a[(from, idx(k, m))] += speed * q[(j, k)];
                }
            }
            if m < cap {
                a[(from, idx(j, m + 1))] += n * model.lambda()[j];
            }
            if m > 0 {
                a[(from, idx(j, m - 1))] += model.mu() * m as f64;
            }
        }
    }
    for i in 0..size {
        let off: f64 = a.row(i).sum();
        a[(i, i)] = -off;
    }
    let p = expm(&a, t);
    let m0 = model.initial_count(scale.n()) as usize;
    let mut value = 0.0;
    for (j0, &pj) in model.pi().iter().enumerate() {
        for j in 0..d {
            for m in 0..=cap {
                value += pj * p[(idx(j0, m0), idx(j, m))] * (s * m as f64).exp();
            }
        }
    }
    value
}

fn three_state() -> ModelSpec {
    let g = Generator::from_rows(&[
        vec![-2.0, 1.5, 0.5],
        vec![0.3, -0.8, 0.5],
        vec![1.0, 1.0, -2.0],
    ])
    .unwrap();
    ModelSpec::new(g, vec![0.5, 2.0, 5.0], 1.3, 0.4).unwrap()
}

#[test]
fn backward_solver_matches_joint_chain() {
    for model in [ModelSpec::two_state_example(), three_state()] {
        for alpha in [0.5, 1.0, 1.5] {
            let scale = ScalingSpec::new(5, alpha).unwrap();
            for (t, s) in [(0.3, 0.2), (1.0, -0.5), (2.5, 0.1)] {
                let want = joint_chain_mgf(&model, &scale, t, s, 90);
                let got = transient_mgf_m(&model, &scale, t, s).unwrap();
                assert!(
                    (got - want).abs() / want < 1e-7,
                    "alpha={alpha} t={t} s={s}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn halving_the_step_changes_little() {
    let model = ModelSpec::two_state_example();
    let grid = TimeGrid::uniform(10.0, 0.01).unwrap();
    for alpha in [0.5, 1.0, 1.5] {
        let scale = ScalingSpec::new(64, alpha).unwrap();
        let coarse = mgf_curve_with(&model, &scale, 0.5, &grid, &OdeOptions::default()).unwrap();
        let fine = OdeOptions {
            step_fraction: 0.025,
            ..OdeOptions::default()
        };
        let fine = mgf_curve_with(&model, &scale, 0.5, &grid, &fine).unwrap();
        for (a, b) in coarse.values.iter().zip(&fine.values) {
            assert!((a - b).abs() / b < 1e-7);
        }
    }
}

#[test]
fn monte_carlo_agrees_with_transient_mgf() {
    let model = ModelSpec::two_state_example();
    let scale = ScalingSpec::new(50, 1.0).unwrap();
    let grid = TimeGrid::from_points(&[0.5, 1.0]).unwrap();
    let stats = replicate(&model, &scale, 1.0, &grid, 4000, &[0.5, -0.7], 99).unwrap();
    for est in &stats.mgf {
        for (k, &t) in stats.grid.iter().enumerate().skip(1) {
            let exact = transient_mgf_u(&model, &scale, t, est.theta).unwrap();
            let gap = (est.value[k] - exact).abs();
            assert!(
                gap <= 3.5 * est.std_err[k],
                "theta={} t={t}: gap {gap}",
                est.theta
            );
        }
    }
}

#[test]
fn limit_log_mgf_is_quadratic() {
    let model = ModelSpec::two_state_example();
    for alpha in [0.5, 1.0, 1.5] {
        for t in [0.1, 1.0, 7.0] {
            let one = limit_mgf(&model, alpha, t, 0.3).unwrap().ln();
            let two = limit_mgf(&model, alpha, t, 0.6).unwrap().ln();
            assert!((two - 4.0 * one).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transient_log_mgf_is_convex(alpha in 0.3f64..2.0, n in 2u64..200, t in 0.05f64..4.0) {
        let model = ModelSpec::two_state_example();
        let scale = ScalingSpec::new(n, alpha).unwrap();
        let h = 0.25;
        let logs: Vec<f64> = (-4..=4)
            .map(|k| transient_mgf_u(&model, &scale, t, k as f64 * h).unwrap().ln())
            .collect();
        for w in logs.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
        prop_assert!(logs[4].abs() < 1e-15);
    }
}
