mod common;

use common::{deviation_by_quadrature, expm, inf_norm, random_generator, stationary_by_power};
use mmisq_core::{
    covariance_c, deviation_matrix, stationary_distribution, thorn, transient_matrix, Error,
    Generator,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generator_strategy() -> impl Strategy<Value = Generator> {
    (2usize..=6, any::<u64>()).prop_map(|(d, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_generator(&mut rng, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deviation_identities(g in generator_strategy()) {
        let d = g.dim();
        let law = stationary_distribution(&g).unwrap();
        let dev = deviation_matrix(&g, &law).unwrap();
        let dm = dev.matrix();
        let target = law.projector() - DMatrix::<f64>::identity(d, d);
        prop_assert!(inf_norm(&(g.rates() * dm - &target)) <= 1e-9);
        prop_assert!(inf_norm(&(dm * g.rates() - &target)) <= 1e-9);
        prop_assert!((dm * DVector::from_element(d, 1.0)).amax() <= 1e-10);
        prop_assert!((law.pi().transpose() * dm).amax() <= 1e-10);
    }

    #[test]
    fn stationary_law_matches_power_iteration(g in generator_strategy()) {
        let law = stationary_distribution(&g).unwrap();
        let oracle = stationary_by_power(g.rates());
        for (a, b) in law.as_slice().iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
        prop_assert!((law.pi().transpose() * g.rates()).amax() <= 1e-12);
    }

    #[test]
    fn covariance_is_symmetric_psd_with_zero_rows(g in generator_strategy()) {
        let d = g.dim();
        let law = stationary_distribution(&g).unwrap();
        let c = covariance_c(&law, &deviation_matrix(&g, &law).unwrap()).unwrap();
        let cm = c.matrix();
        prop_assert!((cm - cm.transpose()).amax() <= 1e-12);
        prop_assert!((cm * DVector::from_element(d, 1.0)).amax() <= 1e-10);
        let eig = cm.clone().symmetric_eigen();
        prop_assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-10));
    }

    #[test]
    fn thorn_ignores_constant_shifts(g in generator_strategy(), shift in 0.0f64..10.0, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(0.0..5.0)).collect();
        let shifted: Vec<f64> = lambda.iter().map(|l| l + shift).collect();
        let law = stationary_distribution(&g).unwrap();
        let c = covariance_c(&law, &deviation_matrix(&g, &law).unwrap()).unwrap();
        let (a, b) = (thorn(&lambda, &c).unwrap(), thorn(&shifted, &c).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn transient_matrix_matches_taylor_oracle(g in generator_strategy(), t in 0.0f64..5.0) {
        let p = transient_matrix(&g, t).unwrap();
        let oracle = expm(g.rates(), t);
        prop_assert!((&p - &oracle).amax() <= 1e-10);
        for i in 0..g.dim() {
            prop_assert!((p.row(i).sum() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn deviation_matches_quadrature_for_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [2, 3, 4] {
        let g = random_generator(&mut rng, d);
        let law = stationary_distribution(&g).unwrap();
        let dev = deviation_matrix(&g, &law).unwrap();
        let quad = deviation_by_quadrature(g.rates(), law.as_slice(), 60.0, 24_000);
        assert!((dev.matrix() - &quad).amax() < 1e-6, "d={d}");
    }
}

#[test]
fn two_state_deviation_closed_form() {
    let g = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]]).unwrap();
    let law = stationary_distribution(&g).unwrap();
    let dev = deviation_matrix(&g, &law).unwrap();
    // (I − Π)/(a + b) for a two-state chain with rates a, b.
    let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -3.0, 3.0]) / 16.0;
    assert!((dev.matrix() - want).amax() < 1e-14);
}

#[test]
fn rejects_invalid_generators() {
    assert!(matches!(
        Generator::from_rows(&[vec![-1.0, 1.0], vec![0.0, 0.0]]),
        Err(Error::Reducible { .. })
    ));
    assert!(matches!(
        Generator::from_rows(&[vec![-1.0, 1.0], vec![2.0, -3.0]]),
        Err(Error::RowSumViolation { row: 1, .. })
    ));
    assert!(matches!(
        Generator::from_rows(&[vec![1.0, -1.0], vec![2.0, -2.0]]),
        Err(Error::NegativeRate { .. })
    ));
    assert!(matches!(
        Generator::from_rows(&[vec![-1.0, 1.0]]),
        Err(Error::NotSquare { .. })
    ));
}
