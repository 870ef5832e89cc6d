use mmisq_core::experiments::{verify_u_clt, verify_z_clt, UCltDesign};
use mmisq_core::simulator::{
    quadratic_variation, replication_seeds, simulate_path, simulate_paths,
};
use mmisq_core::{fluid_limit, Error, ModelSpec, ScalingSpec, Thresholds, TimeGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_invariants(seed in any::<u64>(), n in 1u64..300, alpha in 0.2f64..2.0) {
        let m = ModelSpec::two_state_example();
        let s = ScalingSpec::new(n, alpha).unwrap();
        let grid = TimeGrid::uniform(1.0, 0.25).unwrap();
        let p = simulate_path(&m, &s, 1.0, &grid, seed).unwrap();
        for (t, z) in p.grid.iter().zip(&p.z_path) {
            prop_assert!((z.iter().sum::<f64>() - t).abs() <= 1e-12 * (1.0 + t));
            prop_assert!(z.iter().all(|&x| x >= 0.0));
        }
        let c = &p.event_counts;
        let m0 = m.initial_count(n);
        prop_assert_eq!(m0 + c.arrivals - c.departures, *p.m_path.last().unwrap());
        prop_assert_eq!(c.transitions.iter().sum::<u64>(), c.background_jumps);
        prop_assert_eq!(p, simulate_path(&m, &s, 1.0, &grid, seed).unwrap());
    }
}

#[test]
fn scaled_queue_follows_fluid_limit() {
    let m = ModelSpec::two_state_example();
    let s = ScalingSpec::new(20_000, 1.5).unwrap();
    let grid = TimeGrid::uniform(3.0, 0.5).unwrap();
    let p = simulate_path(&m, &s, 3.0, &grid, 8).unwrap();
    for (t, &count) in p.grid.iter().zip(&p.m_path) {
        assert!(
            (count as f64 / 20_000.0 - fluid_limit(&m, *t)).abs() < 0.03,
            "t={t}"
        );
    }
}

#[test]
fn quadratic_variation_grows_linearly() {
    // Per unit time, N^{-α}·Σ(f_j − f_i)²·jumps(i→j) tends to Σ_i π_i Σ_j q_ij (f_j − f_i)².
    let m = ModelSpec::two_state_example();
    let s = ScalingSpec::new(1000, 1.5).unwrap();
    let grid = TimeGrid::uniform(2.0, 1.0).unwrap();
    let f = [0.5, -1.5];
    let p = simulate_path(&m, &s, 2.0, &grid, 4).unwrap();
    let qv = quadratic_variation(&p, &f, &s).unwrap();
    let rate = 0.75 * 1.0 * 4.0 + 0.25 * 3.0 * 4.0;
    assert!((qv / 2.0 - rate).abs() / rate < 0.03, "qv {qv}");
}

#[test]
fn paths_are_independent_of_scheduling() {
    let m = ModelSpec::two_state_example();
    let s = ScalingSpec::new(50, 1.0).unwrap();
    let grid = TimeGrid::uniform(1.0, 0.5).unwrap();
    let seeds = replication_seeds(17, 32);
    let batch = simulate_paths(&m, &s, 1.0, &grid, &seeds).unwrap();
    for (p, &seed) in batch.iter().zip(&seeds) {
        assert_eq!(*p, simulate_path(&m, &s, 1.0, &grid, seed).unwrap());
    }
}

#[test]
fn clt_drivers_need_enough_paths() {
    let m = ModelSpec::two_state_example();
    let s = ScalingSpec::new(10, 1.0).unwrap();
    assert!(matches!(
        verify_z_clt(&m, &[s], 1.0, 999, 1, &Thresholds::default()),
        Err(Error::InsufficientPaths {
            needed: 1000,
            got: 999
        })
    ));
    let design = UCltDesign {
        alpha: 1.0,
        n_list: vec![10],
        t_list: vec![1.0],
        lag: None,
        replications: 10,
        base_seed: 1,
    };
    assert!(verify_u_clt(&m, &design, &Thresholds::default()).is_err());
}

#[test]
fn queue_clt_with_lag_covariance() {
    let m = ModelSpec::two_state_example();
    let design = UCltDesign {
        alpha: 1.5,
        n_list: vec![400],
        t_list: vec![0.5, 1.0],
        lag: Some((1.0, 0.5)),
        replications: 4000,
        base_seed: 5,
    };
    let report = verify_u_clt(&m, &design, &Thresholds::default()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.lags.len(), 1);
    assert!((report.beta - 0.5).abs() < 1e-15);
    for c in &report.checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}
