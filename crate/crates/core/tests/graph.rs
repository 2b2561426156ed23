mod common;

use nalgebra::DMatrix;
use partition_core::graph::{
    coefficient_series, empty_graph_test, graph_snapshot, rolling_graphs, window_count, EdgeRule, Estimator,
    GraphOptions, WindowSpec,
};
use partition_core::pipeline::simulate::{simulate_contagion, ContagionSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn options(estimator: Estimator) -> GraphOptions {
    GraphOptions {
        estimator,
        edge_rule: EdgeRule::And,
        parallel: false,
    }
}

#[test]
fn saturated_graph_inverts_the_scaled_sample_covariance() {
    let sim = simulate_contagion(&ContagionSpec::block_sparse(6, 200, 0.4), 1).unwrap();
    let panel = &sim.returns;
    let (n, p) = (panel.n_obs(), panel.n_cols());
    let snap = graph_snapshot(panel, 0, options(Estimator::Ols)).unwrap();
    assert_eq!(snap.adjacency.edge_count(), p * (p - 1) / 2);
    assert_eq!(snap.pd_shift, 0.0);
    let s = common::covariance(panel.columns(), (n - p) as f64);
    let omega = s.clone().try_inverse().unwrap();
    assert!((&snap.precision - &omega).amax() < 1e-9 * omega.amax());
    assert!((&snap.sigma - &s).amax() < 1e-9 * s.amax());
}

#[test]
fn sigma_inverts_precision_and_respects_zero_pattern() {
    let sim = simulate_contagion(&ContagionSpec::block_sparse(10, 150, 0.4), 2).unwrap();
    let snap = graph_snapshot(&sim.returns, 0, options(Estimator::BicSubset)).unwrap();
    let id = &snap.sigma * &snap.precision;
    assert!((id - DMatrix::identity(10, 10)).amax() < 1e-8);
    assert!(snap.adjacency.is_symmetric());
    for i in 0..10 {
        for j in 0..10 {
            if i != j && !snap.adjacency.get(i, j) {
                assert_eq!(snap.precision[(i, j)], 0.0);
            }
        }
        assert_eq!(snap.neighborhoods[i].candidates_evaluated, 512);
    }
    assert!((&snap.sigma - snap.sigma.transpose()).amax() == 0.0);
}

#[test]
fn or_rule_contains_and_rule() {
    let sim = simulate_contagion(&ContagionSpec::block_sparse(8, 150, 0.3), 3).unwrap();
    let and = graph_snapshot(&sim.returns, 0, options(Estimator::BicSubset)).unwrap();
    let or = graph_snapshot(
        &sim.returns,
        0,
        GraphOptions {
            edge_rule: EdgeRule::Or,
            ..options(Estimator::BicSubset)
        },
    )
    .unwrap();
    for (i, j) in and.adjacency.edges() {
        assert!(or.adjacency.get(i, j));
    }
    assert!(or.adjacency.is_symmetric());
}

#[test]
fn duplicate_column_is_a_numerical_failure() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a: Vec<f64> = (0..60).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..60).map(|_| rng.sample(StandardNormal)).collect();
    let panel = common::panel(vec![a.clone(), b, a]);
    let err = graph_snapshot(&panel, 0, options(Estimator::BicSubset)).unwrap_err();
    assert!(err.is_numerical(), "{err}");
    assert_eq!(err.exit_code(), 3);
    assert!(empty_graph_test(&panel).unwrap_err().is_numerical());
}

#[test]
fn serial_and_parallel_runs_agree() {
    let sim = simulate_contagion(&ContagionSpec::regime_flip(5, 400, 200, 0.4), 5).unwrap();
    let spec = WindowSpec { length: 100, step: 10 };
    let serial = rolling_graphs(&sim.returns, spec, options(Estimator::BicSubset)).unwrap();
    let parallel = rolling_graphs(
        &sim.returns,
        spec,
        GraphOptions {
            parallel: true,
            ..options(Estimator::BicSubset)
        },
    )
    .unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial.len(), window_count(400, spec));
    assert_eq!(serial.len(), 31);
}

#[test]
fn regime_flip_changes_coefficient_sign() {
    let spec = ContagionSpec::regime_flip(4, 600, 300, 0.45);
    let sim = simulate_contagion(&spec, 6).unwrap();
    let snaps = rolling_graphs(&sim.returns, WindowSpec { length: 150, step: 5 }, options(Estimator::BicSubset)).unwrap();
    let labels = sim.returns.labels();
    let series = coefficient_series(&snaps, &labels[0], &labels[2]).unwrap();
    assert!(series[0] > 0.0, "first window coefficient {}", series[0]);
    assert!(*series.last().unwrap() < 0.0);
}

#[test]
fn penalised_estimators_produce_valid_snapshots() {
    let sim = simulate_contagion(&ContagionSpec::block_sparse(6, 150, 0.4), 7).unwrap();
    for est in [Estimator::Ridge { lambda: 1.0 }, Estimator::Lasso { lambda: 0.1 }] {
        let snap = graph_snapshot(&sim.returns, 0, options(est)).unwrap();
        assert!(snap.adjacency.is_symmetric());
        let id = &snap.sigma * &snap.precision;
        assert!((id - DMatrix::identity(6, 6)).amax() < 1e-8);
    }
    let lasso_big = graph_snapshot(&sim.returns, 0, options(Estimator::Lasso { lambda: 10.0 })).unwrap();
    assert_eq!(lasso_big.adjacency.edge_count(), 0);
}

#[test]
fn short_windows_are_rejected() {
    let sim = simulate_contagion(&ContagionSpec::identity(10, 300), 8).unwrap();
    let bad = WindowSpec { length: 11, step: 5 };
    assert!(rolling_graphs(&sim.returns, bad, options(Estimator::Ols)).is_err());
    let too_long = WindowSpec { length: 301, step: 5 };
    assert!(rolling_graphs(&sim.returns, too_long, options(Estimator::Ols)).is_err());
}
