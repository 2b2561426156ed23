mod common;

use nalgebra::DMatrix;
use partition_core::factor::{
    build_residual_panel, excess_eu_volatility, fit_four_factor, FactorModelOptions, FactorPanel,
};
use partition_core::pipeline::simulate::{simulate_contagion, ContagionSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn random_factors(rng: &mut ChaCha8Rng, n: usize) -> FactorPanel {
    let x_us = normals(rng, n);
    let x_eu: Vec<f64> = x_us.iter().map(|v| 0.5 * v + rng.sample::<f64, _>(StandardNormal)).collect();
    let d_us = normals(rng, n);
    let d_eu: Vec<f64> = d_us.iter().map(|v| 0.3 + 0.9 * v + rng.sample::<f64, _>(StandardNormal)).collect();
    FactorPanel::new(common::dates(n), x_us, x_eu, d_us, d_eu).unwrap()
}

#[test]
fn excess_shock_is_orthogonal_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_factors(&mut rng, 500);
    let e = excess_eu_volatility(&f.delta_us, &f.delta_eu_raw).unwrap();
    assert!(e.iter().sum::<f64>().abs() < 1e-9);
    assert!(dot(&e, &f.delta_us).abs() < 1e-9);
    let again = excess_eu_volatility(&f.delta_us, &e).unwrap();
    for (a, b) in again.iter().zip(&e) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn white_noise_returns_have_insignificant_loadings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 10_000;
    let f = random_factors(&mut rng, n);
    let design = f.design(FactorModelOptions::default()).unwrap();
    let y = normals(&mut rng, n);
    let fit = fit_four_factor("noise", &y, &design).unwrap();
    for (b, se) in fit.loadings().iter().zip(&fit.standard_errors) {
        assert!(b.abs() < 3.0 * se, "loading {b} vs se {se}");
    }
}

#[test]
fn planted_loadings_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 5_000;
    let f = random_factors(&mut rng, n);
    let design = f.design(FactorModelOptions::default()).unwrap();
    let truth = [1.2, 0.7, -0.4, 0.25];
    let y: Vec<f64> = (0..n)
        .map(|t| {
            0.05 + (0..4).map(|k| truth[k] * design.factor(k)[t]).sum::<f64>()
                + 0.5 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let fit = fit_four_factor("idx", &y, &design).unwrap();
    for ((b, se), t) in fit.loadings().iter().zip(&fit.standard_errors).zip(truth) {
        assert!((b - t).abs() < 4.0 * se, "{b} vs {t} (se {se})");
    }
}

#[test]
fn residual_panel_is_orthogonal_to_factors() {
    let sim = simulate_contagion(&ContagionSpec::block_sparse(6, 400, 0.4).with_factors(), 4).unwrap();
    let factors = sim.factors.unwrap();
    let (resid, fits) = build_residual_panel(&sim.returns, &factors, FactorModelOptions::default()).unwrap();
    let design = factors.design(FactorModelOptions::default()).unwrap();
    assert_eq!(fits.len(), 6);
    for col in resid.columns() {
        assert!(col.iter().sum::<f64>().abs() < 1e-8);
        for k in 0..4 {
            assert!(dot(col, &design.factor(k)).abs() < 1e-8);
        }
    }
    // Refitting residuals leaves them unchanged.
    let (twice, _) = build_residual_panel(&resid, &factors, FactorModelOptions::default()).unwrap();
    for (a, b) in twice.columns().iter().zip(resid.columns()) {
        assert!(a.iter().zip(b).all(|(u, v)| (u - v).abs() < 1e-10));
    }
}

#[test]
fn residual_covariance_recovers_planted_noise() {
    let p = 6;
    let spec = ContagionSpec::block_sparse(p, 20_000, 0.4).with_factors();
    let sigma_true = spec.regimes[0].precision.clone().try_inverse().unwrap();
    let sim = simulate_contagion(&spec, 5).unwrap();
    let (resid, _) =
        build_residual_panel(&sim.returns, sim.factors.as_ref().unwrap(), FactorModelOptions::default()).unwrap();
    let cov = common::covariance(resid.columns(), (resid.n_obs() - 1) as f64);
    let err: DMatrix<f64> = cov - sigma_true;
    assert!(err.amax() < 0.05, "max covariance error {}", err.amax());
}

#[test]
fn misaligned_dates_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_factors(&mut rng, 50);
    let returns = common::panel(vec![normals(&mut rng, 49)]);
    assert!(build_residual_panel(&returns, &f, FactorModelOptions::default()).is_err());
}

#[test]
fn collinear_factors_are_a_numerical_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = normals(&mut rng, 40);
    let f = FactorPanel::new(common::dates(40), x.clone(), x, normals(&mut rng, 40), normals(&mut rng, 40)).unwrap();
    let design = f.design(FactorModelOptions::default()).unwrap();
    let err = fit_four_factor("idx", &normals(&mut rng, 40), &design).unwrap_err();
    assert!(err.is_numerical());
    assert!(err.to_string().contains("x_eu"));
}
