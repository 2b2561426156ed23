mod common;

use partition_core::changepoint::{
    block_log_marginal, filter_cohort, gamma_conditional, gibbs_screen, gibbs_screen_tables, precompute_marginals,
    sample_omega, screen, DfConvention, FirmSeries, GibbsOptions, Hyper, PosteriorSummary, ScaleConvention,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Scale factor and degrees of freedom the oracle uses for a block of size `d`.
fn conventions(h: &Hyper, d: usize) -> (f64, f64) {
    let c = match h.scale {
        ScaleConvention::ShapeOverScale => h.a / h.b,
        ScaleConvention::ScaleOverShape => h.b / h.a,
    };
    let nu = match h.df {
        DfConvention::ShapePlusBlock => h.a + d as f64,
        DfConvention::Shape => h.a,
    };
    (c, nu)
}

fn oracle_block(y: &[f64], h: &Hyper, signal: bool) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let (c, nu) = conventions(h, y.len());
    common::mvt_log_density(y, nu, &common::block_scale(y.len(), c, h.tau2, signal))
}

fn random_hyper(rng: &mut ChaCha8Rng, n: usize) -> Hyper {
    let mut h = Hyper::defaults(n).unwrap();
    h.a = rng.random_range(0.5..6.0);
    h.b = rng.random_range(0.5..6.0);
    h.tau2 = rng.random_range(0.1..30.0);
    h.df = if rng.random() { DfConvention::ShapePlusBlock } else { DfConvention::Shape };
    h.scale = if rng.random() { ScaleConvention::ShapeOverScale } else { ScaleConvention::ScaleOverShape };
    h
}

#[test]
fn block_marginal_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let h = random_hyper(&mut rng, 5);
        let d = rng.random_range(1..=30);
        let shift = rng.random_range(-3.0..3.0);
        let y: Vec<f64> = (0..d).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect();
        for signal in [true, false] {
            let got = block_log_marginal(&y, &h, signal).unwrap();
            let want = oracle_block(&y, &h, signal);
            assert!((got - want).abs() < 1e-10, "d = {d}: {got} vs {want}");
        }
    }
}

#[test]
fn marginal_table_matches_oracle_with_gaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let n = 12;
    let h = Hyper::defaults(n).unwrap();
    let times = vec![1, 2, 4, 5, 6, 9, 11, 12];
    let values: Vec<f64> = times.iter().map(|&t| if t > 5 { 3.0 } else { 0.0 } + rng.sample::<f64, _>(StandardNormal)).collect();
    let firm = FirmSeries::new("g", times.clone(), values.clone()).unwrap();
    let table = precompute_marginals(&firm, &h).unwrap();
    assert!((table.log_lik[0] - oracle_block(&values, &h, false)).abs() < 1e-10);
    for k in 1..=n {
        let split = times.iter().filter(|&&t| t <= k).count();
        let want = oracle_block(&values[..split], &h, true) + oracle_block(&values[split..], &h, true);
        assert!((table.log_lik[k] - want).abs() < 1e-10, "k = {k}");
    }
    // Year 3 is missing, so splitting after 2 or after 3 is the same partition.
    assert_eq!(table.log_lik[2], table.log_lik[3]);
}

#[test]
fn dirichlet_draws_have_the_right_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let counts = [3usize, 0, 10, 1];
    let alpha = [0.8, 0.05, 0.05, 0.1];
    let conc: Vec<f64> = counts.iter().zip(&alpha).map(|(&c, a)| c as f64 + a).collect();
    let total: f64 = conc.iter().sum();
    let draws = 50_000;
    let mut sum = [0.0; 4];
    let mut sq = [0.0; 4];
    for _ in 0..draws {
        let w = sample_omega(&counts, &alpha, &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..4 {
            sum[k] += w[k];
            sq[k] += w[k] * w[k];
        }
    }
    for k in 0..4 {
        let mean = conc[k] / total;
        let var = mean * (1.0 - mean) / (total + 1.0);
        let m = sum[k] / draws as f64;
        let v = sq[k] / draws as f64 - m * m;
        assert!((m - mean).abs() < 5.0 * (var / draws as f64).sqrt(), "mean[{k}] {m} vs {mean}");
        assert!((v - var).abs() < 0.05 * var, "var[{k}] {v} vs {var}");
    }
}

#[test]
fn tiny_concentrations_still_normalise() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..1000 {
        let w = sample_omega(&[0, 0, 0], &[1e-3, 1e-3, 1e-3], &mut rng);
        assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(w.iter().any(|&v| v > 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn random_firm(rng: &mut ChaCha8Rng, id: usize, n: usize) -> FirmSeries {
    let times: Vec<usize> = (1..=n).filter(|_| rng.random::<f64>() < 0.8).collect();
    let k = rng.random_range(1..n);
    let jump = rng.random_range(-2.0..2.0);
    let values = times
        .iter()
        .map(|&t| if t > k { jump } else { 0.0 } + rng.sample::<f64, _>(StandardNormal))
        .collect();
    FirmSeries::new(format!("f{id}"), times, values).unwrap()
}

#[test]
fn fixed_omega_frequencies_match_exact_conditional() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let n = 8;
    let h = Hyper::defaults(n).unwrap();
    let firms: Vec<FirmSeries> = (0..3).map(|i| random_firm(&mut rng, i, n)).collect();
    let omega: Vec<f64> = (0..=n).map(|k| 1.0 + k as f64).collect();
    let options = GibbsOptions {
        iters: 20_000,
        burn_in: 0,
        seed: 7,
        fixed_omega: Some(omega.clone()),
        parallel: false,
        ..Default::default()
    };
    let res = gibbs_screen(&firms, &h, &options).unwrap();
    let total: f64 = omega.iter().sum();
    let norm: Vec<f64> = omega.iter().map(|w| w / total).collect();
    for (i, f) in firms.iter().enumerate() {
        let exact = gamma_conditional(&precompute_marginals(f, &h).unwrap(), &norm).unwrap();
        assert!(common::total_variation(&res.frequencies[i], &exact) < 0.02);
        assert!(common::total_variation(&res.rao_blackwell[i], &exact) < 1e-12);
    }
}

#[test]
fn seeded_runs_reproduce_and_ignore_threading() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let n = 10;
    let h = Hyper::defaults(n).unwrap();
    let firms: Vec<FirmSeries> = (0..20).map(|i| random_firm(&mut rng, i, n)).collect();
    let base = GibbsOptions {
        iters: 300,
        burn_in: 50,
        seed: 99,
        ..Default::default()
    };
    let a = gibbs_screen(&firms, &h, &GibbsOptions { parallel: true, ..base.clone() }).unwrap();
    let b = gibbs_screen(&firms, &h, &GibbsOptions { parallel: false, ..base.clone() }).unwrap();
    assert_eq!(a, b);
    let c = gibbs_screen(&firms, &h, &GibbsOptions { seed: 100, ..base }).unwrap();
    assert_ne!(a.frequencies, c.frequencies);
}

#[test]
fn posterior_is_invariant_to_rescaling_with_matched_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let n = 10;
    let firm = random_firm(&mut rng, 0, n);
    let c: f64 = 3.7;
    let scaled = FirmSeries::new("s", firm.times.clone(), firm.values.iter().map(|v| c * v).collect()).unwrap();
    let omega: Vec<f64> = vec![1.0 / (n + 1) as f64; n + 1];
    for (scale, b_scaled) in [
        (ScaleConvention::ScaleOverShape, 2.0 * c * c),
        (ScaleConvention::ShapeOverScale, 2.0 / (c * c)),
    ] {
        let mut h = Hyper::defaults(n).unwrap();
        h.scale = scale;
        let mut hs = h.clone();
        hs.b = b_scaled;
        let p = gamma_conditional(&precompute_marginals(&firm, &h).unwrap(), &omega).unwrap();
        let q = gamma_conditional(&precompute_marginals(&scaled, &hs).unwrap(), &omega).unwrap();
        assert!(common::total_variation(&p, &q) < 1e-12, "{scale}");
    }
}

#[test]
fn planted_jump_after_year_ten_is_flagged() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let n = 30;
    let h = Hyper::defaults(n).unwrap();
    let mut firms: Vec<FirmSeries> = (0..60)
        .map(|i| {
            let values = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            FirmSeries::new(format!("n{i:02}"), (1..=n).collect(), values).unwrap()
        })
        .collect();
    let values = (1..=n)
        .map(|t| if t > 10 { 6.0 } else { 0.0 } + rng.sample::<f64, _>(StandardNormal))
        .collect();
    firms.push(FirmSeries::new("jump", (1..=n).collect(), values).unwrap());
    let res = gibbs_screen(&firms, &h, &GibbsOptions { seed: 3, ..Default::default() }).unwrap();
    let hits = screen(&res.posteriors, 0.95).unwrap();
    let jump = hits.iter().find(|e| e.firm_id == "jump").expect("jump firm flagged");
    assert_eq!(jump.changepoint, 10);
    assert_eq!(jump.rank, 1);
}

#[test]
fn rao_blackwell_summary_selects_averaged_conditionals() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let h = Hyper::defaults(6).unwrap();
    let firms: Vec<FirmSeries> = (0..4).map(|i| random_firm(&mut rng, i, 6)).collect();
    let tables: Vec<_> = firms.iter().map(|f| precompute_marginals(f, &h).unwrap()).collect();
    let res = gibbs_screen_tables(
        &tables,
        &h.alpha,
        &GibbsOptions {
            iters: 200,
            burn_in: 20,
            summary: PosteriorSummary::RaoBlackwell,
            ..Default::default()
        },
    )
    .unwrap();
    for (p, rb) in res.posteriors.iter().zip(&res.rao_blackwell) {
        assert_eq!(&p.probs, rb);
    }
    assert_eq!(res.kept_sweeps, 180);
}

#[test]
fn cohort_filter_and_default_prior() {
    let short = FirmSeries::new("s", vec![1, 2], vec![0.0, 1.0]).unwrap();
    let long = FirmSeries::new("l", (1..=25).collect(), vec![0.5; 25]).unwrap();
    let f = filter_cohort(vec![short, long], 20).unwrap();
    assert_eq!(f.dropped, 1);
    assert_eq!(f.retained[0].firm_id, "l");

    let h = Hyper::defaults(30).unwrap();
    assert_eq!((h.a, h.b, h.tau2), (2.0, 2.0, 10.0));
    assert_eq!(h.alpha[0], 0.8);
    assert_eq!(h.alpha[30], 0.1);
    assert!((h.alpha[1] - 0.1 / 29.0).abs() < 1e-15);
    assert!((h.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
