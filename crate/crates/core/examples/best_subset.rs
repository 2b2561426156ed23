//! Exhaustive BIC search over nine predictors, compared with OLS, ridge and lasso.
//!
//! cargo run --example best_subset

use partition_core::regression::{best_subset_bic, lasso_fit, ols_fit, ridge_fit, DesignMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> partition_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 150;
    let cols: Vec<Vec<f64>> = (0..9)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|t| 0.3 + 0.9 * cols[1][t] - 0.6 * cols[4][t] + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let x = DesignMatrix::from_columns(n, &cols, true)?;

    let best = best_subset_bic(&x, &y)?;
    println!(
        "best subset (design columns) {:?}, BIC {:.2}, {} candidates",
        best.subset, best.bic, best.candidates_evaluated
    );
    for (c, b) in best.subset.iter().zip(&best.fit.coefficients) {
        println!("  x{} = {b:+.3}", c - 1);
    }

    let show = |name: &str, coefs: &[f64]| {
        let s: Vec<String> = coefs.iter().map(|b| format!("{b:+.2}")).collect();
        println!("{name:>6}: [{}]", s.join(", "));
    };
    show("ols", &ols_fit(&x, &y)?.coefficients);
    show("ridge", &ridge_fit(&x, &y, 10.0)?.coefficients);
    show("lasso", &lasso_fit(&x, &y, 0.1)?.coefficients);
    Ok(())
}
