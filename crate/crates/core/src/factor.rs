//! Four-factor asset-pricing regressions and the residual panel they leave.
//!
//! Each index return is regressed on the US and EU market excess returns and
//! on the US and *excess* EU volatility shocks. The excess EU shock is the
//! part of the raw EU shock not explained by the US shock. Volatility shocks
//! are inputs; nothing here estimates them.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panel::{Panel, ResidualPanel, ReturnPanel};
use crate::regression::{ols_fit, ols_standard_errors, DesignMatrix};

/// Factor series aligned by date.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPanel {
    pub dates: Vec<NaiveDate>,
    pub x_us: Vec<f64>,
    pub x_eu: Vec<f64>,
    pub delta_us: Vec<f64>,
    pub delta_eu_raw: Vec<f64>,
}

impl FactorPanel {
    pub fn new(
        dates: Vec<NaiveDate>,
        x_us: Vec<f64>,
        x_eu: Vec<f64>,
        delta_us: Vec<f64>,
        delta_eu_raw: Vec<f64>,
    ) -> Result<Self> {
        let n = dates.len();
        for (name, s) in [
            ("x_us", &x_us),
            ("x_eu", &x_eu),
            ("delta_us", &delta_us),
            ("delta_eu", &delta_eu_raw),
        ] {
            if s.len() != n {
                return Err(Error::Dimension(format!(
                    "factor `{name}` has {} values for {n} dates",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("factor `{name}` has missing values")));
            }
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("factor dates not strictly increasing".into()));
        }
        Ok(FactorPanel {
            dates,
            x_us,
            x_eu,
            delta_us,
            delta_eu_raw,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Orthogonalises the EU shock and builds the regression design.
    pub fn design(&self, options: FactorModelOptions) -> Result<FactorDesign> {
        let delta_eu = excess_eu_volatility(&self.delta_us, &self.delta_eu_raw)?;
        let columns = [
            self.x_us.clone(),
            self.x_eu.clone(),
            self.delta_us.clone(),
            delta_eu,
        ];
        let design = DesignMatrix::from_columns(self.len(), &columns, options.intercept)?;
        Ok(FactorDesign {
            dates: self.dates.clone(),
            design,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorModelOptions {
    /// Estimate an intercept alongside the four loadings.
    pub intercept: bool,
}

impl Default for FactorModelOptions {
    fn default() -> Self {
        FactorModelOptions { intercept: true }
    }
}

/// The four-factor design (`x_us`, `x_eu`, `δ_us`, excess `δ_eu`), with the
/// EU shock already orthogonalised.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorDesign {
    dates: Vec<NaiveDate>,
    design: DesignMatrix,
}

impl FactorDesign {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn matrix(&self) -> &DesignMatrix {
        &self.design
    }

    /// Factor column `f` (0 = `x_us` … 3 = excess `δ_eu`).
    pub fn factor(&self, f: usize) -> Vec<f64> {
        let offset = usize::from(self.design.intercept_included());
        self.design.values().column(offset + f).iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    pub index_id: String,
    pub beta_us: f64,
    pub beta_eu: f64,
    pub gamma_us: f64,
    pub gamma_eu: f64,
    pub intercept: Option<f64>,
    /// Standard errors of `[beta_us, beta_eu, gamma_us, gamma_eu]`.
    pub standard_errors: [f64; 4],
    pub residuals: Vec<f64>,
}

impl FactorFit {
    pub fn loadings(&self) -> [f64; 4] {
        [self.beta_us, self.beta_eu, self.gamma_us, self.gamma_eu]
    }
}

/// Residual of the raw EU volatility shock after OLS on an intercept and the
/// US shock.
pub fn excess_eu_volatility(delta_us: &[f64], delta_eu_raw: &[f64]) -> Result<Vec<f64>> {
    if delta_us.len() != delta_eu_raw.len() {
        return Err(Error::Dimension(format!(
            "volatility shocks differ in length ({} vs {})",
            delta_us.len(),
            delta_eu_raw.len()
        )));
    }
    if delta_us.len() < 3 {
        return Err(Error::InvalidInput(
            "need at least 3 observations to orthogonalise volatility shocks".into(),
        ));
    }
    let x = DesignMatrix::from_columns(delta_us.len(), &[delta_us], true)?;
    Ok(ols_fit(&x, delta_eu_raw)?.residuals)
}

pub fn fit_four_factor(index_id: &str, y: &[f64], factors: &FactorDesign) -> Result<FactorFit> {
    let x = factors.matrix();
    let fit = ols_fit(x, y).map_err(|e| match e {
        Error::RankDeficient { columns } => {
            let names = ["intercept", "x_us", "x_eu", "delta_us", "delta_eu"];
            let offset = usize::from(!x.intercept_included());
            let named: Vec<&str> = columns.iter().map(|&c| names[c + offset]).collect();
            Error::Numerical(format!("collinear factors: {}", named.join(", ")))
        }
        other => other,
    })?;
    let se = ols_standard_errors(x, &fit)?;
    let offset = usize::from(x.intercept_included());
    let c = &fit.coefficients;
    Ok(FactorFit {
        index_id: index_id.to_string(),
        beta_us: c[0],
        beta_eu: c[1],
        gamma_us: c[2],
        gamma_eu: c[3],
        intercept: fit.intercept,
        standard_errors: [se[offset], se[offset + 1], se[offset + 2], se[offset + 3]],
        residuals: fit.residuals,
    })
}

/// Fits every return column and assembles the residuals into a panel with the
/// same dates and labels.
pub fn build_residual_panel(
    returns: &ReturnPanel,
    factors: &FactorPanel,
    options: FactorModelOptions,
) -> Result<(ResidualPanel, Vec<FactorFit>)> {
    if returns.dates() != factors.dates.as_slice() {
        return Err(Error::InvalidInput(
            "return and factor panels are not aligned on the same dates".into(),
        ));
    }
    let design = factors.design(options)?;
    let fits: Vec<FactorFit> = returns
        .labels()
        .par_iter()
        .zip(returns.columns().par_iter())
        .map(|(label, col)| fit_four_factor(label, col, &design).map_err(|e| e.in_column(label)))
        .collect::<Result<_>>()?;
    let panel = Panel::new(
        returns.dates().to_vec(),
        returns.labels().to_vec(),
        fits.iter().map(|f| f.residuals.clone()).collect(),
    )?;
    Ok((panel, fits))
}
