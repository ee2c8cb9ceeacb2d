//! Month × post-break interaction regressions and the tests built on them.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::periodic::MONTHS;
use crate::stats::ols::{ols_hc1_named, OlsFit};
use crate::stats::SeasonalComponents;

const FREE: usize = MONTHS - 1;

/// First half of the year minus the second half, averaged over six months each.
pub const H1_MINUS_H2: [f64; MONTHS] = [
    1.0 / 6.0,
    1.0 / 6.0,
    1.0 / 6.0,
    1.0 / 6.0,
    1.0 / 6.0,
    1.0 / 6.0,
    -1.0 / 6.0,
    -1.0 / 6.0,
    -1.0 / 6.0,
    -1.0 / 6.0,
    -1.0 / 6.0,
    -1.0 / 6.0,
];

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRegressionFit {
    /// Month effects, summing to zero.
    pub gamma: [f64; MONTHS],
    /// Month × post interactions, summing to zero.
    pub mu: [f64; MONTHS],
    /// Post main effect. Absorbed by the year effects when those are included.
    pub psi: Option<f64>,
    pub intercept: Option<f64>,
    pub alpha: Vec<(i32, f64)>,
    pub break_year: i32,
    pub include_year_effects: bool,
    pub ols: OlsFit,
    pub gamma_columns: Range<usize>,
    pub mu_columns: Range<usize>,
}

impl ShiftRegressionFit {
    pub fn df_resid(&self) -> usize {
        self.ols.df_resid
    }

    pub fn n_obs(&self) -> usize {
        self.ols.n_obs
    }

    /// Covariance of the 11 free interaction coefficients.
    pub fn mu_covariance(&self) -> DMatrix<f64> {
        let r = &self.mu_columns;
        self.ols
            .covariance
            .view((r.start, r.start), (r.len(), r.len()))
            .into_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    /// Absent for t tests.
    pub df_numerator: Option<f64>,
    pub df_denominator: f64,
    pub one_sided: bool,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalDelta {
    pub winter: f64,
    pub spring: f64,
    pub summer: f64,
    pub autumn: f64,
}

/// Months of each meteorological season (Dec–Feb, Mar–May, Jun–Aug, Sep–Nov).
pub const SEASONS: [(&str, [u32; 3]); 4] = [
    ("winter", [12, 1, 2]),
    ("spring", [3, 4, 5]),
    ("summer", [6, 7, 8]),
    ("autumn", [9, 10, 11]),
];

/// Sum-to-zero month coding: column `j` is `1{m = j} − 1{m = 12}`.
fn effect_code(month: u32, j: usize) -> f64 {
    if month as usize == j + 1 {
        1.0
    } else if month as usize == MONTHS {
        -1.0
    } else {
        0.0
    }
}

fn expand_free(free: &[f64]) -> [f64; MONTHS] {
    let mut out = [0.0; MONTHS];
    out[..FREE].copy_from_slice(free);
    out[FREE] = -free.iter().sum::<f64>();
    out
}

/// Fits `d = [α_T] + γ_m + [ψ·POST] + μ_m·POST + e` with sum-to-zero γ and μ.
///
/// With year effects the design carries one dummy per year and no intercept;
/// POST is then a sum of year dummies and is left out, so `psi` is `None`.
/// Without year effects the design is intercept, 11 γ, POST, 11 μ.
pub fn fit_seasonal_shift(
    components: &SeasonalComponents,
    break_year: i32,
    include_year_effects: bool,
) -> Result<ShiftRegressionFit> {
    let obs = &components.observations;
    let n_pre = obs.iter().filter(|d| d.year < break_year).count();
    if n_pre == 0 || n_pre == obs.len() {
        return Err(Error::InsufficientData(format!(
            "observations must span both sides of the {break_year} break"
        )));
    }

    let years: Vec<i32> = {
        let mut y: Vec<i32> = obs.iter().map(|d| d.year).collect();
        y.sort_unstable();
        y.dedup();
        y
    };

    let mut names = Vec::new();
    if include_year_effects {
        names.extend(years.iter().map(|y| format!("year_{y}")));
    } else {
        names.push("intercept".to_string());
    }
    let gamma_start = names.len();
    names.extend((1..=FREE).map(|m| format!("month_{m}")));
    let post_col = (!include_year_effects).then(|| {
        names.push("post".to_string());
        names.len() - 1
    });
    let mu_start = names.len();
    names.extend((1..=FREE).map(|m| format!("post_x_month_{m}")));
    let k = names.len();

    let mut design = DMatrix::zeros(obs.len(), k);
    let response = DVector::from_iterator(obs.len(), obs.iter().map(|d| d.value));
    for (i, d) in obs.iter().enumerate() {
        if include_year_effects {
            let idx = years.binary_search(&d.year).expect("year collected above");
            design[(i, idx)] = 1.0;
        } else {
            design[(i, 0)] = 1.0;
        }
        let post = if d.year >= break_year { 1.0 } else { 0.0 };
        if let Some(c) = post_col {
            design[(i, c)] = post;
        }
        for j in 0..FREE {
            let code = effect_code(d.month, j);
            design[(i, gamma_start + j)] = code;
            design[(i, mu_start + j)] = code * post;
        }
    }

    let ols = ols_hc1_named(&design, &response, &names)?;
    let b = &ols.coefficients;
    let gamma = expand_free(&b.as_slice()[gamma_start..gamma_start + FREE]);
    let mu = expand_free(&b.as_slice()[mu_start..mu_start + FREE]);
    let alpha = if include_year_effects {
        years.iter().enumerate().map(|(i, &y)| (y, b[i])).collect()
    } else {
        Vec::new()
    };
    Ok(ShiftRegressionFit {
        gamma,
        mu,
        psi: post_col.map(|c| b[c]),
        intercept: (!include_year_effects).then(|| b[0]),
        alpha,
        break_year,
        include_year_effects,
        gamma_columns: gamma_start..gamma_start + FREE,
        mu_columns: mu_start..mu_start + FREE,
        ols,
    })
}

/// Robust Wald test of `μ_1 = … = μ_12 = 0`, reported as `W/11 ~ F(11, n−k)`.
pub fn joint_f_test(fit: &ShiftRegressionFit) -> Result<TestReport> {
    if fit.ols.residuals_negligible() {
        return Err(Error::SingularCovariance);
    }
    let mu_free = DVector::from_column_slice(&fit.mu[..FREE]);
    let cov = fit.mu_covariance();
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
    let wald = mu_free.dot(&chol.solve(&mu_free));
    if !wald.is_finite() {
        return Err(Error::SingularCovariance);
    }
    let f = wald.max(0.0) / FREE as f64;
    let df = fit.df_resid() as f64;
    let dist = FisherSnedecor::new(FREE as f64, df).map_err(|e| Error::domain(e.to_string()))?;
    Ok(TestReport {
        statistic: f,
        p_value: dist.sf(f).clamp(0.0, 1.0),
        df_numerator: Some(FREE as f64),
        df_denominator: df,
        one_sided: false,
        description: "joint robust F test of all month x post interactions".into(),
    })
}

/// Estimate and HC1 standard error of `Σ_m w_m μ_m` for any weights on the
/// 12 interactions.
pub fn linear_contrast(fit: &ShiftRegressionFit, weights: &[f64; MONTHS]) -> Result<(f64, f64)> {
    // μ_12 = −Σ free, so the gradient on free coefficient j is w_j − w_12.
    if fit.ols.residuals_negligible() {
        return Err(Error::SingularCovariance);
    }
    let grad = DVector::from_iterator(FREE, (0..FREE).map(|j| weights[j] - weights[FREE]));
    let estimate: f64 = weights.iter().zip(fit.mu.iter()).map(|(w, m)| w * m).sum();
    let var = grad.dot(&(fit.mu_covariance() * &grad));
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::SingularCovariance);
    }
    Ok((estimate, var.sqrt()))
}

/// One-sided t test of `mean(μ_Jan..Jun) − mean(μ_Jul..Dec) > 0`.
pub fn directional_contrast(fit: &ShiftRegressionFit) -> Result<TestReport> {
    let (c, se) = linear_contrast(fit, &H1_MINUS_H2)?;
    let t = c / se;
    let df = fit.df_resid() as f64;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::domain(e.to_string()))?;
    Ok(TestReport {
        statistic: t,
        p_value: dist.sf(t).clamp(0.0, 1.0),
        df_numerator: None,
        df_denominator: df,
        one_sided: true,
        description: "one-sided t test that Jan-Jun interactions exceed Jul-Dec".into(),
    })
}

/// Post-minus-pre change in the mean deviation over each season's months.
pub fn seasonal_delta(components: &SeasonalComponents, break_year: i32) -> Result<SeasonalDelta> {
    let mut out = [0.0; 4];
    for (slot, (name, months)) in out.iter_mut().zip(SEASONS.iter()) {
        let cell_mean = |post: bool| -> Result<f64> {
            let (sum, count) = components
                .observations
                .iter()
                .filter(|d| (d.year >= break_year) == post && months.contains(&d.month))
                .fold((0.0, 0usize), |(s, c), d| (s + d.value, c + 1));
            if count == 0 {
                let side = if post { "post" } else { "pre" };
                return Err(Error::InsufficientData(format!(
                    "no {side}-{break_year} observations in {name}"
                )));
            }
            Ok(sum / count as f64)
        };
        *slot = cell_mean(true)? - cell_mean(false)?;
    }
    Ok(SeasonalDelta {
        winter: out[0],
        spring: out[1],
        summer: out[2],
        autumn: out[3],
    })
}

/// Everything a Table-1 style row needs from one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSummary {
    pub break_year: i32,
    pub include_year_effects: bool,
    pub n_obs: usize,
    pub df_resid: usize,
    pub gamma: [f64; MONTHS],
    pub mu: [f64; MONTHS],
    pub psi: Option<f64>,
    pub joint_f: TestReport,
    pub directional: TestReport,
    pub seasonal_delta: SeasonalDelta,
}

/// Fit, joint F, directional contrast and seasonal deltas in one call.
pub fn shift_battery(
    components: &SeasonalComponents,
    break_year: i32,
    include_year_effects: bool,
) -> Result<ShiftSummary> {
    let fit = fit_seasonal_shift(components, break_year, include_year_effects)?;
    Ok(ShiftSummary {
        break_year,
        include_year_effects,
        n_obs: fit.n_obs(),
        df_resid: fit.df_resid(),
        gamma: fit.gamma,
        mu: fit.mu,
        psi: fit.psi,
        joint_f: joint_f_test(&fit)?,
        directional: directional_contrast(&fit)?,
        seasonal_delta: seasonal_delta(components, break_year)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Deviation;

    fn profile(m: u32) -> f64 {
        5.0 * (2.0 * std::f64::consts::PI * m as f64 / 12.0).sin()
    }

    /// Alternating-sign noise orthogonal to every design column.
    fn orthogonal_noise(year: i32, month: u32) -> f64 {
        let sign = if year % 2 == 0 { 1.0 } else { -1.0 };
        let c = if month.is_multiple_of(2) { 0.3 } else { -0.3 };
        sign * c
    }

    fn panel(shift: impl Fn(u32) -> f64, noise: bool) -> SeasonalComponents {
        let mut obs = Vec::new();
        for year in 2013..2025 {
            for month in 1..=12 {
                let mut v = profile(month);
                if year >= 2021 {
                    v += shift(month);
                }
                if noise {
                    v += orthogonal_noise(year, month);
                }
                obs.push(Deviation {
                    year,
                    month,
                    value: v,
                });
            }
        }
        SeasonalComponents::from_observations(obs)
    }

    #[test]
    fn no_shift_gives_zero_mu() {
        for fe in [true, false] {
            let fit = fit_seasonal_shift(&panel(|_| 0.0, false), 2021, fe).unwrap();
            assert!(fit.mu.iter().all(|m| m.abs() < 1e-9));
            for (m, g) in fit.gamma.iter().enumerate() {
                assert!((g - profile(m as u32 + 1)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constructed_shift_recovered() {
        let shift = |m: u32| match m {
            3 => 2.0,
            6 => -2.0,
            _ => 0.0,
        };
        let fit = fit_seasonal_shift(&panel(shift, false), 2021, true).unwrap();
        for m in 1..=12 {
            assert!((fit.mu[m as usize - 1] - shift(m)).abs() < 1e-9);
        }
        assert!(fit.psi.is_none());
        assert_eq!(fit.alpha.len(), 12);
    }

    #[test]
    fn orthogonal_noise_gives_null_statistics() {
        let fit = fit_seasonal_shift(&panel(|_| 0.0, true), 2021, true).unwrap();
        let f = joint_f_test(&fit).unwrap();
        assert!(f.statistic < 1e-12);
        assert!((f.p_value - 1.0).abs() < 1e-9);
        let t = directional_contrast(&fit).unwrap();
        assert!(t.statistic.abs() < 1e-9);
        assert!((t.p_value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn march_september_contrast() {
        let shift = |m: u32| match m {
            3 => 2.0,
            9 => -2.0,
            _ => 0.0,
        };
        let fit = fit_seasonal_shift(&panel(shift, true), 2021, true).unwrap();
        let (c, _) = linear_contrast(&fit, &H1_MINUS_H2).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-9);
        assert!(directional_contrast(&fit).unwrap().statistic > 0.0);
    }

    #[test]
    fn zero_residuals_make_covariance_singular() {
        let fit = fit_seasonal_shift(&panel(|_| 0.0, false), 2021, true).unwrap();
        assert!(matches!(joint_f_test(&fit), Err(Error::SingularCovariance)));
    }

    #[test]
    fn break_outside_sample_rejected() {
        assert!(fit_seasonal_shift(&panel(|_| 0.0, false), 2030, true).is_err());
        assert!(fit_seasonal_shift(&panel(|_| 0.0, false), 2000, false).is_err());
    }

    #[test]
    fn seasonal_deltas() {
        let d = seasonal_delta(&panel(|_| 0.0, false), 2021).unwrap();
        assert!([d.winter, d.spring, d.summer, d.autumn]
            .iter()
            .all(|x| x.abs() < 1e-12));
        let d = seasonal_delta(
            &panel(|m| if (3..=5).contains(&m) { 1.0 } else { 0.0 }, false),
            2021,
        )
        .unwrap();
        assert!((d.spring - 1.0).abs() < 1e-12);
        assert!(d.winter.abs() < 1e-12 && d.summer.abs() < 1e-12 && d.autumn.abs() < 1e-12);
    }

    #[test]
    fn without_year_effects_reports_psi() {
        let fit = fit_seasonal_shift(&panel(|_| 0.0, false), 2021, false).unwrap();
        assert!(fit.psi.unwrap().abs() < 1e-9);
        assert!(fit.intercept.unwrap().abs() < 1e-9);
    }
}
