//! Seasonal components as percentage deviations from a local level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::MonthlyPanel;

pub const DEFAULT_MIN_MONTHS_PER_YEAR: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub year: i32,
    pub month: u32,
    /// Percent deviation from the reference level.
    pub value: f64,
}

/// Reference level the deviations are taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RollingWindow {
    /// The mean of the same calendar year.
    AnnualMean { min_months: usize },
    /// The 2×12 centred moving average (13 terms, half weights at the ends).
    Centered12,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalComponents {
    pub observations: Vec<Deviation>,
    /// Reference levels used, per year (annual-mean mode only).
    pub year_means: BTreeMap<i32, f64>,
    /// Years dropped for having too few months.
    pub dropped_years: Vec<i32>,
}

impl SeasonalComponents {
    /// Wraps precomputed deviations, e.g. from an external decomposition.
    pub fn from_observations(observations: Vec<Deviation>) -> Self {
        Self {
            observations,
            year_means: BTreeMap::new(),
            dropped_years: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Mean deviation per calendar month over the years selected by `keep`.
    pub fn monthly_means(&self, keep: impl Fn(i32) -> bool) -> [Option<f64>; 12] {
        let mut sum = [0.0; 12];
        let mut count = [0usize; 12];
        for d in self.observations.iter().filter(|d| keep(d.year)) {
            sum[d.month as usize - 1] += d.value;
            count[d.month as usize - 1] += 1;
        }
        std::array::from_fn(|i| (count[i] > 0).then(|| sum[i] / count[i] as f64))
    }
}

/// `d_{m,T} = 100·(y_{m,T} − ȳ_T)/ȳ_T` with `ȳ_T` the mean of the months
/// available in year `T`. Years with fewer than `min_months` observations are
/// dropped and listed in `dropped_years`.
pub fn annual_mean_deviation(
    panel: &MonthlyPanel,
    min_months: usize,
) -> Result<SeasonalComponents> {
    let mut observations = Vec::with_capacity(panel.len());
    let mut year_means = BTreeMap::new();
    let mut dropped_years = Vec::new();
    for year in panel.years() {
        let values = panel.year_values(year);
        if values.len() < min_months.max(1) {
            dropped_years.push(year);
            continue;
        }
        let mean = values.iter().map(|(_, v)| v).sum::<f64>() / values.len() as f64;
        if mean == 0.0 || !mean.is_finite() {
            return Err(Error::domain(format!("year {year} has zero mean")));
        }
        year_means.insert(year, mean);
        observations.extend(values.into_iter().map(|(month, y)| Deviation {
            year,
            month,
            value: 100.0 * (y - mean) / mean,
        }));
    }
    Ok(SeasonalComponents {
        observations,
        year_means,
        dropped_years,
    })
}

fn month_ordinal(year: i32, month: u32) -> i64 {
    year as i64 * 12 + month as i64 - 1
}

/// Deviations from either the annual mean or the centred 2×12 moving
/// average. In centred mode, months without six observed neighbours on each
/// side are omitted.
pub fn rolling_mean_deviation(
    panel: &MonthlyPanel,
    window: RollingWindow,
) -> Result<SeasonalComponents> {
    match window {
        RollingWindow::AnnualMean { min_months } => annual_mean_deviation(panel, min_months),
        RollingWindow::Centered12 => {
            let by_ordinal: BTreeMap<i64, f64> = panel
                .iter()
                .map(|(y, m, v)| (month_ordinal(y, m), v))
                .collect();
            let mut observations = Vec::new();
            'obs: for (year, month, value) in panel.iter() {
                let t = month_ordinal(year, month);
                let mut level = 0.0;
                for k in -6..=6i64 {
                    let Some(&g) = by_ordinal.get(&(t + k)) else {
                        continue 'obs;
                    };
                    let weight = if k.abs() == 6 { 0.5 } else { 1.0 };
                    level += weight * g;
                }
                level /= 12.0;
                if level == 0.0 {
                    return Err(Error::domain(format!(
                        "centred moving average is zero at {year}-{month:02}"
                    )));
                }
                observations.push(Deviation {
                    year,
                    month,
                    value: 100.0 * (value - level) / level,
                });
            }
            if observations.is_empty() && !panel.is_empty() {
                return Err(Error::InsufficientData(
                    "no month has 13 consecutive observations around it".into(),
                ));
            }
            Ok(SeasonalComponents::from_observations(observations))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_year_has_zero_deviations() {
        let panel = MonthlyPanel::from_observations((1..=12).map(|m| (2020, m, 7.0))).unwrap();
        let c = annual_mean_deviation(&panel, 6).unwrap();
        assert!(c.observations.iter().all(|d| d.value == 0.0));
    }

    #[test]
    fn two_month_year() {
        let panel = MonthlyPanel::from_observations([(2020, 1, 90.0), (2020, 2, 110.0)]).unwrap();
        let c = annual_mean_deviation(&panel, 2).unwrap();
        let v: Vec<f64> = c.observations.iter().map(|d| d.value).collect();
        assert_eq!(v, vec![-10.0, 10.0]);
        let c = annual_mean_deviation(&panel, 6).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.dropped_years, vec![2020]);
    }

    #[test]
    fn zero_mean_year_errors() {
        let panel = MonthlyPanel::from_observations([(2020, 1, -1.0), (2020, 2, 1.0)]).unwrap();
        assert!(annual_mean_deviation(&panel, 1).is_err());
    }

    #[test]
    fn complete_year_deviations_sum_to_zero() {
        let panel = MonthlyPanel::from_observations(
            (1..=12).map(|m| (2021, m, 100.0 + (m as f64).sin() * 3.0)),
        )
        .unwrap();
        let c = annual_mean_deviation(&panel, 6).unwrap();
        let total: f64 = c.observations.iter().map(|d| d.value).sum();
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn centred_window_of_constant_series_is_zero() {
        let panel = MonthlyPanel::from_observations(
            (2018..2021).flat_map(|y| (1..=12).map(move |m| (y, m, 4.0))),
        )
        .unwrap();
        let c = rolling_mean_deviation(&panel, RollingWindow::Centered12).unwrap();
        assert_eq!(c.len(), 36 - 12);
        assert!(c.observations.iter().all(|d| d.value.abs() < 1e-12));
        let a =
            rolling_mean_deviation(&panel, RollingWindow::AnnualMean { min_months: 6 }).unwrap();
        assert!(a.observations.iter().all(|d| d.value == 0.0));
    }

    #[test]
    fn centred_window_annihilates_period_twelve_cycle() {
        let base = 50.0;
        let panel = MonthlyPanel::from_observations((2018..2021).flat_map(|y| {
            (1..=12).map(move |m| {
                let phase = 2.0 * std::f64::consts::PI * m as f64 / 12.0;
                (y, m, base + 5.0 * phase.sin() + 2.0 * (2.0 * phase).cos())
            })
        }))
        .unwrap();
        let c = rolling_mean_deviation(&panel, RollingWindow::Centered12).unwrap();
        for d in &c.observations {
            let y = panel.get(d.year, d.month).unwrap();
            let expected = 100.0 * (y - base) / base;
            assert!((d.value - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn centred_window_needs_thirteen_months() {
        let panel = MonthlyPanel::from_observations((1..=12).map(|m| (2020, m, 1.0))).unwrap();
        assert!(rolling_mean_deviation(&panel, RollingWindow::Centered12).is_err());
    }
}
