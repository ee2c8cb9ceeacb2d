//! Mapping observed monthly move shares to the model's survival profile.
//!
//! Hazards are proportional to the shares, `1 − φ_m = κ·s_m`, with the scale
//! `κ` pinned by the annual move rate: `Π_m (1 − κ·s_m) = 1 − η`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HazardProfile;
use crate::periodic::{PeriodicSeries, MONTHS};
use crate::stats::MonthlyPanel;

const KAPPA_RESIDUAL_TOL: f64 = 1e-12;
const KAPPA_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShareLabel {
    Pre,
    Post,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareSource {
    SippTable,
    Trends,
    User,
}

/// Monthly shares of annual moves, normalised to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveShares {
    pub shares: PeriodicSeries,
    pub label: ShareLabel,
    pub source: ShareSource,
    /// Sum of the raw input before normalisation.
    pub raw_sum: f64,
}

impl MoveShares {
    pub fn period(&self) -> usize {
        self.shares.period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationScale {
    pub kappa: f64,
    pub eta: f64,
    /// `|Π(1 − κ s_m) − (1 − η)|` at the returned `κ`.
    pub residual: f64,
}

pub fn normalize_shares(raw: &[f64], label: ShareLabel, source: ShareSource) -> Result<MoveShares> {
    if raw.is_empty() {
        return Err(Error::domain("share table is empty"));
    }
    if let Some((i, x)) = raw
        .iter()
        .enumerate()
        .find(|(_, x)| !(**x >= 0.0) || !x.is_finite())
    {
        return Err(Error::domain(format!(
            "share for month {} is {x}; shares must be non-negative",
            i + 1
        )));
    }
    let raw_sum: f64 = raw.iter().sum();
    if raw_sum <= 0.0 {
        return Err(Error::domain("shares sum to zero"));
    }
    let shares = PeriodicSeries::new(raw.iter().map(|x| x / raw_sum).collect())?;
    Ok(MoveShares {
        shares,
        label,
        source,
        raw_sum,
    })
}

fn survival_product(shares: &PeriodicSeries, kappa: f64) -> f64 {
    shares.iter().map(|s| 1.0 - kappa * s).product()
}

/// Finds the unique `κ ∈ (0, 1/max s)` with `Π(1 − κ s_m) = 1 − η` by
/// bisection on the strictly decreasing product.
pub fn solve_kappa(shares: &MoveShares, eta: f64) -> Result<CalibrationScale> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!(
            "annual move rate eta = {eta} must lie in (0, 1)"
        )));
    }
    let s = &shares.shares;
    let target = 1.0 - eta;
    let f = |k: f64| survival_product(s, k) - target;
    let mut lo = 0.0;
    let mut hi = 1.0 / s.max();
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);

    for _ in 0..KAPPA_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < KAPPA_RESIDUAL_TOL * 1e-3 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let residual = f(kappa).abs();
    if residual >= KAPPA_RESIDUAL_TOL || kappa * s.max() >= 1.0 {
        return Err(Error::domain(format!(
            "bisection for kappa ended with residual {residual:.3e}"
        )));
    }
    Ok(CalibrationScale {
        kappa,
        eta,
        residual,
    })
}

/// Hazards `1 − φ_m = κ s_m` consistent with the annual move rate `eta`.
pub fn hazards_from_shares(
    shares: &MoveShares,
    eta: f64,
) -> Result<(HazardProfile, CalibrationScale)> {
    let scale = solve_kappa(shares, eta)?;
    if let Some(i) = shares.shares.iter().position(|s| s == 0.0) {
        return Err(Error::domain(format!(
            "month {} has a zero move share, which implies a zero hazard (survival of exactly one)",
            i + 1
        )));
    }
    let hazard: Vec<f64> = shares.shares.iter().map(|s| scale.kappa * s).collect();
    Ok((HazardProfile::from_hazard(hazard)?, scale))
}

/// Monthly discount factors from an annual interest rate:
/// `β̂ = (1 + rate)^(−1/12)` and `β = β̂·(1 − δ)`.
pub fn compose_beta(annual_rate: f64, delta: f64) -> Result<(f64, f64)> {
    if !(annual_rate > -1.0) || !annual_rate.is_finite() {
        return Err(Error::domain(format!(
            "annual rate {annual_rate} must exceed -1"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::domain(format!("delta = {delta} must lie in [0, 1)")));
    }
    let beta_hat = (1.0 + annual_rate).powf(-1.0 / 12.0);
    let beta = beta_hat * (1.0 - delta);
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "monthly discount factor beta = {beta} must lie in (0, 1)"
        )));
    }
    Ok((beta_hat, beta))
}

/// Move-share proxy from a monthly search-interest series: within-year shares
/// `g_{m,T}/Σ_m' g_{m',T}`, averaged over `years`.
pub fn shares_from_trends(
    panel: &MonthlyPanel,
    years: &[i32],
    label: ShareLabel,
) -> Result<MoveShares> {
    if years.is_empty() {
        return Err(Error::InsufficientData(
            "no years selected for share construction".into(),
        ));
    }
    let mut acc = [0.0; MONTHS];
    for &year in years {
        let values = panel.year_values(year);
        if values.len() != MONTHS {
            return Err(Error::InsufficientData(format!(
                "year {year} has {} of 12 months",
                values.len()
            )));
        }
        let total: f64 = values.iter().map(|(_, v)| v).sum();
        if !(total > 0.0) {
            return Err(Error::InsufficientData(format!(
                "year {year} has a zero annual total"
            )));
        }
        for (month, value) in values {
            acc[month as usize - 1] += value / total;
        }
    }
    let n = years.len() as f64;
    let averaged: Vec<f64> = acc.iter().map(|x| x / n).collect();
    normalize_shares(&averaged, label, ShareSource::Trends)
}
