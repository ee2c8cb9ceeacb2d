use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PeriodicSeries;

/// Monthly match-survival probabilities φ_m and their complements, the
/// moving hazards 1 − φ_m.
///
/// `survival[m]` is the probability that a match held at the start of month
/// m − 1 is still intact at the start of month m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardProfile {
    survival: PeriodicSeries,
    hazard: PeriodicSeries,
}

impl HazardProfile {
    pub fn from_survival(survival: Vec<f64>) -> Result<Self> {
        let survival = PeriodicSeries::new(survival)?;
        Self::check_open_unit("survival", &survival)?;
        let hazard = survival.map(|phi| 1.0 - phi);
        Ok(Self { survival, hazard })
    }

    /// Builds the profile from moving hazards; survival is `1 − hazard`.
    pub fn from_hazard(hazard: Vec<f64>) -> Result<Self> {
        let hazard = PeriodicSeries::new(hazard)?;
        Self::check_open_unit("hazard", &hazard)?;
        let survival = hazard.map(|h| 1.0 - h);
        Self::check_open_unit("survival", &survival)?;
        Ok(Self { survival, hazard })
    }

    fn check_open_unit(what: &str, s: &PeriodicSeries) -> Result<()> {
        for (i, x) in s.iter().enumerate() {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::domain(format!(
                    "{what} probability for month {} is {x}; must lie strictly inside (0, 1)",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.survival.period()
    }

    pub fn survival(&self) -> &PeriodicSeries {
        &self.survival
    }

    pub fn hazard(&self) -> &PeriodicSeries {
        &self.hazard
    }

    pub fn phi_max(&self) -> f64 {
        self.survival.max()
    }

    pub fn phi_min(&self) -> f64 {
        self.survival.min()
    }

    /// Same profile shifted forward by `k` months.
    pub fn rotate(&self, k: i64) -> Self {
        Self {
            survival: self.survival.rotate(k),
            hazard: self.hazard.rotate(k),
        }
    }
}

/// Structural parameters of the monthly model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Pure time-discount factor per period.
    pub beta_hat: f64,
    /// Per-period probability that a pending transaction is disrupted.
    pub delta: f64,
    /// Seller bargaining weight.
    pub theta: f64,
    /// Per-period housing service flow.
    pub u: f64,
    pub hazards: HazardProfile,
}

impl ModelParams {
    pub fn new(
        beta_hat: f64,
        delta: f64,
        theta: f64,
        u: f64,
        hazards: HazardProfile,
    ) -> Result<Self> {
        let params = Self {
            beta_hat,
            delta,
            theta,
            u,
            hazards,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_hat > 0.0 && self.beta_hat < 1.0) {
            return Err(Error::domain(format!(
                "beta_hat = {} must lie in (0, 1)",
                self.beta_hat
            )));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!(
                "delta = {} must lie in [0, 1)",
                self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain(format!(
                "theta = {} must lie in [0, 1]",
                self.theta
            )));
        }
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(Error::domain(format!("u = {} must be positive", self.u)));
        }
        Ok(())
    }

    /// Effective discount factor β = β̂·(1 − δ).
    pub fn beta(&self) -> f64 {
        self.beta_hat * (1.0 - self.delta)
    }

    pub fn period(&self) -> usize {
        self.hazards.period()
    }

    pub fn with_u(&self, u: f64) -> Self {
        Self { u, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_and_hazard_are_complements() {
        let h = HazardProfile::from_survival(vec![0.99, 0.95, 0.5, 0.001]).unwrap();
        for i in 0..4 {
            assert!((h.survival()[i] + h.hazard()[i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_degenerate_endpoints() {
        assert!(HazardProfile::from_survival(vec![0.9, 1.0]).is_err());
        assert!(HazardProfile::from_survival(vec![0.0, 0.5]).is_err());
        assert!(HazardProfile::from_hazard(vec![0.1, 1.0]).is_err());
        assert!(HazardProfile::from_survival(vec![f64::NAN]).is_err());
    }

    #[test]
    fn beta_is_recomputed_from_components() {
        let h = HazardProfile::from_survival(vec![0.99; 12]).unwrap();
        let p = ModelParams::new(0.995, 0.025, 0.5, 1.0, h).unwrap();
        assert_eq!(p.beta(), 0.995 * 0.975);
    }

    #[test]
    fn parameter_domain_checks() {
        let h = HazardProfile::from_survival(vec![0.99; 12]).unwrap();
        assert!(ModelParams::new(1.0, 0.0, 0.5, 1.0, h.clone()).is_err());
        assert!(ModelParams::new(0.99, 1.0, 0.5, 1.0, h.clone()).is_err());
        assert!(ModelParams::new(0.99, 0.0, 1.5, 1.0, h.clone()).is_err());
        assert!(ModelParams::new(0.99, 0.0, 0.5, 0.0, h).is_err());
    }
}
