//! Bi-annual (n = 2) validation harness against reference winter/summer
//! sale probabilities and listing stocks.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HazardProfile, ModelParams};
use crate::solver::{solve_equilibrium, SolverConfig};

pub const REQUIRED_FIELDS: &str =
    "labels (period names, e.g. [\"winter\", \"summer\"]), survival or hazard (one per label), beta_hat, delta, theta, u";

pub const TARGET_TOLERANCE: f64 = 0.005;

/// Reference targets: (label, sale probability, stock).
pub const TARGETS: [(&str, f64, f64); 2] = [("winter", 0.25, 0.167), ("summer", 0.31, 0.180)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NtParamsFile {
    pub labels: Vec<String>,
    #[serde(default)]
    pub survival: Option<Vec<f64>>,
    #[serde(default)]
    pub hazard: Option<Vec<f64>>,
    pub beta_hat: f64,
    pub delta: f64,
    pub theta: f64,
    pub u: f64,
}

impl NtParamsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::domain(format!(
                "cannot read parameter file {}: {e}; expected a JSON object with fields {REQUIRED_FIELDS}",
                path.display()
            ))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::domain(format!(
                "invalid parameter file {}: {e}; expected a JSON object with fields {REQUIRED_FIELDS}",
                path.display()
            ))
        })
    }

    pub fn params(&self) -> Result<ModelParams> {
        let hazards = match (&self.survival, &self.hazard) {
            (Some(s), None) => HazardProfile::from_survival(s.clone())?,
            (None, Some(h)) => HazardProfile::from_hazard(h.clone())?,
            _ => {
                return Err(Error::domain(format!(
                    "give exactly one of survival or hazard; required fields: {REQUIRED_FIELDS}"
                )))
            }
        };
        if hazards.period() != self.labels.len() {
            return Err(Error::domain(format!(
                "{} labels for {} periods",
                self.labels.len(),
                hazards.period()
            )));
        }
        ModelParams::new(self.beta_hat, self.delta, self.theta, self.u, hazards)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub label: String,
    /// `1 − ε/v`, the probability that a buyer's draw clears the cutoff.
    pub sale_probability: f64,
    pub stock: f64,
    pub target_sale_probability: Option<f64>,
    pub target_stock: Option<f64>,
    pub within_tolerance: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub periods: Vec<PeriodReport>,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// `None` when no label matches a reference target.
    pub all_within_tolerance: Option<bool>,
}

/// Solves at fixed `u` and compares each labelled period with the
/// reference targets.
pub fn replicate(file: &NtParamsFile, config: &SolverConfig) -> Result<ReplicationReport> {
    let params = file.params()?;
    let solution = solve_equilibrium(&params, config)?;
    let periods: Vec<PeriodReport> = file
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let v = solution.state.v[i];
            let sale_probability = 1.0 - solution.state.epsilon[i] / v;
            let target = TARGETS
                .iter()
                .find(|(name, _, _)| name.eq_ignore_ascii_case(label.trim()));
            let within = target.map(|(_, s, st)| {
                (sale_probability - s).abs() <= TARGET_TOLERANCE
                    && (v - st).abs() <= TARGET_TOLERANCE
            });
            PeriodReport {
                label: label.clone(),
                sale_probability,
                stock: v,
                target_sale_probability: target.map(|t| t.1),
                target_stock: target.map(|t| t.2),
                within_tolerance: within,
            }
        })
        .collect();
    let checks: Vec<bool> = periods.iter().filter_map(|p| p.within_tolerance).collect();
    Ok(ReplicationReport {
        iterations: solution.iterations,
        residual: solution.final_residual,
        tolerance: TARGET_TOLERANCE,
        all_within_tolerance: (!checks.is_empty()).then(|| checks.iter().all(|&b| b)),
        periods,
    })
}
