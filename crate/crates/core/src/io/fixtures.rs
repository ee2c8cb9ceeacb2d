//! Bundled calibration inputs: SIPP monthly move shares and default parameters.

use serde::{Deserialize, Serialize};

use crate::calibration::{
    compose_beta, hazards_from_shares, normalize_shares, MoveShares, ShareLabel, ShareSource,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::periodic::MONTHS;

/// Percent of annual moves by month, 2010–2020 SIPP waves (sums to 99.9).
pub const SIPP_PRE_PERCENT: [f64; MONTHS] = [
    4.7, 4.7, 7.1, 8.1, 8.9, 12.7, 11.4, 11.3, 10.0, 7.4, 7.1, 6.5,
];
/// Percent of annual moves by month, 2021–2023 SIPP waves (sums to 100.1).
pub const SIPP_POST_PERCENT: [f64; MONTHS] =
    [5.5, 5.6, 8.9, 9.5, 9.8, 9.7, 9.5, 11.4, 9.9, 7.0, 6.5, 6.8];

pub const ETA_PRE: f64 = 0.103;
pub const ETA_POST: f64 = 0.083;
pub const ANNUAL_RATE: f64 = 0.06;
pub const DELTA: f64 = 0.025;
pub const THETA: f64 = 0.5;
pub const RENT_PRICE_RATIO: f64 = 0.03;
/// Starting guess for the endogenous service flow.
pub const U_START: f64 = 0.01;

/// Version tag recorded in run manifests.
pub const FIXTURE_VERSION: &str = "sipp-table-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    SippPre,
    SippPost,
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::SippPre => "sipp-pre",
            Fixture::SippPost => "sipp-post",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sipp-pre" => Ok(Fixture::SippPre),
            "sipp-post" => Ok(Fixture::SippPost),
            other => Err(Error::domain(format!(
                "unknown fixture '{other}'; expected sipp-pre or sipp-post"
            ))),
        }
    }

    pub fn raw_percent(self) -> &'static [f64; MONTHS] {
        match self {
            Fixture::SippPre => &SIPP_PRE_PERCENT,
            Fixture::SippPost => &SIPP_POST_PERCENT,
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            Fixture::SippPre => ETA_PRE,
            Fixture::SippPost => ETA_POST,
        }
    }

    pub fn label(self) -> ShareLabel {
        match self {
            Fixture::SippPre => ShareLabel::Pre,
            Fixture::SippPost => ShareLabel::Post,
        }
    }

    pub fn shares(self) -> MoveShares {
        normalize_shares(self.raw_percent(), self.label(), ShareSource::SippTable)
            .expect("bundled shares are positive")
    }

    /// Full parameter set: calibrated hazards, `β̂` from the 6% annual rate,
    /// `δ`, `θ` and the starting `u`.
    pub fn params(self) -> ModelParams {
        default_params(&self.shares(), self.eta()).expect("bundled calibration is valid")
    }
}

/// Model parameters at the default rate, depreciation and bargaining weight
/// for the given shares and annual move rate.
pub fn default_params(shares: &MoveShares, eta: f64) -> Result<ModelParams> {
    let (hazards, _) = hazards_from_shares(shares, eta)?;
    let (beta_hat, _) = compose_beta(ANNUAL_RATE, DELTA)?;
    ModelParams::new(beta_hat, DELTA, THETA, U_START, hazards)
}
