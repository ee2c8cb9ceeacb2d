//! Shared inputs for the benchmarks.

use housing_seasonality::stats::Deviation;
use housing_seasonality::{Fixture, ModelParams, SeasonalComponents};

/// Calibrated service flow for the pre-period fixture.
pub const U_PRE: f64 = 0.0014323;

pub fn pre_params_fixed_u() -> ModelParams {
    Fixture::SippPre.params().with_u(U_PRE)
}

/// Seasonal components over `years` with a spring shift from `break_year`
/// and deterministic pseudo-noise.
pub fn shifted_components(years: std::ops::Range<i32>, break_year: i32) -> SeasonalComponents {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut obs = Vec::new();
    for year in years {
        for month in 1..=12u32 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let noise = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let season = 4.0 * (2.0 * std::f64::consts::PI * month as f64 / 12.0).sin();
            let shift = match (year >= break_year, month) {
                (true, 3..=5) => 2.0,
                (true, 7..=9) => -2.0,
                _ => 0.0,
            };
            obs.push(Deviation {
                year,
                month,
                value: season + shift + noise,
            });
        }
    }
    SeasonalComponents::from_observations(obs)
}
