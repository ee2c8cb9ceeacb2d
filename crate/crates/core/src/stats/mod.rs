//! Seasonal components, shift regressions and break scans on monthly panels.

mod chow;
mod components;
mod ols;
mod panel;
mod shift;

pub use chow::{chow_scan, chow_test, ChowRow, ChowScan, SkippedCandidate, MIN_OBS_PER_SIDE};
pub use components::{
    annual_mean_deviation, rolling_mean_deviation, Deviation, RollingWindow, SeasonalComponents,
    DEFAULT_MIN_MONTHS_PER_YEAR,
};
pub use ols::{ols_hc1, ols_hc1_named, OlsFit};
pub use panel::MonthlyPanel;
pub use shift::{
    directional_contrast, fit_seasonal_shift, joint_f_test, linear_contrast, seasonal_delta,
    shift_battery, SeasonalDelta, ShiftRegressionFit, ShiftSummary, TestReport, H1_MINUS_H2,
    SEASONS,
};
