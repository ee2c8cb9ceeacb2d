//! Periodic search-and-matching housing equilibrium with monthly moving
//! hazards, its calibration from move shares, and an econometric battery for
//! detecting shifts in seasonal patterns.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod io;
pub mod model;
pub mod periodic;
pub mod replication;
pub mod solver;
pub mod stats;

pub use calibration::{
    compose_beta, hazards_from_shares, normalize_shares, shares_from_trends, solve_kappa,
    CalibrationScale, MoveShares, ShareLabel, ShareSource,
};
pub use error::{Error, Result};
pub use io::fixtures::Fixture;
pub use model::{
    apply_t, apply_t_damped, compute_affine_coefficients, compute_outputs, seasonal_deviation,
    AffineCoefficients, EquilibriumState, HazardProfile, ModelParams, StateBox,
};
pub use periodic::{MonthIndex, PeriodicSeries, MONTHS, MONTH_NAMES};
pub use solver::{
    residual, solve, solve_equilibrium, solve_with_endogenous_u, EndogenousSolution,
    EquilibriumSnapshot, EquilibriumSolution, InitialV, InitialX, SolverConfig, UMode,
};
pub use stats::{
    annual_mean_deviation, chow_scan, directional_contrast, fit_seasonal_shift, joint_f_test,
    ols_hc1, rolling_mean_deviation, seasonal_delta, shift_battery, ChowScan, MonthlyPanel,
    RollingWindow, SeasonalComponents, SeasonalDelta, ShiftRegressionFit, ShiftSummary, TestReport,
};
