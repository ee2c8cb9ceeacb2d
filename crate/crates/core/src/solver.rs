//! Damped fixed-point iteration for the periodic equilibrium, and the outer
//! loop that pins the housing service flow `u` to a rent-to-price ratio.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    apply_t, compute_affine_coefficients, compute_outputs, map_into, AffineCoefficients,
    EquilibriumState, ModelParams,
};
use crate::periodic::PeriodicSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialX {
    /// Every month at the box lower corner `u/(1−β)`.
    FlatAtLowerBound,
    User(PeriodicSeries),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialV {
    /// `v_m = 1 − φ_m`.
    FlatAtHazard,
    User(PeriodicSeries),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UMode {
    Fixed,
    Endogenous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Sup-norm threshold on `‖T(Z) − Z‖` over the `(X, v)` coordinates.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub u_mode: UMode,
    pub rent_price_ratio: f64,
    /// Relative change in `u` at which the outer loop stops.
    pub u_outer_tolerance: f64,
    pub u_damping: f64,
    pub max_outer_iterations: usize,
    pub initial_x: InitialX,
    pub initial_v: InitialV,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            tolerance: 1e-5,
            max_iterations: 2_000_000,
            u_mode: UMode::Endogenous,
            rent_price_ratio: 0.03,
            u_outer_tolerance: 1e-8,
            u_damping: 1.0,
            max_outer_iterations: 500,
            initial_x: InitialX::FlatAtLowerBound,
            initial_v: InitialV::FlatAtHazard,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::domain(format!(
                "lambda = {} must lie in (0, 1]",
                self.lambda
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        if !(self.rent_price_ratio > 0.0 && self.rent_price_ratio < 1.0) {
            return Err(Error::domain(format!(
                "rent-to-price ratio {} must lie in (0, 1)",
                self.rent_price_ratio
            )));
        }
        if !(self.u_damping > 0.0 && self.u_damping <= 1.0) {
            return Err(Error::domain("u damping must lie in (0, 1]"));
        }
        if !(self.u_outer_tolerance > 0.0) {
            return Err(Error::domain("outer tolerance for u must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub state: EquilibriumState,
    /// Transactions per month.
    pub q: PeriodicSeries,
    /// Average transaction prices per month.
    pub p: PeriodicSeries,
    pub iterations: usize,
    /// `‖T(Z*) − Z*‖_sup` at the returned state.
    pub final_residual: f64,
    pub lambda_used: f64,
    pub lambda_bar: f64,
    pub converged: bool,
    /// Service flow the equilibrium was solved at.
    pub u: f64,
}

impl EquilibriumSolution {
    pub fn snapshot(&self) -> EquilibriumSnapshot {
        EquilibriumSnapshot {
            x: self.state.x.values().to_vec(),
            v: self.state.v.values().to_vec(),
            epsilon: self.state.epsilon.values().to_vec(),
            q: self.q.values().to_vec(),
            p: self.p.values().to_vec(),
            iterations: self.iterations,
            residual: self.final_residual,
        }
    }
}

/// JSON wire form of a solved equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSnapshot {
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub epsilon: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl EquilibriumSnapshot {
    /// The `(X, v)` part, e.g. to warm-start another solve.
    pub fn state(&self) -> Result<EquilibriumState> {
        let mut state = EquilibriumState::new(
            PeriodicSeries::new(self.x.clone())?,
            PeriodicSeries::new(self.v.clone())?,
        )?;
        if self.epsilon.len() == self.x.len() {
            state.epsilon = PeriodicSeries::new(self.epsilon.clone())?;
        }
        Ok(state)
    }
}

/// `‖T(Z) − Z‖_sup` over the `X` and `v` coordinates.
pub fn residual(
    state: &EquilibriumState,
    params: &ModelParams,
    coeffs: &AffineCoefficients,
) -> f64 {
    apply_t(state, params, coeffs).distance(state)
}

fn initial_state(
    params: &ModelParams,
    coeffs: &AffineCoefficients,
    config: &SolverConfig,
) -> Result<EquilibriumState> {
    let n = params.period();
    let x = match &config.initial_x {
        InitialX::FlatAtLowerBound => PeriodicSeries::constant(coeffs.state_box.x_lo, n),
        InitialX::User(x) => x.clone(),
    };
    let v = match &config.initial_v {
        // Same arithmetic as the vacancy update, so the start sits in K exactly.
        InitialV::FlatAtHazard => params.hazards.survival().map(|phi| 1.0 - phi),
        InitialV::User(v) => v.clone(),
    };
    if x.period() != n || v.period() != n {
        return Err(Error::domain(format!(
            "initial state must have {n} periods"
        )));
    }
    if !coeffs.state_box.contains(x.values(), v.values()) {
        return Err(Error::domain(
            "initial state lies outside the box K for these parameters",
        ));
    }
    EquilibriumState::new(x, v)
}

/// Iterates the damped map from the configured starting point until
/// `‖T(Z) − Z‖_sup < tolerance`, then derives cutoffs, volumes and prices.
pub fn solve_equilibrium(
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<EquilibriumSolution> {
    params.validate()?;
    config.validate()?;
    let coeffs = compute_affine_coefficients(&params.hazards, params.beta(), params.u)?;
    solve_with_coefficients(params, &coeffs, config)
}

pub(crate) fn solve_with_coefficients(
    params: &ModelParams,
    coeffs: &AffineCoefficients,
    config: &SolverConfig,
) -> Result<EquilibriumSolution> {
    if config.lambda >= coeffs.lambda_bar {
        warn!(
            "damping {} is not below the sufficient bound {:.4e}; convergence is not guaranteed",
            config.lambda, coeffs.lambda_bar
        );
    }
    let n = params.period();
    let lambda = config.lambda;
    let keep = 1.0 - lambda;
    let start = initial_state(params, coeffs, config)?;
    let mut x = start.x.into_vec();
    let mut v = start.v.into_vec();
    let mut tx = vec![0.0; n];
    let mut tv = vec![0.0; n];
    let mut eps = vec![0.0; n];
    let mut last_residual = f64::INFINITY;

    for iteration in 0..=config.max_iterations {
        map_into(params, coeffs, &x, &v, &mut tx, &mut tv, &mut eps);
        let res = x
            .iter()
            .zip(&tx)
            .chain(v.iter().zip(&tv))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual: res,
            });
        }
        last_residual = res;
        if res < config.tolerance {
            debug!("converged after {iteration} iterations, residual {res:.3e}");
            let state = EquilibriumState {
                x: PeriodicSeries::new(x)?,
                v: PeriodicSeries::new(v)?,
                epsilon: PeriodicSeries::new(eps)?,
            };
            let (q, p) = compute_outputs(&state, params, coeffs);
            return Ok(EquilibriumSolution {
                state,
                q,
                p,
                iterations: iteration,
                final_residual: res,
                lambda_used: lambda,
                lambda_bar: coeffs.lambda_bar,
                converged: true,
                u: params.u,
            });
        }
        if iteration == config.max_iterations {
            break;
        }
        for m in 0..n {
            x[m] = keep * x[m] + lambda * tx[m];
            v[m] = keep * v[m] + lambda * tv[m];
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        residual: last_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousSolution {
    pub solution: EquilibriumSolution,
    /// Service flow satisfying `u = ratio·P̄/12` at `solution`.
    pub u: f64,
    pub outer_iterations: usize,
}

/// Solves for the equilibrium together with the service flow
/// `u = rent_price_ratio · P̄ / 12`, where `P̄` is the unweighted mean of the
/// monthly prices. `params.u` is the starting guess.
pub fn solve_with_endogenous_u(
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<EndogenousSolution> {
    params.validate()?;
    config.validate()?;
    let ratio = config.rent_price_ratio / 12.0;
    let beta = params.beta();
    if params.theta == 0.0 {
        // P_m = u/(1−β) for every month, so the update is u ← u·ratio/(1−β).
        let gain = ratio / (1.0 - beta);
        if (gain - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateRentLoop(format!(
                "with theta = 0 every price equals u/(1-beta), so the update scales u by {gain:.6}; the only fixed point is u = 0"
            )));
        }
    }

    let u_start = params.u;
    let mut u = u_start;
    let mut relative_change = f64::INFINITY;
    for outer in 1..=config.max_outer_iterations {
        let current = params.with_u(u);
        let solution = solve_equilibrium(&current, config)?;
        let target = ratio * solution.p.mean();
        let next = (1.0 - config.u_damping) * u + config.u_damping * target;
        if !(next.is_finite() && next > 1e-12 * u_start) {
            return Err(Error::DegenerateRentLoop(format!(
                "u collapsed from {u_start:.6e} to {next:.6e}"
            )));
        }
        relative_change = (next - u).abs() / u;
        debug!("outer iteration {outer}: u = {u:.10e}, target = {target:.10e}");
        if relative_change < config.u_outer_tolerance {
            return Ok(EndogenousSolution {
                solution,
                u,
                outer_iterations: outer,
            });
        }
        u = next;
    }
    Err(Error::OuterNonConvergence {
        iterations: config.max_outer_iterations,
        relative_change,
    })
}

/// Runs whichever `u` mode the configuration selects.
pub fn solve(params: &ModelParams, config: &SolverConfig) -> Result<EndogenousSolution> {
    match config.u_mode {
        UMode::Endogenous => solve_with_endogenous_u(params, config),
        UMode::Fixed => {
            let solution = solve_equilibrium(params, config)?;
            Ok(EndogenousSolution {
                u: solution.u,
                solution,
                outer_iterations: 0,
            })
        }
    }
}
