//! The one-step equilibrium map `T` on mover values and vacancy stocks, its
//! damped version, and the derived transaction volumes and prices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::coefficients::AffineCoefficients;
use crate::model::params::ModelParams;
use crate::periodic::PeriodicSeries;

/// A point `(X, v)` of the state space together with the clamped cutoffs
/// `ε̄` computed while producing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    /// Mover values `X_m`.
    pub x: PeriodicSeries,
    /// Vacancy stocks `v_m`.
    pub v: PeriodicSeries,
    /// Reservation cutoffs `ε_m`, clamped to `[0, v_m]`.
    pub epsilon: PeriodicSeries,
}

impl EquilibriumState {
    /// A state with cutoffs not yet computed (set to zero).
    pub fn new(x: PeriodicSeries, v: PeriodicSeries) -> Result<Self> {
        if x.period() != v.period() {
            return Err(Error::domain(format!(
                "X has {} periods but v has {}",
                x.period(),
                v.period()
            )));
        }
        let epsilon = PeriodicSeries::constant(0.0, x.period());
        Ok(Self { x, v, epsilon })
    }

    pub fn period(&self) -> usize {
        self.x.period()
    }

    /// Sup-norm distance over the `(X, v)` coordinates.
    pub fn distance(&self, other: &Self) -> f64 {
        self.x
            .sup_distance(&other.x)
            .max(self.v.sup_distance(&other.v))
    }

    pub fn rotate(&self, k: i64) -> Self {
        Self {
            x: self.x.rotate(k),
            v: self.v.rotate(k),
            epsilon: self.epsilon.rotate(k),
        }
    }
}

/// Evaluates `T` on raw slices. `x`, `v` are the input state; results are
/// written into the `out_*` buffers, which must not alias the inputs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn map_into(
    params: &ModelParams,
    coeffs: &AffineCoefficients,
    x: &[f64],
    v: &[f64],
    out_x: &mut [f64],
    out_v: &mut [f64],
    out_eps: &mut [f64],
) {
    let n = x.len();
    let beta = coeffs.beta();
    let u = params.u;
    let phi = params.hazards.survival().values();
    let haz = params.hazards.hazard().values();
    let slopes = coeffs.slopes.values();
    let v_floor = coeffs.state_box.v_lo;

    // (i)-(ii): intercepts and clamped cutoffs.
    for m in 0..n {
        let row = coeffs.weight_row(m);
        let mut d = 0.0;
        for (r0, w) in row.iter().enumerate() {
            let k = m + r0 + 1;
            d += w * x[if k >= n { k - n } else { k }];
        }
        let next = if m + 1 == n { 0 } else { m + 1 };
        let eps = (beta * x[next] + u - d) / slopes[m];
        out_eps[m] = eps.max(0.0).min(v[m]);
    }
    // (iii)-(iv): vacancies and mover values.
    for m in 0..n {
        let prev = if m == 0 { n - 1 } else { m - 1 };
        let next = if m + 1 == n { 0 } else { m + 1 };
        out_v[m] = haz[m] + phi[m] * out_eps[prev];
        let gap = v[m] - out_eps[m];
        out_x[m] = beta * x[next] + u + 0.5 * slopes[m] * gap * gap / v[m].max(v_floor);
    }
}

fn check_shapes(state: &EquilibriumState, params: &ModelParams, coeffs: &AffineCoefficients) {
    assert_eq!(
        state.period(),
        params.period(),
        "state/params period mismatch"
    );
    assert_eq!(
        state.period(),
        coeffs.period(),
        "state/coefficients period mismatch"
    );
}

/// One application of the equilibrium map.
///
/// Steps: intercepts `D_m = Σ_r w_{m,r} X_{m+r}`; cutoffs
/// `ε_m = (βX_{m+1} + u − D_m)/A_m` clamped to `[0, v_m]`; vacancies
/// `ṽ_m = 1 − φ_m + φ_m ε̄_{m−1}`; mover values
/// `X̃_m = βX_{m+1} + u + (A_m/2)(v_m − ε̄_m)²/v_m`.
pub fn apply_t(
    state: &EquilibriumState,
    params: &ModelParams,
    coeffs: &AffineCoefficients,
) -> EquilibriumState {
    check_shapes(state, params, coeffs);
    let n = state.period();
    let mut x = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut eps = vec![0.0; n];
    map_into(
        params,
        coeffs,
        state.x.values(),
        state.v.values(),
        &mut x,
        &mut v,
        &mut eps,
    );
    EquilibriumState {
        x: PeriodicSeries::new(x).expect("non-empty"),
        v: PeriodicSeries::new(v).expect("non-empty"),
        epsilon: PeriodicSeries::new(eps).expect("non-empty"),
    }
}

/// `(1 − λ)·Z + λ·T(Z)` on the `(X, v)` coordinates.
pub fn apply_t_damped(
    state: &EquilibriumState,
    lambda: f64,
    params: &ModelParams,
    coeffs: &AffineCoefficients,
) -> Result<EquilibriumState> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(format!(
            "damping coefficient {lambda} must lie in (0, 1]"
        )));
    }
    let mapped = apply_t(state, params, coeffs);
    let keep = 1.0 - lambda;
    let blend = |old: &PeriodicSeries, new: &PeriodicSeries| {
        PeriodicSeries::from_fn(old.period(), |i| keep * old[i] + lambda * new[i])
    };
    Ok(EquilibriumState {
        x: blend(&state.x, &mapped.x),
        v: blend(&state.v, &mapped.v),
        epsilon: mapped.epsilon,
    })
}

/// Transactions `Q_m = max(0, v_m − ε_m)` and Nash-bargained prices
/// `P_m = (1−θ)u/(1−β) + θ(βX_{m+1} + u) + θ(A_m/2)(v_m − ε_m)`.
///
/// The cutoffs are taken from `state.epsilon` as given.
pub fn compute_outputs(
    state: &EquilibriumState,
    params: &ModelParams,
    coeffs: &AffineCoefficients,
) -> (PeriodicSeries, PeriodicSeries) {
    check_shapes(state, params, coeffs);
    let n = state.period();
    let beta = coeffs.beta();
    let u = params.u;
    let theta = params.theta;
    let outside = (1.0 - theta) * u / (1.0 - beta);
    let q = PeriodicSeries::from_fn(n, |m| (state.v[m] - state.epsilon[m]).max(0.0));
    let p = PeriodicSeries::from_fn(n, |m| {
        let accept_value = beta * state.x.cyclic(m, 1) + u;
        let surplus = 0.5 * coeffs.slopes[m] * (state.v[m] - state.epsilon[m]);
        outside + theta * accept_value + theta * surplus
    });
    (q, p)
}

/// Percentage deviation of each month from the cycle mean,
/// `100·(x_m − x̄)/x̄`.
pub fn seasonal_deviation(series: &PeriodicSeries) -> Result<PeriodicSeries> {
    let mean = series.mean();
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::domain(
            "seasonal deviation of a series with zero mean",
        ));
    }
    Ok(series.map(|x| 100.0 * (x - mean) / mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coefficients::compute_affine_coefficients;
    use crate::model::params::HazardProfile;

    fn setup(phi: Vec<f64>, u: f64) -> (ModelParams, AffineCoefficients) {
        let hazards = HazardProfile::from_survival(phi).unwrap();
        let params = ModelParams::new(0.995, 0.025, 0.5, u, hazards).unwrap();
        let coeffs = compute_affine_coefficients(&params.hazards, params.beta(), u).unwrap();
        (params, coeffs)
    }

    #[test]
    fn constant_inputs_give_constant_outputs() {
        let (params, coeffs) = setup(vec![0.99; 12], 0.01);
        let b = coeffs.state_box;
        let state = EquilibriumState::new(
            PeriodicSeries::constant(b.x_lo, 12),
            PeriodicSeries::constant(b.v_lo, 12),
        )
        .unwrap();
        let out = apply_t(&state, &params, &coeffs);
        for s in [&out.x, &out.v, &out.epsilon] {
            let first = s[0];
            assert!(s
                .iter()
                .all(|y| (y - first).abs() <= 1e-12 * first.abs().max(1.0)));
        }
    }

    #[test]
    fn damping_with_unit_lambda_is_bitwise_identity() {
        let phi: Vec<f64> = (0..12).map(|i| 0.98 + 0.001 * i as f64).collect();
        let (params, coeffs) = setup(phi, 0.02);
        let b = coeffs.state_box;
        let state = EquilibriumState::new(
            PeriodicSeries::from_fn(12, |i| b.x_lo + (b.x_hi - b.x_lo) * (i as f64 / 13.0)),
            PeriodicSeries::from_fn(12, |i| b.v_lo + (b.v_hi - b.v_lo) * (i as f64 / 17.0)),
        )
        .unwrap();
        let plain = apply_t(&state, &params, &coeffs);
        let damped = apply_t_damped(&state, 1.0, &params, &coeffs).unwrap();
        for i in 0..12 {
            assert_eq!(plain.x[i].to_bits(), damped.x[i].to_bits());
            assert_eq!(plain.v[i].to_bits(), damped.v[i].to_bits());
        }
    }

    #[test]
    fn damping_is_convex_combination() {
        let (params, coeffs) = setup(vec![0.985; 12], 0.05);
        let b = coeffs.state_box;
        let state = EquilibriumState::new(
            PeriodicSeries::from_fn(12, |i| b.x_lo + 0.1 * i as f64),
            PeriodicSeries::from_fn(12, |i| b.v_lo + 0.01 * i as f64),
        )
        .unwrap();
        let t = apply_t(&state, &params, &coeffs);
        let d = apply_t_damped(&state, 0.01, &params, &coeffs).unwrap();
        for i in 0..12 {
            assert!((d.x[i] - (0.99 * state.x[i] + 0.01 * t.x[i])).abs() < 1e-12);
            assert!((d.v[i] - (0.99 * state.v[i] + 0.01 * t.v[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn damping_rejects_out_of_range_lambda() {
        let (params, coeffs) = setup(vec![0.99; 4], 0.01);
        let state = EquilibriumState::new(
            PeriodicSeries::constant(coeffs.state_box.x_lo, 4),
            PeriodicSeries::constant(coeffs.state_box.v_lo, 4),
        )
        .unwrap();
        assert!(apply_t_damped(&state, 0.0, &params, &coeffs).is_err());
        assert!(apply_t_damped(&state, 1.5, &params, &coeffs).is_err());
    }

    #[test]
    fn no_trade_when_cutoff_equals_stock() {
        let (params, coeffs) = setup(vec![0.99; 12], 0.01);
        let v = PeriodicSeries::from_fn(12, |i| 0.02 + 0.001 * i as f64);
        let state = EquilibriumState {
            x: PeriodicSeries::constant(1.0, 12),
            epsilon: v.clone(),
            v,
        };
        let (q, _) = compute_outputs(&state, &params, &coeffs);
        assert!(q.iter().all(|x| x == 0.0));
    }

    #[test]
    fn zero_bargaining_weight_gives_flat_price() {
        let hazards = HazardProfile::from_survival(vec![0.99, 0.98, 0.97]).unwrap();
        let params = ModelParams::new(0.99, 0.0, 0.0, 0.3, hazards).unwrap();
        let coeffs = compute_affine_coefficients(&params.hazards, params.beta(), 0.3).unwrap();
        let state = EquilibriumState {
            x: PeriodicSeries::new(vec![40.0, 41.0, 42.0]).unwrap(),
            v: PeriodicSeries::new(vec![0.02, 0.03, 0.04]).unwrap(),
            epsilon: PeriodicSeries::new(vec![0.01, 0.0, 0.02]).unwrap(),
        };
        let (_, p) = compute_outputs(&state, &params, &coeffs);
        for x in p.iter() {
            assert!((x - 0.3 / 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn seasonal_deviation_examples() {
        let s = PeriodicSeries::new(vec![90.0, 110.0]).unwrap();
        let d = seasonal_deviation(&s).unwrap();
        assert_eq!(d.values(), &[-10.0, 10.0]);
        let flat = seasonal_deviation(&PeriodicSeries::constant(3.0, 12)).unwrap();
        assert!(flat.iter().all(|x| x == 0.0));
        assert!(seasonal_deviation(&PeriodicSeries::new(vec![1.0, -1.0]).unwrap()).is_err());
    }
}
