//! Closed-form quantities of the periodic homeowner value function.
//!
//! With uniform match quality the homeowner value is affine,
//! `H_m(ε) = A_m·ε + D_m`. Iterating the Bellman recursion around the cycle
//! gives closed forms for the slopes `A_m` and for the intercepts as a
//! weighted sum of future mover values, `D_m = Σ_r w_{m,r}·X_{m+r}`. The
//! same quantities bound the state space (the box `K`) and define the
//! damping threshold `λ̄`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::HazardProfile;
use crate::periodic::{wrap, PeriodicSeries};

/// The compact box `[X_lo, X_hi]^n × [v_lo, v_hi]^n` on which the
/// equilibrium map is a self-map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub v_lo: f64,
    pub v_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl StateBox {
    pub fn contains(&self, x: &[f64], v: &[f64]) -> bool {
        x.iter().all(|&x| x >= self.x_lo && x <= self.x_hi)
            && v.iter().all(|&v| v >= self.v_lo && v <= self.v_hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCoefficients {
    /// Value-function slopes `A_m`.
    pub slopes: PeriodicSeries,
    /// Product of all survival probabilities over one cycle.
    pub survival_product: f64,
    /// Row-major `n × n` table; entry `[m][r − 1]` is `w_{m,r}` for `r = 1..=n`.
    weights: Vec<f64>,
    /// `max_m Σ_r w_{m,r}`.
    pub weight_row_max: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    /// Damping threshold `λ̄` below which the damped modulus is under one.
    pub lambda_bar: f64,
    pub state_box: StateBox,
    beta: f64,
    period: usize,
}

impl AffineCoefficients {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `w_{m,r}` with zero-based month `m` and lag `r` in `1..=n`.
    #[inline]
    pub fn weight(&self, m: usize, r: usize) -> f64 {
        self.weights[m * self.period + (r - 1)]
    }

    pub fn weight_row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.period..(m + 1) * self.period]
    }

    pub fn weight_row_sum(&self, m: usize) -> f64 {
        self.weight_row(m).iter().sum()
    }

    /// `(A_max / A_min)·(β + W*)`, the factor shared by both moduli.
    fn spread(&self) -> f64 {
        self.slope_max / self.slope_min * (self.beta + self.weight_row_max)
    }

    /// Modulus `κ = β + (A_max/A_min)(β + W*)` of the undamped map.
    pub fn contraction_modulus(&self) -> f64 {
        self.beta + self.spread()
    }

    /// Modulus `κ_λ = β + λ(A_max/A_min)(β + W*)` attached to the damped map.
    pub fn damped_modulus(&self, lambda: f64) -> f64 {
        self.beta + lambda * self.spread()
    }

    /// Intercepts `D_m = Σ_r w_{m,r} X_{m+r}` for a vector of mover values.
    pub fn intercepts(&self, x: &[f64]) -> Vec<f64> {
        let n = self.period;
        (0..n)
            .map(|m| {
                self.weight_row(m)
                    .iter()
                    .enumerate()
                    .map(|(r0, w)| w * x[wrap(m, r0 as isize + 1, n)])
                    .sum()
            })
            .collect()
    }
}

/// Computes slopes, weights, bounds and the damping threshold for a hazard
/// profile, effective discount `beta` and service flow `u`.
pub fn compute_affine_coefficients(
    hazards: &HazardProfile,
    beta: f64,
    u: f64,
) -> Result<AffineCoefficients> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta = {beta} must lie in (0, 1)")));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::domain(format!("u = {u} must be positive")));
    }
    let phi = hazards.survival();
    let haz = hazards.hazard();
    let n = hazards.period();
    if let Some(bad) = phi.iter().find(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::domain(format!(
            "survival probability {bad} outside (0, 1)"
        )));
    }

    let survival_product: f64 = phi.iter().product();
    let denom = 1.0 - beta.powi(n as i32) * survival_product;

    let mut slopes = Vec::with_capacity(n);
    let mut weights = vec![0.0; n * n];
    for m in 0..n {
        // Σ_{s=0}^{n-1} β^s Π_{j=1}^{s} φ_{m+j}
        let mut discount = 1.0;
        let mut acc = 0.0;
        for s in 0..n {
            if s > 0 {
                discount *= beta * phi.cyclic(m, s as isize);
            }
            acc += discount;
        }
        slopes.push(acc / denom);

        // β^r Π_{j=1}^{r-1} φ_{m+j} (1 − φ_{m+r})
        let mut discount = beta;
        for r in 1..=n {
            if r > 1 {
                discount *= beta * phi.cyclic(m, r as isize - 1);
            }
            weights[m * n + r - 1] = discount * haz.cyclic(m, r as isize) / denom;
        }
    }
    let slopes = PeriodicSeries::new(slopes)?;
    let slope_min = slopes.min();
    let slope_max = slopes.max();
    let weight_row_max = (0..n)
        .map(|m| weights[m * n..(m + 1) * n].iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);

    let v_lo = 1.0 - hazards.phi_max();
    let v_hi = (1.0 - hazards.phi_min()) / v_lo;
    let x_lo = u / (1.0 - beta);
    let x_hi = x_lo + slope_max * v_hi / (2.0 * (1.0 - beta));

    let lambda_bar = (1.0 - beta) / (slope_max / slope_min * (beta + weight_row_max));

    Ok(AffineCoefficients {
        slopes,
        survival_product,
        weights,
        weight_row_max,
        slope_min,
        slope_max,
        lambda_bar,
        state_box: StateBox {
            v_lo,
            v_hi,
            x_lo,
            x_hi,
        },
        beta,
        period: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_profile(phi: f64, n: usize) -> HazardProfile {
        HazardProfile::from_survival(vec![phi; n]).unwrap()
    }

    #[test]
    fn constant_survival_slope_telescopes() {
        let c = compute_affine_coefficients(&constant_profile(0.99, 12), 0.97, 1.0).unwrap();
        let expected = 1.0 / (1.0 - 0.97 * 0.99);
        for a in c.slopes.iter() {
            assert!((a / expected - 1.0).abs() < 1e-12, "{a} vs {expected}");
        }
        assert!((expected - 25.188916876574).abs() < 1e-9);
    }

    #[test]
    fn constant_survival_weight_sum() {
        let c = compute_affine_coefficients(&constant_profile(0.99, 12), 0.97, 1.0).unwrap();
        let expected = 0.97 * 0.01 / (1.0 - 0.97 * 0.99);
        for m in 0..12 {
            assert!((c.weight_row_sum(m) / expected - 1.0).abs() < 1e-12);
        }
        assert!((c.weight_row_max - 0.244332).abs() < 1e-6);
    }

    #[test]
    fn box_bounds_follow_definitions() {
        let h = HazardProfile::from_survival(vec![0.99, 0.98, 0.995, 0.97]).unwrap();
        let (beta, u) = (0.96, 0.3);
        let c = compute_affine_coefficients(&h, beta, u).unwrap();
        let b = c.state_box;
        assert_eq!(b.v_lo, 1.0 - 0.995);
        assert!((b.v_hi - 0.03 / (1.0 - 0.995)).abs() < 1e-9);
        assert_eq!(b.x_lo, u / (1.0 - beta));
        assert!((b.x_hi - (b.x_lo + c.slope_max * b.v_hi / (2.0 * (1.0 - beta)))).abs() < 1e-12);
        assert!(c.lambda_bar > 0.0);
        assert!(c.slope_min >= 1.0);
        assert!(c.slope_max <= 1.0 / (1.0 - beta * h.phi_max()) + 1e-12);
    }

    #[test]
    fn rejects_bad_beta() {
        let h = constant_profile(0.9, 3);
        assert!(compute_affine_coefficients(&h, 1.0, 1.0).is_err());
        assert!(compute_affine_coefficients(&h, 0.0, 1.0).is_err());
        assert!(compute_affine_coefficients(&h, 0.9, -1.0).is_err());
    }

    #[test]
    fn moduli_relationships() {
        let c = compute_affine_coefficients(&constant_profile(0.99, 12), 0.97, 1.0).unwrap();
        assert!((c.damped_modulus(1.0) - c.contraction_modulus()).abs() < 1e-15);
        assert_eq!(c.damped_modulus(0.0), 0.97);
        assert!((c.damped_modulus(c.lambda_bar) - 1.0).abs() < 1e-12);
    }
}
