//! Domain types and closed-form pieces of the periodic housing equilibrium.

mod coefficients;
mod mapping;
mod params;

pub use coefficients::{compute_affine_coefficients, AffineCoefficients, StateBox};
pub(crate) use mapping::map_into;
pub use mapping::{apply_t, apply_t_damped, compute_outputs, seasonal_deviation, EquilibriumState};
pub use params::{HazardProfile, ModelParams};
