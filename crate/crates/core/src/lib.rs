//! Affine Wealth Model toolkit.
//!
//! Forward solvers for the asset-exchange model family (deterministic
//! steady-state Fokker-Planck and Monte Carlo), the scale, duality and shift
//! symmetries that reduce every problem to a subcritical canonical solve,
//! Lorenz/Gini analytics that tolerate negative wealth and oligarchical
//! termination, and an L1 Lorenz-curve fitter for weighted household data.

// Domain guards are written as `!(x > 0.0)` on purpose so that NaN is
// rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod density;
pub mod empirical;
pub mod error;
pub mod fitter;
pub mod gamma;
pub mod io;
pub mod lorenz;
pub mod montecarlo;
pub mod params;
mod quad;
pub mod sam;
pub mod solver;

pub use density::{translate_density, 
    awm_density, awm_potentials, barred_potentials, compute_potentials, scale_density, shift_density,
    CanonicalDensity, Potentials,
};
pub use error::{Error, Result};
pub use lorenz::{
    awm_lorenz, density_from_lorenz, dual_lorenz, gini, gini_density_form, lorenz_from_density,
    lorenz_from_density_with, LorenzCurve,
};
pub use params::{kappa_to_lambda, lambda_to_kappa, oligarchy_fraction, ParameterVector};
pub use solver::{model_lorenz, solve_steady_subcritical, SolveOutcome, SolverConfig};
