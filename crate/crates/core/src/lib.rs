//! Stability of planar shocks for the two-dimensional Euler equations and the
//! steady Mach stem patterns that bifurcate from weakly stable shocks.
//!
//! Modules, in dependency order: [`eos`], [`flux`], [`shock`], [`modes`],
//! [`stability`], [`machstem`].

pub mod eos;
pub mod error;
pub mod flux;
pub mod linalg;
pub mod machstem;
pub mod modes;
pub mod shock;
pub mod stability;

pub use eos::{
    bethe_weyl_report, find_weak_regime, thermo_eval, BetheWeylCondition, EosSpec, ThermoPoint,
};
pub use error::{Error, Result};
pub use flux::{averaged_jacobian, flux, flux_jacobian, FluidState, FluxVector};
pub use machstem::{
    asymptotic_checks, continue_family, solve_pattern, weak_reference_shock, AsymptoticReport,
    MachStemPattern, MachStemProblem,
};
pub use modes::{eigenmodes, lopatinskii, solve_linearized_rh, stable_subspace, FrequencyPoint};
pub use shock::{galilean_shift, rh_residual, solve_downstream, PlanarShock, ShockStrength};
pub use stability::{
    c_star, classify, proposition1_check, scan_real_roots, solve_v, StabilityRegime,
};
