//! The one-dimensional optimal-profile problems behind the effective
//! surface density.

mod cell;
mod params;
mod profile;
mod scalar;

pub use cell::{g_of, minimize_cell, CellOptions, CellSolution, CellSpec, GEstimate, GOptions, M_NUM};
pub(crate) use params::Degradation;
pub use params::SurfaceParams;
pub use profile::{cell_energy, crack_lower_bound, Profile};
pub use scalar::{
    empirical_scaling_constant, fit_power_law, fit_small_z_exponent, g_scal, g_scal_solve, ExponentFit, GscalSolution,
};
