//! Phase-field approximation of free-discontinuity energies whose surface
//! density grows superlinearly at small jump amplitudes.
//!
//! The crate is organised around five areas:
//!
//! * [`energy_models`]: bulk densities `Ψ`, their `q`-recession functions,
//!   the linear-growth approximations `h_δ` and scalar convex envelopes.
//! * [`surface_density`]: the one-dimensional optimal-profile problems that
//!   define the effective surface density `g(z, ν)` and its isotropic
//!   reduction `g_scal`.
//! * [`phase_field`]: grid discretisation of the phase-field functional,
//!   staggered minimisation, the n-dimensional cell problem with mollified
//!   boundary data, and the coarea slicing lower bound.
//! * [`sbv`]: discrete SBV fields, the quantisation operator, truncations,
//!   surface and bulk energies, and a BV-ellipticity tester.
//! * [`experiments`]: configuration, checks and CSV reporting used by the
//!   `cohesive-phase` binary.
//!
//! Numerical minimisation is shared through [`optim`].

pub mod energy_models;
pub mod error;
pub mod experiments;
pub mod io;
pub mod mesh;
pub mod optim;
pub mod phase_field;
pub mod sbv;
pub mod surface_density;

pub use error::{Error, Result};

pub use energy_models::{BulkDensity, DensityKind, RecessionDensity};
pub use surface_density::SurfaceParams;
