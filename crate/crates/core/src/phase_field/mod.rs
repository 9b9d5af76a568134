//! Grid discretisation of the phase-field functional
//!
//! `F_ε(u, v) = ∫ f_ε^q(v) Ψ(∇u) + (1−v)^{q′}/(κε) + ε^{q−1}|∇v|^q`,
//! `f_ε = min(1, ε^{1−1/q} f_p)`, its staggered minimisation, the cell
//! problem on a square with mollified boundary data, and the coarea
//! slicing lower bound.

mod cell_nd;
mod energy;
pub(crate) mod integrand;
mod slicing;
mod staggered;
mod state;

pub use cell_nd::{cell_energy_nd, NdCellResult, NdCellSpec};
pub use energy::{
    add_fidelity, assemble_energy, energy_gradient, problem_energy, problem_gradient, FidelityTerm, PhaseFieldProblem,
};
pub use slicing::{beta_delta, phi, slicing_lower_bound, SbvThresholdResult};
pub use staggered::{
    bar_energy, crossover, gamma_sweep, jump_indicator, staggered_minimize, BarProblem, GammaSweep, StaggeredOptions,
    StaggeredResult, SweepRow,
};
pub use state::{BoundaryCondition, BoundaryKind, Mollifier, PhaseFieldState};
