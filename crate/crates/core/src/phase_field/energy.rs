use super::integrand::{Fidelity, PhaseFieldIntegrand};
use super::{BoundaryCondition, PhaseFieldState};
use crate::energy_models::{check_exponent, BulkDensity, DensityKind};
use crate::error::{input, Error, Result};
use crate::mesh::{Assembler, Layout, Mesh};
use crate::optim::Objective;
use crate::surface_density::SurfaceParams;

/// Optional data term `η Ψ(∇u) + |u − w|^r`, with `w` a nodal field.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityTerm {
    /// Row-major `n_nodes × m`.
    pub w: Vec<f64>,
    pub r: f64,
    pub eta: f64,
}

/// Everything besides the unknowns that defines `F_{ε,p,q}` on a grid.
#[derive(Clone, Debug)]
pub struct PhaseFieldProblem {
    pub density: BulkDensity,
    pub params: SurfaceParams,
    pub bc: BoundaryCondition,
    pub fidelity: Option<FidelityTerm>,
}

impl PhaseFieldProblem {
    pub fn new(density: BulkDensity, params: SurfaceParams, bc: BoundaryCondition) -> Self {
        PhaseFieldProblem {
            density,
            params,
            bc,
            fidelity: None,
        }
    }

    pub fn with_fidelity(mut self, fidelity: FidelityTerm) -> Self {
        self.fidelity = Some(fidelity);
        self
    }

    pub(crate) fn check(&self, state: &PhaseFieldState) -> Result<()> {
        state.validate()?;
        check_exponent(self.density.q, &self.params)?;
        check_density_shape(&self.density, state.m, state.mesh.dim)?;
        self.bc.validate(&state.mesh, state.m)?;
        if let Some(f) = &self.fidelity {
            check_fidelity(f, state)?;
        }
        Ok(())
    }

    /// Assembler for the full functional: `f_ε^q(v) = min(1, ε^{q−1} f_p^q(v))`.
    pub(crate) fn assembler(&self, state: &PhaseFieldState) -> Result<Assembler<PhaseFieldIntegrand>> {
        self.check(state)?;
        let d = state.mesh.dim;
        let layout = Layout { m: state.m, d };
        let mut integrand =
            PhaseFieldIntegrand::new(Box::new(self.density.clone()), layout, identity(d), &self.params, state.eps, 1.0);
        if let Some(f) = &self.fidelity {
            integrand.eta = f.eta;
            integrand.fidelity = Some(Fidelity {
                wbar: element_means(&state.mesh, state.m, &f.w),
                r: f.r,
            });
        }
        Ok(Assembler::new(state.mesh, state.m, integrand))
    }
}

pub(crate) fn identity(d: usize) -> Vec<f64> {
    let mut r = vec![0.0; d * d];
    for i in 0..d {
        r[i * d + i] = 1.0;
    }
    r
}

pub(crate) fn check_density_shape(density: &BulkDensity, m: usize, n: usize) -> Result<()> {
    if density.kind != DensityKind::PowerQ && (m, n) != (2, 2) {
        return Err(Error::Shape(format!("{} needs 2×2 gradients, got {m}×{n}", density.kind)));
    }
    Ok(())
}

fn check_fidelity(f: &FidelityTerm, state: &PhaseFieldState) -> Result<()> {
    if f.w.len() != state.u.len() {
        return Err(Error::Shape(format!("fidelity target has {} values, u has {}", f.w.len(), state.u.len())));
    }
    if !(f.r > 1.0) {
        return input(format!("fidelity exponent must exceed 1, got {}", f.r));
    }
    if !(f.eta >= 0.0) || !f.eta.is_finite() {
        return input("eta must be finite and nonnegative");
    }
    Ok(())
}

/// Element means of a nodal `m`-field, matching the `ū` seen by integrands.
fn element_means(mesh: &Mesh, m: usize, w: &[f64]) -> Vec<f64> {
    let elems = mesh.elements();
    let mut out = vec![0.0; elems.len() * m];
    for (e, el) in elems.iter().enumerate() {
        for &k in &el.nodes[..el.nn] {
            for a in 0..m {
                out[e * m + a] += w[k * m + a] / el.nn as f64;
            }
        }
    }
    out
}

fn require_bc(bc: &BoundaryCondition, state: &PhaseFieldState) -> Result<()> {
    if !bc.is_satisfied(state, 1e-12) {
        return Err(Error::Invariant("state does not carry the boundary values".into()));
    }
    Ok(())
}

/// `Σ_e [f_ε^q(v_e) Ψ(∇u_e) + (1−v_e)^{q′}/(κε) + ε^{q−1}|∇v_e|^q] |e|`
/// with `v_e` the element mean of `v`.
pub fn assemble_energy(state: &PhaseFieldState, density: &BulkDensity, params: &SurfaceParams, bc: &BoundaryCondition) -> Result<f64> {
    let problem = PhaseFieldProblem::new(density.clone(), *params, bc.clone());
    problem_energy(state, &problem)
}

/// Energy of `state` including the fidelity term, if any.
pub fn problem_energy(state: &PhaseFieldState, problem: &PhaseFieldProblem) -> Result<f64> {
    let asm = problem.assembler(state)?;
    require_bc(&problem.bc, state)?;
    let e = asm.energy(&state.to_dofs());
    if !e.is_finite() {
        return Err(Error::Invariant("non-finite energy".into()));
    }
    Ok(e)
}

/// Analytic gradient `(∂/∂u, ∂/∂v)` of [`assemble_energy`], zero on
/// constrained unknowns.
pub fn energy_gradient(
    state: &PhaseFieldState,
    density: &BulkDensity,
    params: &SurfaceParams,
    bc: &BoundaryCondition,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let problem = PhaseFieldProblem::new(density.clone(), *params, bc.clone());
    problem_gradient(state, &problem)
}

pub fn problem_gradient(state: &PhaseFieldState, problem: &PhaseFieldProblem) -> Result<(Vec<f64>, Vec<f64>)> {
    let asm = problem.assembler(state)?;
    require_bc(&problem.bc, state)?;
    let x = state.to_dofs();
    let mut g = vec![0.0; x.len()];
    asm.value_grad(&x, &mut g);
    let bounds = problem.bc.bounds(&state.mesh, state.m);
    Ok(split_gradient(state, &g, |i| bounds.is_pinned(i)))
}

fn split_gradient(state: &PhaseFieldState, g: &[f64], pinned: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<f64>) {
    let m = state.m;
    let s = m + 1;
    let n = state.n_nodes();
    let mut du = vec![0.0; n * m];
    let mut dv = vec![0.0; n];
    for k in 0..n {
        for a in 0..m {
            if !pinned(k * s + a) {
                du[k * m + a] = g[k * s + a];
            }
        }
        if !pinned(k * s + m) {
            dv[k] = g[k * s + m];
        }
    }
    (du, dv)
}

/// The augmentation `Σ_e (η Ψ(∇u_e) + |ū_e − w̄_e|^r)|e|` and its gradient
/// with respect to `u`.
pub fn add_fidelity(state: &PhaseFieldState, fidelity: &FidelityTerm, density: &BulkDensity) -> Result<(f64, Vec<f64>)> {
    state.validate()?;
    check_fidelity(fidelity, state)?;
    check_density_shape(density, state.m, state.mesh.dim)?;
    let d = state.mesh.dim;
    let params = SurfaceParams::new(2.0, density.q, 1.0)?;
    // Only the data term: no degradation, dissipation or phase gradient.
    let mut integrand =
        PhaseFieldIntegrand::new(Box::new(density.clone()), Layout { m: state.m, d }, identity(d), &params, 1.0, 0.0);
    integrand.diss = 0.0;
    integrand.grad_coef = 0.0;
    integrand.eta = fidelity.eta;
    integrand.fidelity = Some(Fidelity {
        wbar: element_means(&state.mesh, state.m, &fidelity.w),
        r: fidelity.r,
    });
    let asm = Assembler::new(state.mesh, state.m, integrand);
    let x = state.to_dofs();
    let mut g = vec![0.0; x.len()];
    let val = asm.value_grad(&x, &mut g);
    Ok((val, split_gradient(state, &g, |_| false).0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{finite_difference_gradient, relative_error};

    fn params() -> SurfaceParams {
        SurfaceParams::new(2.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn trivial_energies() {
        let mesh = Mesh::line(20, 0.05);
        let psi = BulkDensity::power(2.0).unwrap();
        let mut s = PhaseFieldState::new(mesh, 1, 0.1).unwrap();
        s.u.iter_mut().for_each(|u| *u = 0.3);
        assert_eq!(assemble_energy(&s, &psi, &params(), &BoundaryCondition::none()).unwrap(), 0.0);
        s.v.iter_mut().for_each(|v| *v = 0.0);
        s.u.iter_mut().enumerate().for_each(|(i, u)| *u = (i as f64).sin());
        let e = assemble_energy(&s, &psi, &params(), &BoundaryCondition::none()).unwrap();
        assert!((e - 1.0 / (4.0 * 0.1)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn gradient_matches_differences_2d() {
        let mesh = Mesh::grid(5, 4, 0.2);
        let psi = BulkDensity::compressible_plus(1.0).unwrap();
        let p = SurfaceParams::new(2.0, 4.0, 1.0).unwrap();
        let mut s = PhaseFieldState::new(mesh, 2, 0.3).unwrap();
        for k in 0..s.n_nodes() {
            let [x, y] = s.position(k);
            s.u[2 * k] = x + 0.3 * y * y;
            s.u[2 * k + 1] = -0.5 * x + y;
            s.v[k] = 0.3 + 0.6 * (3.0 * x + y).sin().abs();
        }
        let problem = PhaseFieldProblem::new(psi, p, BoundaryCondition::none());
        let asm = problem.assembler(&s).unwrap();
        let x = s.to_dofs();
        let mut g = vec![0.0; x.len()];
        asm.value_grad(&x, &mut g);
        let fd = finite_difference_gradient(&asm, &x, 1e-6);
        assert!(relative_error(&g, &fd, 1e-8) < 1e-5);
    }

    #[test]
    fn fidelity_of_a_constant_offset() {
        let mesh = Mesh::grid(3, 3, 1.0 / 3.0);
        let psi = BulkDensity::power(2.0).unwrap();
        let mut s = PhaseFieldState::new(mesh, 1, 0.1).unwrap();
        s.u.iter_mut().enumerate().for_each(|(i, u)| *u = i as f64 * 0.1);
        let w: Vec<f64> = s.u.iter().map(|u| u - 0.5).collect();
        let same = FidelityTerm { w: s.u.clone(), r: 3.0, eta: 0.0 };
        assert!(add_fidelity(&s, &same, &psi).unwrap().0 < 1e-40);
        let f = FidelityTerm { w, r: 2.0, eta: 0.0 };
        let (val, _) = add_fidelity(&s, &f, &psi).unwrap();
        assert!((val - 0.25).abs() < 1e-12);
    }

    #[test]
    fn boundary_values_are_required() {
        let mesh = Mesh::line(4, 0.25);
        let psi = BulkDensity::power(2.0).unwrap();
        let s = PhaseFieldState::new(mesh, 1, 0.1).unwrap();
        let bc = BoundaryCondition::bar(&mesh, &[1.0]).unwrap();
        assert!(matches!(assemble_energy(&s, &psi, &params(), &bc), Err(Error::Invariant(_))));
    }
}
