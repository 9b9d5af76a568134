use super::energy::check_density_shape;
use super::integrand::PhaseFieldIntegrand;
use super::{BoundaryCondition, Mollifier, PhaseFieldState};
use crate::energy_models::{BulkDensity, RecessionDensity};
use crate::error::{input, Result};
use crate::mesh::{Assembler, Layout, Mesh};
use crate::optim::SolverOptions;
use crate::surface_density::{minimize_cell, CellOptions, CellSpec, SurfaceParams, M_NUM};

/// The cell problem on the square `Q^ν_T` in two dimensions.
#[derive(Clone, Debug)]
pub struct NdCellSpec {
    pub z: Vec<f64>,
    /// Unit normal in the plane.
    pub nu: [f64; 2],
    pub t_len: f64,
    /// Grid spacing; `T/h` is rounded to an even cell count.
    pub h: f64,
}

#[derive(Clone, Debug)]
pub struct NdCellResult {
    /// Minimised energy divided by `T^{n−1} = T`.
    pub value: f64,
    pub energy: f64,
    /// Nodal state in the square's own frame: axis 0 along `ν⊥`, axis 1
    /// along `ν`.
    pub state: PhaseFieldState,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `F₁^∞` (`ε = 1`, density `Ψ_∞`, coefficient `f_p^q(v)` capped
/// only at `M_NUM`) over nodal fields on the square with the mollified
/// jump prescribed on the boundary.
pub fn cell_energy_nd(spec: &NdCellSpec, psi_inf: &RecessionDensity, params: &SurfaceParams) -> Result<NdCellResult> {
    let [n1, n2] = spec.nu;
    if ((n1 * n1 + n2 * n2).sqrt() - 1.0).abs() > 1e-12 {
        return input("nu must be a unit vector");
    }
    if !(spec.t_len > 0.0 && spec.h > 0.0 && spec.h < spec.t_len) {
        return input("need 0 < h < T");
    }
    let m = spec.z.len();
    if m == 0 {
        return input("z needs at least one component");
    }
    check_density_shape(&psi_inf.parent, m, 2)?;
    let mut cells = (spec.t_len / spec.h).round() as usize;
    cells += cells % 2;
    let cells = cells.max(4);
    let h = spec.t_len / cells as f64;
    let mesh = Mesh::grid(cells, cells, h);

    let bc = BoundaryCondition::mollified_jump(&mesh, &spec.z, 1.0)?;
    let bounds = bc.bounds(&mesh, m);
    // Columns of the frame: ν⊥ for grid axis 0, ν for grid axis 1.
    let rot = vec![-n2, n1, n1, n2];
    let integrand = PhaseFieldIntegrand::new(Box::new(psi_inf.clone()), Layout { m, d: 2 }, rot, params, 1.0, M_NUM);
    let mut asm = Assembler::new(mesh, m, integrand);
    let opts = SolverOptions {
        max_iters: 300,
        gtol: 1e-9,
        ftol: 1e-13,
        memory: 12,
    };

    // Two starts: the boundary profile extended through the square, and
    // the one-dimensional cell minimiser on the same window.
    let moll = Mollifier::new(2);
    let mut starts = vec![extruded(&mesh, &bc, spec, |s| moll.jump_data(s, 1.0))?];
    let zn = spec.z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if zn > 0.0 {
        let cell = CellSpec {
            z: vec![zn],
            nu: vec![1.0],
            t_len: spec.t_len,
            n: cells + 1,
            m_trunc: f64::INFINITY,
        };
        let prof = minimize_cell(&cell, &BulkDensity::power(params.q)?.recession(), params, None, &CellOptions::default())?.profile;
        let at = |s: f64| {
            let i = ((s + 0.5 * spec.t_len) / h).round().clamp(0.0, cells as f64) as usize;
            (prof.alpha[i] / zn, prof.beta[i])
        };
        starts.push(extruded(&mesh, &bc, spec, at)?);
    }
    let mut best: Option<(f64, PhaseFieldState, usize, bool)> = None;
    for mut state in starts {
        let mut x = state.to_dofs();
        let rep = asm.minimize(&bounds, &mut x, &opts)?;
        state.set_dofs(&x);
        let energy = asm.energy(&x);
        if best.as_ref().map_or(true, |b| energy < b.0) {
            best = Some((energy, state, rep.iterations, rep.converged));
        }
    }
    let (energy, state, iterations, converged) = best.expect("at least one start");
    Ok(NdCellResult {
        value: energy / spec.t_len,
        energy,
        state,
        iterations,
        converged,
    })
}

/// State whose `(u/z, v)` depends only on the signed distance `s` to the
/// centre line, with the boundary values imposed afterwards.
fn extruded(mesh: &Mesh, bc: &BoundaryCondition, spec: &NdCellSpec, f: impl Fn(f64) -> (f64, f64)) -> Result<PhaseFieldState> {
    let m = spec.z.len();
    let mut state = PhaseFieldState::new(*mesh, m, 1.0)?;
    for k in 0..state.n_nodes() {
        let (uu, vv) = f(state.position(k)[1] - 0.5 * spec.t_len);
        for a in 0..m {
            state.u[k * m + a] = spec.z[a] * uu;
        }
        state.v[k] = vv.clamp(0.0, 1.0);
    }
    bc.apply(&mut state)?;
    Ok(state)
}
