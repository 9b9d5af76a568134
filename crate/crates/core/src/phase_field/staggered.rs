use super::{problem_energy, BoundaryCondition, PhaseFieldProblem, PhaseFieldState};
use crate::energy_models::{BulkDensity, MatrixDensity};
use crate::error::{input, Error, Result};
use crate::mesh::Mesh;
use crate::optim::SolverOptions;
use crate::surface_density::{g_of, g_scal, GOptions, SurfaceParams};

#[derive(Clone, Debug)]
pub struct StaggeredOptions {
    pub max_outer: usize,
    /// Stop when one outer sweep lowers the energy by less than
    /// `tol·max(1, |E|)`.
    pub tol: f64,
    pub inner: SolverOptions,
}

impl Default for StaggeredOptions {
    fn default() -> Self {
        StaggeredOptions {
            max_outer: 200,
            tol: 1e-9,
            inner: SolverOptions {
                max_iters: 200,
                gtol: 1e-10,
                ftol: 1e-14,
                memory: 12,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct StaggeredResult {
    pub state: PhaseFieldState,
    pub energy: f64,
    /// Energy at the start and after every half-step.
    pub history: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
}

/// Alternates minimisation in `u` at fixed `v` and in `v ∈ [0, 1]` at fixed
/// `u`, each by projected Newton. The energy never increases.
pub fn staggered_minimize(state0: &PhaseFieldState, problem: &PhaseFieldProblem, opts: &StaggeredOptions) -> Result<StaggeredResult> {
    let mut state = state0.clone();
    problem.bc.apply(&mut state)?;
    let mut asm = problem.assembler(&state)?;
    let m = state.m;
    let s = m + 1;
    let n = state.n_nodes();
    let full = problem.bc.bounds(&state.mesh, m);
    let mut x = state.to_dofs();
    let mut energy = asm.energy(&x);
    if !energy.is_finite() {
        return Err(Error::Divergence {
            reason: "non-finite initial energy".into(),
            iterations: 0,
            last_state: x,
        });
    }
    let mut history = vec![energy];
    let mut converged = false;
    let mut outer = 0;
    while outer < opts.max_outer {
        outer += 1;
        let start = energy;
        for block in [Block::U, Block::V] {
            let mut b = full.clone();
            for k in 0..n {
                match block {
                    Block::U => b.pin(k * s + m, x[k * s + m]),
                    Block::V => (0..m).for_each(|a| b.pin(k * s + a, x[k * s + a])),
                }
            }
            let rep = match asm.minimize(&b, &mut x, &opts.inner) {
                Ok(r) => r,
                Err(Error::Divergence { reason, iterations, .. }) => {
                    return Err(Error::Divergence {
                        reason: format!("{reason} (energy history {history:?})"),
                        iterations,
                        last_state: x,
                    })
                }
                Err(e) => return Err(e),
            };
            debug_assert!(rep.value <= energy);
            energy = asm.energy(&x);
            history.push(energy);
        }
        if start - energy < opts.tol * energy.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    state.set_dofs(&x);
    Ok(StaggeredResult {
        state,
        energy,
        history,
        outer_iterations: outer,
        converged,
    })
}

#[derive(Clone, Copy)]
enum Block {
    U,
    V,
}

/// The bar `(0, L)` pulled apart by `z`, with `v = 1` at both ends.
#[derive(Clone, Debug)]
pub struct BarProblem {
    pub z: Vec<f64>,
    pub length: f64,
    pub density: BulkDensity,
    pub params: SurfaceParams,
}

impl BarProblem {
    /// Power-law bar with `q = params.q`.
    pub fn scalar(z: f64, params: SurfaceParams) -> Result<Self> {
        Ok(BarProblem {
            z: vec![z],
            length: 1.0,
            density: BulkDensity::power(params.q)?,
            params,
        })
    }

    pub fn mesh(&self, eps: f64) -> Mesh {
        // h ≤ ε/4
        let cells = (4.0 * self.length / eps).ceil() as usize;
        Mesh::line(cells, self.length / cells as f64)
    }

    pub fn problem(&self, mesh: &Mesh) -> Result<PhaseFieldProblem> {
        Ok(PhaseFieldProblem::new(
            self.density.clone(),
            self.params,
            BoundaryCondition::bar(mesh, &self.z)?,
        ))
    }

    /// `u` affine, `v ≡ 1`.
    pub fn elastic_state(&self, eps: f64) -> Result<PhaseFieldState> {
        let mesh = self.mesh(eps);
        let mut s = PhaseFieldState::new(mesh, self.z.len(), eps)?;
        let m = self.z.len();
        for k in 0..s.n_nodes() {
            let t = s.position(k)[0] / self.length;
            for a in 0..m {
                s.u[k * m + a] = t * self.z[a];
            }
        }
        Ok(s)
    }

    /// `u` jumps in the middle element where `v` vanishes; `v` recovers
    /// exponentially on the scale `2ε`.
    pub fn crack_state(&self, eps: f64) -> Result<PhaseFieldState> {
        let mesh = self.mesh(eps);
        let mut s = PhaseFieldState::new(mesh, self.z.len(), eps)?;
        let m = self.z.len();
        let mid = mesh.cells[0] / 2;
        let x0 = (mid as f64 + 0.5) * mesh.h;
        for k in 0..s.n_nodes() {
            let x = s.position(k)[0];
            let side = if k > mid { 1.0 } else { 0.0 };
            for a in 0..m {
                s.u[k * m + a] = side * self.z[a];
            }
            let dist = ((x - x0).abs() - 0.5 * mesh.h).max(0.0);
            s.v[k] = 1.0 - (-dist / (2.0 * eps)).exp();
        }
        Ok(s)
    }

    /// `Ψ(z/L)·L`.
    pub fn elastic_reference(&self) -> f64 {
        let xi: Vec<f64> = self.z.iter().map(|z| z / self.length).collect();
        self.density.value(&xi) * self.length
    }

    /// Best of the elastic start, the crack start and an optional warm
    /// start.
    pub fn solve(&self, eps: f64, warm: Option<&PhaseFieldState>, opts: &StaggeredOptions) -> Result<StaggeredResult> {
        let mut starts = vec![self.elastic_state(eps)?, self.crack_state(eps)?];
        if let Some(w) = warm {
            let mut s = self.elastic_state(eps)?;
            s.interpolate_from(w)?;
            starts.push(s);
        }
        let problem = self.problem(&starts[0].mesh)?;
        let mut best: Option<StaggeredResult> = None;
        for s in starts {
            let r = staggered_minimize(&s, &problem, opts)?;
            if best.as_ref().map_or(true, |b| r.energy < b.energy) {
                best = Some(r);
            }
        }
        Ok(best.expect("at least two starts"))
    }
}

/// `min v < 0.5`.
pub fn jump_indicator(state: &PhaseFieldState) -> bool {
    state.min_v() < 0.5
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub eps: f64,
    pub h: f64,
    pub energy: f64,
    pub min_v: f64,
    pub jump: bool,
    pub iterations: usize,
    /// Set when this row's solve failed; the sweep continues.
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct GammaSweep {
    pub rows: Vec<SweepRow>,
    pub elastic_reference: f64,
    pub crack_reference: f64,
    /// `min(elastic, crack)`.
    pub reference: f64,
    pub final_state: Option<PhaseFieldState>,
}

/// Minimises the bar for each `ε` in a decreasing list, warm-starting from
/// the previous minimiser, and compares with the sharp-interface limit.
pub fn gamma_sweep(bar: &BarProblem, eps_list: &[f64], opts: &StaggeredOptions) -> Result<GammaSweep> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return input("eps list must be strictly decreasing");
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return input("eps must be positive");
    }
    let elastic = bar.elastic_reference();
    let psi_inf = bar.density.recession();
    let crack = g_of(&bar.z, &[1.0], &psi_inf, &bar.params, &GOptions::default())?.value;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut prev: Option<PhaseFieldState> = None;
    for &eps in eps_list {
        match bar.solve(eps, prev.as_ref(), opts) {
            Ok(r) => {
                rows.push(SweepRow {
                    eps,
                    h: r.state.h(),
                    energy: r.energy,
                    min_v: r.state.min_v(),
                    jump: jump_indicator(&r.state),
                    iterations: r.outer_iterations,
                    error: None,
                });
                prev = Some(r.state);
            }
            Err(e) => rows.push(SweepRow {
                eps,
                h: bar.mesh(eps).h,
                energy: f64::NAN,
                min_v: f64::NAN,
                jump: false,
                iterations: 0,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(GammaSweep {
        rows,
        elastic_reference: elastic,
        crack_reference: crack,
        reference: elastic.min(crack),
        final_state: prev,
    })
}

/// Bisection for `|z|^q L^{1−q} = g_scal(|z|)` on `[lo, hi]` until
/// `hi − lo ≤ rel_tol·lo`. The left side must be smaller at `lo` and larger
/// at `hi`.
pub fn crossover(params: &SurfaceParams, length: f64, lo: f64, hi: f64, rel_tol: f64, n: usize) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo && rel_tol > 0.0) {
        return input("crossover needs 0 < lo < hi and a positive tolerance");
    }
    let f = |z: f64| -> Result<f64> { Ok(z.powf(params.q) * length.powf(1.0 - params.q) - g_scal(z, params, n)?) };
    let (mut a, mut b) = (lo, hi);
    if !(f(a)? < 0.0 && f(b)? > 0.0) {
        return input(format!("crossover is not bracketed by [{lo}, {hi}]"));
    }
    while b - a > rel_tol * a {
        let c = 0.5 * (a + b);
        if f(c)? < 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    Ok((a, b))
}

/// Energy of a state under the bar problem, for external checks.
pub fn bar_energy(bar: &BarProblem, state: &PhaseFieldState) -> Result<f64> {
    problem_energy(state, &bar.problem(&state.mesh)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_is_monotone_and_elastic_bar_is_linear() {
        let p = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let bar = BarProblem::scalar(0.1, p).unwrap();
        let r = bar.solve(0.1, None, &StaggeredOptions::default()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.energy - 0.01).abs() < 1e-3, "{}", r.energy);
        assert!(!jump_indicator(&r.state));
    }

    #[test]
    fn sweep_rejects_increasing_eps() {
        let p = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let bar = BarProblem::scalar(0.1, p).unwrap();
        assert!(gamma_sweep(&bar, &[0.1, 0.2], &StaggeredOptions::default()).is_err());
    }
}
