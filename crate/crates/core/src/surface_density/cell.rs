use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::profile::{cell_energy, crack_lower_bound, norm, Profile};
use super::SurfaceParams;
use crate::energy_models::RecessionDensity;
use crate::error::{input, Result};
use crate::mesh::{Assembler, Layout, Mesh};
use crate::optim::{Bounds, SolverOptions};
use crate::phase_field::integrand::PhaseFieldIntegrand;

/// Cap standing in for the unbounded coefficient `f_p^q(1) = ∞`.
pub const M_NUM: f64 = 1e12;

/// One window of the cell problem.
#[derive(Clone, Debug)]
pub struct CellSpec {
    pub z: Vec<f64>,
    pub nu: Vec<f64>,
    pub t_len: f64,
    pub n: usize,
    /// Truncation level `M`; `f64::INFINITY` for the untruncated problem.
    pub m_trunc: f64,
}

#[derive(Clone, Debug)]
pub struct CellOptions {
    pub solver: SolverOptions,
    /// Number of starting profiles tried when no initial profile is given.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CellOptions {
    fn default() -> Self {
        CellOptions {
            solver: SolverOptions {
                max_iters: 400,
                gtol: 1e-9,
                ftol: 1e-13,
                memory: 12,
            },
            restarts: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellSolution {
    pub profile: Profile,
    pub value: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Discrete energy after each accepted step of the winning start.
    pub history: Vec<f64>,
}

impl CellSpec {
    fn check(&self, params: &SurfaceParams) -> Result<()> {
        let _ = params;
        if self.z.is_empty() || self.nu.is_empty() {
            return input("jump and normal must be nonempty");
        }
        if (norm(&self.nu) - 1.0).abs() > 1e-12 {
            return input("normal must have unit length");
        }
        if self.n < 3 || !(self.t_len > 0.0) {
            return input("cell window needs N >= 3 and T > 0");
        }
        if !(self.m_trunc > 0.0) {
            return input("truncation level must be positive");
        }
        Ok(())
    }

    /// Dip of `β` to `max(0, 1 − |z|^{1/(p+1)})` on a unit well and a
    /// smoothed step for `α`.
    pub fn default_profile(&self, params: &SurfaceParams) -> Result<Profile> {
        let bmin = (1.0 - norm(&self.z).powf(1.0 / (params.p + 1.0))).max(0.0);
        well_profile(self, bmin, 0.5, 0.1)
    }

    /// `β = 0` on the two central intervals and linear back to 1 over unit
    /// length; `α` jumps inside the flat part.
    pub fn crack_profile(&self) -> Result<Profile> {
        let h = self.t_len / (self.n - 1) as f64;
        Profile::from_fn(
            &self.z,
            &self.nu,
            self.t_len,
            self.n,
            |x| if x > 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 },
            move |x| (x.abs() - h).clamp(0.0, 1.0),
        )
    }
}

fn well_profile(spec: &CellSpec, bmin: f64, half_width: f64, step_width: f64) -> Result<Profile> {
    Profile::from_fn(
        &spec.z,
        &spec.nu,
        spec.t_len,
        spec.n,
        |x| 0.5 * (1.0 + (x / step_width).tanh()),
        |x| 1.0 - (1.0 - bmin) * (1.0 - x.abs() / half_width).max(0.0),
    )
}

pub(crate) fn cell_assembler(
    spec: &CellSpec,
    psi_inf: &RecessionDensity,
    params: &SurfaceParams,
) -> Assembler<PhaseFieldIntegrand> {
    let m = spec.z.len();
    let h = spec.t_len / (spec.n - 1) as f64;
    let cap = if spec.m_trunc.is_finite() {
        spec.m_trunc.powf(params.q - 1.0).min(M_NUM)
    } else {
        M_NUM
    };
    let integrand = PhaseFieldIntegrand::new(
        Box::new(psi_inf.clone()),
        Layout { m, d: 1 },
        spec.nu.clone(),
        params,
        1.0,
        cap,
    );
    Assembler::new(Mesh::line(spec.n - 1, h), m, integrand)
}

fn to_dofs(p: &Profile) -> Vec<f64> {
    let m = p.m();
    let mut x = Vec::with_capacity(p.n * (m + 1));
    for i in 0..p.n {
        x.extend_from_slice(p.alpha_at(i));
        x.push(p.beta[i]);
    }
    x
}

fn from_dofs(x: &[f64], p: &mut Profile) {
    let m = p.m();
    for i in 0..p.n {
        for a in 0..m {
            p.alpha[i * m + a] = x[i * (m + 1) + a];
        }
        p.beta[i] = x[i * (m + 1) + m].clamp(0.0, 1.0);
    }
    p.impose_boundary();
}

fn cell_bounds(p: &Profile) -> Bounds {
    let m = p.m();
    let s = m + 1;
    let mut b = Bounds::unbounded(p.n * s);
    for i in 0..p.n {
        b.set(i * s + m, 0.0, 1.0);
    }
    for a in 0..m {
        b.pin(a, 0.0);
        b.pin((p.n - 1) * s + a, p.z[a]);
    }
    b.pin(m, 1.0);
    b.pin((p.n - 1) * s + m, 1.0);
    b
}

fn descend(
    spec: &CellSpec,
    psi_inf: &RecessionDensity,
    params: &SurfaceParams,
    init: Profile,
    opts: &CellOptions,
) -> Result<CellSolution> {
    let mut asm = cell_assembler(spec, psi_inf, params);
    let bounds = cell_bounds(&init);
    let mut x = to_dofs(&init);
    let report = asm.minimize(&bounds, &mut x, &opts.solver)?;
    let mut profile = init;
    from_dofs(&x, &mut profile);
    let value = cell_energy(&profile, psi_inf, params, spec.m_trunc)?;
    Ok(CellSolution {
        lower_bound: crack_lower_bound(&profile),
        profile,
        value,
        iterations: report.iterations,
        converged: report.converged,
        history: report.history,
    })
}

/// Minimises the discrete cell energy over profiles in the window.
///
/// With `init = None` the default well, the crack profile and
/// `restarts − 2` randomised wells are tried and the lowest energy wins.
pub fn minimize_cell(
    spec: &CellSpec,
    psi_inf: &RecessionDensity,
    params: &SurfaceParams,
    init: Option<&Profile>,
    opts: &CellOptions,
) -> Result<CellSolution> {
    spec.check(params)?;
    let starts: Vec<Profile> = match init {
        Some(p) => {
            if p.n != spec.n || p.z != spec.z || (p.t_len - spec.t_len).abs() > 1e-12 {
                return input("initial profile does not match the cell spec");
            }
            vec![p.clone()]
        }
        None => {
            let mut v = vec![spec.default_profile(params)?];
            if opts.restarts >= 2 {
                v.push(spec.crack_profile()?);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 2..opts.restarts.max(1) {
                let bmin = rng.gen_range(0.0..1.0);
                let hw = rng.gen_range(0.5..3.0f64).min(0.45 * spec.t_len);
                let sw = rng.gen_range(0.02..0.5);
                v.push(well_profile(spec, bmin, hw, sw)?);
            }
            v
        }
    };
    let mut best: Option<CellSolution> = None;
    for s in starts {
        let sol = descend(spec, psi_inf, params, s, opts)?;
        if best.as_ref().map_or(true, |b| sol.value < b.value) {
            best = Some(sol);
        }
    }
    Ok(best.expect("at least one start"))
}

#[derive(Clone, Debug)]
pub struct GOptions {
    pub t_schedule: Vec<f64>,
    /// Node spacing, held fixed across the schedule.
    pub spacing: f64,
    /// Relative stopping tolerance between consecutive windows.
    pub tol: f64,
    /// Truncation level on the unit cell; a window of length `T` uses `M·T`.
    pub m_trunc: f64,
    pub cell: CellOptions,
}

impl Default for GOptions {
    fn default() -> Self {
        GOptions {
            t_schedule: vec![4.0, 8.0, 16.0, 32.0],
            spacing: 0.004,
            tol: 1e-3,
            m_trunc: f64::INFINITY,
            cell: CellOptions::default(),
        }
    }
}

/// Estimate of `g(z, ν)` from a growing sequence of windows.
#[derive(Clone, Debug)]
pub struct GEstimate {
    pub value: f64,
    pub t_used: f64,
    pub n_used: usize,
    pub m_used: f64,
    pub profile: Profile,
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(T, value)` for each window solved.
    pub convergence_history: Vec<(f64, f64)>,
}

/// `g(z, ν)` as the limit over the window schedule, each window
/// warm-started from the previous minimiser padded with `β = 1`.
pub fn g_of(
    z: &[f64],
    nu: &[f64],
    psi_inf: &RecessionDensity,
    params: &SurfaceParams,
    opts: &GOptions,
) -> Result<GEstimate> {
    if opts.t_schedule.len() < 2 || opts.t_schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return input("window schedule must be increasing with at least two entries");
    }
    if !(opts.spacing > 0.0) {
        return input("node spacing must be positive");
    }
    let mut history = Vec::new();
    let mut prev: Option<CellSolution> = None;
    let mut iterations = 0;
    let mut settled = false;
    for &t in &opts.t_schedule {
        let n = (t / opts.spacing).round() as usize + 1;
        let spec = CellSpec {
            z: z.to_vec(),
            nu: nu.to_vec(),
            t_len: t,
            n,
            // The unit-cell truncation seen in a window of length T.
            m_trunc: opts.m_trunc * t,
        };
        let sol = match &prev {
            None => minimize_cell(&spec, psi_inf, params, None, &opts.cell)?,
            Some(p) => {
                let init = p.profile.resample(t, n);
                minimize_cell(&spec, psi_inf, params, Some(&init), &opts.cell)?
            }
        };
        iterations += sol.iterations;
        history.push((t, sol.value));
        let done = prev
            .as_ref()
            .is_some_and(|p| (p.value - sol.value).abs() <= opts.tol * sol.value.abs() + 1e-10);
        prev = Some(sol);
        if done {
            settled = true;
            break;
        }
    }
    let last = prev.expect("nonempty schedule");
    Ok(GEstimate {
        value: last.value,
        t_used: last.profile.t_len,
        n_used: last.profile.n,
        m_used: opts.m_trunc,
        lower_bound: last.lower_bound,
        iterations,
        converged: settled && last.converged,
        profile: last.profile,
        convergence_history: history,
    })
}
