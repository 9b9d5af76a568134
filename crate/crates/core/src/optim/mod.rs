//! Box-constrained descent solvers shared by the cell problems and the
//! phase-field minimisation.
//!
//! Two methods are provided: a projected Newton method that uses a banded,
//! positive semidefinite Hessian approximation, and a projected L-BFGS
//! method for objectives that only provide gradients. Both accept every
//! step through an Armijo backtracking search along the projection arc, so
//! the objective never increases between iterates.

mod banded;
mod lbfgs;
mod newton;

pub use banded::SymBanded;
pub use lbfgs::projected_lbfgs;
pub use newton::projected_newton;

use crate::error::{Error, Result};

/// A differentiable objective on `R^n`.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Returns the value and writes the gradient into `grad`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.value_grad(x, &mut g)
    }
}

/// An objective that can also assemble a banded positive semidefinite
/// approximation of its Hessian.
pub trait HessianObjective: Objective {
    fn bandwidth(&self) -> usize;

    fn hessian(&self, x: &[f64], hess: &mut SymBanded);
}

/// Componentwise bounds. A variable with `lower == upper` is pinned.
#[derive(Clone, Debug)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn pin(&mut self, i: usize, value: f64) {
        self.lower[i] = value;
        self.upper[i] = value;
    }

    pub fn set(&mut self, i: usize, lower: f64, upper: f64) {
        self.lower[i] = lower;
        self.upper[i] = upper;
    }

    #[inline]
    pub fn is_pinned(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    #[inline]
    pub fn clamp(&self, i: usize, v: f64) -> f64 {
        v.max(self.lower[i]).min(self.upper[i])
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = self.clamp(i, *xi);
        }
    }

    /// `‖x − P(x − g)‖_∞`, the first-order optimality residual.
    pub fn kkt_residual(&self, x: &[f64], g: &[f64]) -> f64 {
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (xi, gi))| (xi - self.clamp(i, xi - gi)).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::Shape(format!(
                "bounds have length {} but the problem has {n} variables",
                self.len()
            )));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Err(Error::Input("lower bound exceeds upper bound".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop when the projected gradient residual falls below this value.
    pub gtol: f64,
    /// Stop after three consecutive iterations whose relative decrease is
    /// below this value.
    pub ftol: f64,
    /// Memory length for L-BFGS.
    pub memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 500,
            gtol: 1e-10,
            ftol: 1e-14,
            memory: 12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Objective value after each accepted iteration, starting with the
    /// initial value.
    pub history: Vec<f64>,
}

pub(crate) fn diverged(reason: &str, iterations: usize, x: &[f64]) -> Error {
    Error::Divergence {
        reason: reason.to_string(),
        iterations,
        last_state: x.to_vec(),
    }
}

/// Gradient components below this size do not freeze a variable at its
/// bound; they are rounding noise and freezing on them stalls the release of
/// long runs of bound-active variables.
pub(crate) fn active_gradient_threshold(g: &[f64]) -> f64 {
    1e-12 * g.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Projected Armijo search along `t ↦ P(x − t d)`. On success `x`, `g` and
/// the returned value describe the accepted point.
pub(crate) fn projected_search<P: Objective + ?Sized>(
    p: &P,
    bounds: &Bounds,
    x: &mut [f64],
    g: &mut [f64],
    f: f64,
    d: &[f64],
    t0: f64,
    trial: &mut Vec<f64>,
    trial_g: &mut Vec<f64>,
) -> Option<(f64, f64)> {
    const C1: f64 = 1e-4;
    let n = x.len();
    trial.resize(n, 0.0);
    trial_g.resize(n, 0.0);
    let mut t = t0;
    for _ in 0..60 {
        let mut decrease = 0.0;
        for i in 0..n {
            trial[i] = bounds.clamp(i, x[i] - t * d[i]);
            decrease += g[i] * (x[i] - trial[i]);
        }
        if decrease <= 0.0 {
            if trial.iter().zip(x.iter()).all(|(a, b)| a == b) {
                return None;
            }
            t *= 0.5;
            continue;
        }
        let ft = p.value_grad(trial, trial_g);
        if ft.is_finite() && ft <= f - C1 * decrease {
            x.copy_from_slice(trial);
            g.copy_from_slice(trial_g);
            return Some((ft, t));
        }
        t *= 0.5;
    }
    None
}

#[cfg(test)]
pub(crate) mod test_problems {
    use super::*;

    /// Rosenbrock-type chain with a tridiagonal Hessian.
    pub struct Chain {
        pub n: usize,
    }

    impl Objective for Chain {
        fn dim(&self) -> usize {
            self.n
        }
        fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
            g.iter_mut().for_each(|a| *a = 0.0);
            let mut f = 0.0;
            for i in 0..self.n - 1 {
                let a = x[i + 1] - x[i] * x[i];
                let b = 1.0 - x[i];
                f += 10.0 * a * a + b * b;
                g[i + 1] += 20.0 * a;
                g[i] += -40.0 * a * x[i] - 2.0 * b;
            }
            f
        }
    }

    impl HessianObjective for Chain {
        fn bandwidth(&self) -> usize {
            1
        }
        fn hessian(&self, x: &[f64], h: &mut SymBanded) {
            h.clear();
            for i in 0..self.n - 1 {
                let a = x[i + 1] - x[i] * x[i];
                // Gauss-Newton part only keeps the approximation PSD.
                let ji = [-2.0 * x[i], 1.0];
                let w = 20.0;
                h.add(i, i, w * ji[0] * ji[0] + 2.0);
                h.add(i + 1, i, w * ji[0] * ji[1]);
                h.add(i + 1, i + 1, w * ji[1] * ji[1]);
                let _ = a;
            }
        }
    }
}

/// Central-difference gradient with step `h`, for checking analytic
/// gradients.
pub fn finite_difference_gradient<P: Objective + ?Sized>(p: &P, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = p.value(&xp);
            xp[i] = x[i] - h;
            let fm = p.value(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `max_i |a_i − b_i| / max(‖b‖_∞, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(floor, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
