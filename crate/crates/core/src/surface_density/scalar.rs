use rayon::prelude::*;

use super::SurfaceParams;
use crate::error::{input, Error, Result};
use crate::mesh::{Assembler, Mesh};
use crate::optim::{Bounds, SolverOptions};
use crate::phase_field::integrand::GeodesicIntegrand;
use crate::surface_density::M_NUM;

#[derive(Clone, Debug)]
pub struct GscalSolution {
    /// Discrete value of `∫₀¹ (1−β)(f_p^q(β)|α′|^q + |β′|^q)^{1/q}`.
    pub value: f64,
    /// Minimised `q`-th power energy; its `q`-th root bounds `value` above.
    pub energy: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `g_scal(s)` on `n` nodes; see [`g_scal_solve`].
pub fn g_scal(s: f64, params: &SurfaceParams, n: usize) -> Result<f64> {
    Ok(g_scal_solve(s, params, n)?.value)
}

/// Minimises the weighted length of paths `(α, β)` on `[0, 1]` from
/// `(0, 1)` to `(s, 1)`.
///
/// The length functional is 1-homogeneous in the velocity, so its
/// minimisers are the constant-speed minimisers of the `q`-th power of the
/// integrand, which is what is actually descended. Two starting paths are
/// tried: a shallow well with a smoothed step in `α`, and a crack that
/// reaches `β = 0` and jumps there.
pub fn g_scal_solve(s: f64, params: &SurfaceParams, n: usize) -> Result<GscalSolution> {
    if !(s >= 0.0) || !s.is_finite() {
        return input(format!("g_scal needs a finite s >= 0, got {s}"));
    }
    if n < 5 {
        return input("g_scal needs at least 5 nodes");
    }
    if s == 0.0 {
        return Ok(GscalSolution {
            value: 0.0,
            energy: 0.0,
            alpha: vec![0.0; n],
            beta: vec![1.0; n],
            iterations: 0,
            converged: true,
        });
    }
    let h = 1.0 / (n - 1) as f64;
    let t = |i: usize| i as f64 * h;
    let bmin = (1.0 - s.powf(1.0 / (params.p + 1.0))).max(0.0);
    let well: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let ti = t(i);
            let a = s * 0.5 * (1.0 + ((ti - 0.5) * 20.0).tanh());
            let b = 1.0 - (1.0 - bmin) * (4.0 * ti.min(1.0 - ti)).min(1.0);
            (a, b)
        })
        .collect();
    let crack: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let ti = t(i);
            let a = if ti > 0.5 + 1e-12 {
                s
            } else if ti < 0.5 - 1e-12 {
                0.0
            } else {
                0.5 * s
            };
            let b = (((ti - 0.5).abs() - h) / (0.5 - h)).clamp(0.0, 1.0);
            (a, b)
        })
        .collect();

    let mut asm = Assembler::new(Mesh::line(n - 1, h), 1, GeodesicIntegrand::new(params, M_NUM));
    let mut bounds = Bounds::unbounded(2 * n);
    for i in 0..n {
        bounds.set(2 * i + 1, 0.0, 1.0);
    }
    bounds.pin(0, 0.0);
    bounds.pin(1, 1.0);
    bounds.pin(2 * (n - 1), s);
    bounds.pin(2 * (n - 1) + 1, 1.0);
    let opts = SolverOptions {
        max_iters: 2000,
        gtol: 1e-12,
        ftol: 1e-15,
        memory: 12,
    };

    // Reaching the active set along a deep well is slow for projected
    // Newton, so large jumps start from the crack and give the well a
    // bounded budget.
    let starts = if s >= 1.0 {
        [(crack, opts.max_iters), (well, 400)]
    } else {
        [(well, opts.max_iters), (crack, 400)]
    };
    let mut best: Option<GscalSolution> = None;
    for (k, (start, budget)) in starts.into_iter().enumerate() {
        // A crack path costs about 1, so it can only win when the well does not.
        if k == 1 && s < 1.0 && best.as_ref().is_some_and(|b| b.value < 0.9) {
            break;
        }
        let mut x: Vec<f64> = start.iter().flat_map(|&(a, b)| [a, b]).collect();
        let opts = SolverOptions { max_iters: budget, ..opts.clone() };
        let rep = asm.minimize(&bounds, &mut x, &opts)?;
        let mut r = vec![0.0; asm.layout.nr()];
        let mut value = 0.0;
        for e in asm.elements() {
            asm.reduced(e, &x, &mut r);
            value += e.weight * asm.integrand.length(&r);
        }
        let sol = GscalSolution {
            value,
            energy: rep.value,
            alpha: x.iter().step_by(2).cloned().collect(),
            beta: x.iter().skip(1).step_by(2).cloned().collect(),
            iterations: rep.iterations,
            converged: rep.converged,
        };
        if best.as_ref().map_or(true, |b| sol.value < b.value) {
            best = Some(sol);
        }
    }
    let best = best.expect("two starts");
    if !best.value.is_finite() {
        return Err(Error::Divergence {
            reason: "non-finite length".into(),
            iterations: best.iterations,
            last_state: best.beta,
        });
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(s, g)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(log x, log y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 2 {
        return input("a power-law fit needs at least two points");
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return input("power-law fit needs positive finite data");
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return input("power-law fit needs distinct abscissae");
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExponentFit {
        exponent: slope,
        intercept: my - slope * mx,
        r2,
        points: points.to_vec(),
    })
}

/// Fits `g_scal(s) ≈ C s^γ` over `s_grid`, solving the grid points in
/// parallel.
pub fn fit_small_z_exponent(params: &SurfaceParams, s_grid: &[f64], n: usize) -> Result<ExponentFit> {
    if s_grid.len() < 5 {
        return input("exponent fit needs at least 5 grid points");
    }
    let values: Vec<Result<f64>> = s_grid.par_iter().map(|&s| g_scal(s, params, n)).collect();
    let mut points = Vec::with_capacity(s_grid.len());
    for (&s, v) in s_grid.iter().zip(values) {
        points.push((s, v?));
    }
    fit_power_law(&points)
}

/// Smallest `C` with `φ/C ≤ g ≤ Cφ` on the samples, `φ(s) = min(s^{2/(p+1)}, 1)`.
pub fn empirical_scaling_constant(points: &[(f64, f64)], p: f64) -> f64 {
    points
        .iter()
        .filter(|(s, _)| *s > 0.0)
        .map(|&(s, g)| {
            let phi = s.powf(2.0 / (p + 1.0)).min(1.0);
            (g / phi).max(phi / g)
        })
        .fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_jump_and_errors() {
        let p = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(g_scal(0.0, &p, 50).unwrap(), 0.0);
        assert!(g_scal(-1.0, &p, 50).is_err());
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| {
            let s = 10f64.powf(-3.0 + 0.4 * i as f64);
            (s, 2.0 * s.powf(0.7))
        }).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent - 0.7).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_constant_is_at_least_one() {
        assert_eq!(empirical_scaling_constant(&[(1.0, 1.0)], 2.0), 1.0);
        assert!((empirical_scaling_constant(&[(8.0, 0.5)], 2.0) - 2.0).abs() < 1e-12);
    }
}
