use std::collections::VecDeque;

use super::{active_gradient_threshold, diverged, projected_search, Bounds, Objective, SolveReport, SolverOptions};
use crate::error::Result;

/// Projected L-BFGS: the two-loop recursion restricted to the free
/// variables, followed by a projected Armijo search.
pub fn projected_lbfgs<P: Objective + ?Sized>(
    p: &P,
    bounds: &Bounds,
    x: &mut [f64],
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let n = p.dim();
    bounds.check(n)?;
    bounds.project(x);
    let mut g = vec![0.0; n];
    let mut f = p.value_grad(x, &mut g);
    if !f.is_finite() {
        return Err(diverged("non-finite initial energy", 0, x));
    }
    let mut history = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut d = vec![0.0; n];
    let mut free = vec![true; n];
    let (mut trial, mut trial_g) = (Vec::new(), Vec::new());
    let mut alpha = vec![0.0; opts.memory.max(1)];
    let mut converged = false;
    let mut small_steps = 0;
    let mut iterations = 0;

    for it in 0..opts.max_iters {
        iterations = it;
        let kkt = bounds.kkt_residual(x, &g);
        if kkt <= opts.gtol {
            converged = true;
            break;
        }
        let eps_act = kkt.min(1e-8);
        let g_act = active_gradient_threshold(&g);
        for i in 0..n {
            free[i] = !(bounds.is_pinned(i)
                || (x[i] <= bounds.lower[i] + eps_act && g[i] > g_act)
                || (x[i] >= bounds.upper[i] - eps_act && g[i] < -g_act));
            d[i] = if free[i] { g[i] } else { 0.0 };
        }
        // Two-loop recursion on the free subspace.
        for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
            let a = rho * dot_masked(s, &d, &free);
            alpha[k] = a;
            for i in 0..n {
                if free[i] {
                    d[i] -= a * y[i];
                }
            }
        }
        let gamma = pairs
            .back()
            .map(|(s, y, _)| dot_masked(s, y, &free) / dot_masked(y, y, &free).max(1e-300))
            .filter(|g| g.is_finite() && *g > 0.0);
        let t0 = match gamma {
            Some(gm) => {
                d.iter_mut().for_each(|a| *a *= gm);
                1.0
            }
            None => 1.0 / d.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300),
        };
        for (k, (s, y, rho)) in pairs.iter().enumerate() {
            let b = rho * dot_masked(y, &d, &free);
            for i in 0..n {
                if free[i] {
                    d[i] += (alpha[k] - b) * s[i];
                }
            }
        }

        let x_old = x.to_vec();
        let g_old = g.clone();
        let step = projected_search(p, bounds, x, &mut g, f, &d, t0, &mut trial, &mut trial_g).or_else(|| {
            pairs.clear();
            let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
            d.copy_from_slice(&g);
            projected_search(p, bounds, x, &mut g, f, &d, 1.0 / gn, &mut trial, &mut trial_g)
        });
        let Some((f_new, _)) = step else { break };
        if !f_new.is_finite() {
            return Err(diverged("non-finite energy", it, x));
        }
        let s: Vec<f64> = x.iter().zip(&x_old).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-16 * s.iter().map(|a| a * a).sum::<f64>().sqrt() * y.iter().map(|a| a * a).sum::<f64>().sqrt() {
            if pairs.len() == opts.memory.max(1) {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let rel = (f - f_new) / f.abs().max(1.0);
        small_steps = if rel <= opts.ftol { small_steps + 1 } else { 0 };
        f = f_new;
        history.push(f);
        iterations = it + 1;
        if small_steps >= 3 {
            converged = true;
            break;
        }
    }
    let kkt = bounds.kkt_residual(x, &g);
    converged |= kkt <= opts.gtol;
    Ok(SolveReport {
        value: f,
        iterations,
        converged,
        kkt_residual: kkt,
        history,
    })
}

fn dot_masked(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|((x, y), _)| x * y)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::test_problems::Chain;

    #[test]
    fn lbfgs_minimizes_chain() {
        let p = Chain { n: 12 };
        let mut x = vec![0.0; 12];
        let opts = SolverOptions {
            max_iters: 5000,
            gtol: 1e-9,
            ..Default::default()
        };
        let rep = projected_lbfgs(&p, &Bounds::unbounded(12), &mut x, &opts).unwrap();
        assert!(rep.value < 1e-12, "{rep:?}");
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn lbfgs_box_solution_matches_newton() {
        let p = Chain { n: 8 };
        let mut b = Bounds::unbounded(8);
        for i in 0..8 {
            b.set(i, -2.0, 0.6);
        }
        let opts = SolverOptions {
            max_iters: 20000,
            gtol: 1e-10,
            ..Default::default()
        };
        let mut x1 = vec![0.0; 8];
        let r1 = projected_lbfgs(&p, &b, &mut x1, &opts).unwrap();
        let mut x2 = vec![0.0; 8];
        let r2 = crate::optim::projected_newton(&p, &b, &mut x2, &opts).unwrap();
        assert!((r1.value - r2.value).abs() < 1e-8, "{} vs {}", r1.value, r2.value);
    }
}
