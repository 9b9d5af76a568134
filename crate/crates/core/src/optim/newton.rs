use super::{active_gradient_threshold, diverged, projected_search, Bounds, HessianObjective, SolveReport, SolverOptions, SymBanded};
use crate::error::Result;

/// Projected Newton method with Levenberg-type damping.
///
/// Variables sitting on a bound with the gradient pointing outwards are
/// frozen for the step; the remaining block is solved with the banded
/// Hessian. The damping grows whenever the factorisation fails or a unit
/// step is rejected, and shrinks after accepted unit steps.
pub fn projected_newton<P: HessianObjective + ?Sized>(
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
    let mut hess = SymBanded::zeros(n, p.bandwidth());
    let mut work = SymBanded::zeros(n, p.bandwidth());
    let mut d = vec![0.0; n];
    let mut active = vec![false; n];
    let (mut trial, mut trial_g) = (Vec::new(), Vec::new());
    let mut mu = 1e-10;
    let mut small_steps = 0;
    let mut converged = false;
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
            active[i] = bounds.is_pinned(i)
                || (x[i] <= bounds.lower[i] + eps_act && g[i] > g_act)
                || (x[i] >= bounds.upper[i] - eps_act && g[i] < -g_act);
        }

        p.hessian(x, &mut hess);
        // Damping is relative to each diagonal entry, with a tiny floor
        // for rows whose curvature vanishes.
        let mut scale: f64 = 0.0;
        for i in 0..n {
            if !active[i] {
                scale = scale.max(hess.diag(i).abs());
            }
        }
        let floor = if scale > 0.0 { 1e-10 * scale } else { 1.0 };

        let mut factored = false;
        for _ in 0..40 {
            work.clone_from(&hess);
            for i in 0..n {
                if active[i] {
                    work.pin(i);
                } else {
                    let hii = work.diag(i);
                    work.add_diag(i, mu * (hii.abs() + floor));
                }
            }
            if work.cholesky_in_place() {
                factored = true;
                break;
            }
            mu = (mu * 10.0).max(1e-8);
        }

        let mut accepted = None;
        if factored {
            for i in 0..n {
                d[i] = if active[i] { 0.0 } else { g[i] };
            }
            work.cholesky_solve(&mut d);
            for i in 0..n {
                if active[i] {
                    d[i] = 0.0;
                }
            }
            accepted = projected_search(p, bounds, x, &mut g, f, &d, 1.0, &mut trial, &mut trial_g);
        }
        let (f_new, t) = match accepted {
            Some(ft) => ft,
            None => {
                // Fall back to a scaled gradient step.
                let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
                d.copy_from_slice(&g);
                match projected_search(p, bounds, x, &mut g, f, &d, 1.0 / gn, &mut trial, &mut trial_g) {
                    Some(ft) => {
                        mu = (mu * 100.0).max(1e-6);
                        ft
                    }
                    None => break,
                }
            }
        };
        if !f_new.is_finite() {
            return Err(diverged("non-finite energy", it, x));
        }
        if t >= 1.0 {
            mu = (mu * 0.25).max(1e-12);
        } else {
            mu = (mu * 4.0).min(1e8);
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
    if kkt <= opts.gtol {
        converged = true;
    }
    Ok(SolveReport {
        value: f,
        iterations,
        converged,
        kkt_residual: kkt,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::test_problems::Chain;
    use crate::optim::Objective;

    #[test]
    fn minimizes_chain_to_ones() {
        let p = Chain { n: 30 };
        let mut x = vec![-0.5; 30];
        let rep = projected_newton(&p, &Bounds::unbounded(30), &mut x, &SolverOptions::default()).unwrap();
        assert!(rep.value < 1e-16, "{rep:?}");
        for xi in &x {
            assert!((xi - 1.0).abs() < 1e-6);
        }
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_bounds_and_pins() {
        let p = Chain { n: 10 };
        let mut b = Bounds::unbounded(10);
        for i in 0..10 {
            b.set(i, -1.0, 0.5);
        }
        b.pin(0, 0.2);
        let mut x = vec![0.0; 10];
        let rep = projected_newton(&p, &b, &mut x, &SolverOptions::default()).unwrap();
        assert_eq!(x[0], 0.2);
        assert!(x.iter().all(|v| *v <= 0.5 && *v >= -1.0));
        assert!(rep.kkt_residual < 1e-6, "{rep:?}");
        let mut g = vec![0.0; 10];
        p.value_grad(&x, &mut g);
        assert!(bounds_kkt_ok(&b, &x, &g));
    }

    fn bounds_kkt_ok(b: &Bounds, x: &[f64], g: &[f64]) -> bool {
        b.kkt_residual(x, g) < 1e-6
    }
}
