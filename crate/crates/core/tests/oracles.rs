//! Values checked against formulas evaluated independently of the library
//! code paths.

use cohesive_phase::energy_models::{check_projection_property, h_delta, MatrixDensity};
use cohesive_phase::mesh::Mesh;
use cohesive_phase::phase_field::{
    assemble_energy, beta_delta, phi, BarProblem, BoundaryCondition, Mollifier, PhaseFieldState, StaggeredOptions,
};
use cohesive_phase::surface_density::{cell_energy, g_scal, Profile};
use cohesive_phase::{BulkDensity, SurfaceParams};
use nalgebra::{DMatrix, DVector};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn kappa_and_conjugate_exponent() {
    let p2 = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    assert_eq!(p2.qprime(), 2.0);
    assert!(close(p2.kappa(), 4.0, 1e-15));
    // q = 3: q' = 3/2, kappa = 1.5 * 3^(1/2)
    let p3 = SurfaceParams::new(2.0, 3.0, 1.0).unwrap();
    assert!(close(p3.kappa(), 1.5 * 3f64.sqrt(), 1e-15));
}

#[test]
fn h_delta_by_hand() {
    let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    let psi = BulkDensity::power(2.0).unwrap();
    // slope = (1 - 0.25)^{-1} = 4/3; Psi(3) = 9, 4/3 * 3 = 4 < 9.
    assert!(close(h_delta(&psi, &params, 0.5, &[3.0]).unwrap(), 4.0, 1e-14));
    // Psi(1) = 1 < 4/3.
    assert!(close(h_delta(&psi, &params, 0.5, &[1.0]).unwrap(), 1.0, 1e-14));
}

#[test]
fn beta_delta_by_hand() {
    let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    // (1 - 1/4)^{1/2} (Phi(1/2) - Phi(1/4)) = sqrt(3)/2 * (3/8 - 7/32)
    let expected = 3f64.sqrt() / 2.0 * (3.0 / 8.0 - 7.0 / 32.0);
    assert!(close(beta_delta(0.5, &params), expected, 1e-15));
    assert_eq!(phi(1.0), 0.5);
}

#[test]
fn hat_density_witness() {
    // xi = diag(1, 0.1): |xi|^2 = 1.01, det = 0.1, so (1.01 - 0.2)^2 + 0.01 = 0.6661;
    // projected diag(1, 0): (1 - 0)^2 = 1.
    let psi = BulkDensity::compressible_hat(1.0).unwrap().recession();
    let xi = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.1]);
    let rep = check_projection_property(&psi, &[(xi, DVector::from_vec(vec![1.0, 0.0]))]).unwrap();
    assert!(close(rep.worst_violation, 0.6661 - 1.0, 1e-12));
}

/// Direct sum over intervals: mean of `v`, forward differences.
fn energy_1d(u: &[f64], v: &[f64], h: f64, eps: f64, p: &SurfaceParams) -> f64 {
    let (q, qp) = (p.q, p.q / (p.q - 1.0));
    let kappa = qp * q.powf(qp / q);
    (0..u.len() - 1)
        .map(|i| {
            let c = 0.5 * (v[i] + v[i + 1]);
            let fp = p.ell * c / (1.0 - c).powf(p.p);
            let coef = (eps.powf(q - 1.0) * fp.powf(q)).min(1.0);
            let du = (u[i + 1] - u[i]) / h;
            let dv = (v[i + 1] - v[i]) / h;
            h * (coef * du.abs().powf(q) + (1.0 - c).powf(qp) / (kappa * eps) + eps.powf(q - 1.0) * dv.abs().powf(q))
        })
        .sum()
}

#[test]
fn one_dimensional_energy_matches_direct_sum() {
    let params = SurfaceParams::new(1.7, 3.0, 0.8).unwrap();
    let n = 30;
    let h = 1.0 / n as f64;
    let mut s = PhaseFieldState::new(Mesh::line(n, h), 1, 0.15).unwrap();
    for k in 0..=n {
        let x = k as f64 * h;
        s.u[k] = (5.0 * x).sin() + 2.0 * x;
        s.v[k] = 0.5 + 0.45 * (7.0 * x).cos();
    }
    let psi = BulkDensity::power(3.0).unwrap();
    let e = assemble_energy(&s, &psi, &params, &BoundaryCondition::none()).unwrap();
    let oracle = energy_1d(&s.u, &s.v, h, 0.15, &params);
    assert!(close(e, oracle, 1e-12), "{e} vs {oracle}");
}

#[test]
fn elastic_bar_energy_is_z_squared_over_length() {
    let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    let bar = BarProblem::scalar(0.3, params).unwrap();
    let r = bar.solve(0.05, None, &StaggeredOptions::default()).unwrap();
    assert!(close(r.energy, 0.09, 1e-9), "{}", r.energy);
}

#[test]
fn crack_saturation() {
    // A crack costs 2 * int_0^1 (1 - b) db = 1 along the path (0,1) -> (0,0) -> (s,0) -> (s,1).
    let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    let g = g_scal(100.0, &params, 2000).unwrap();
    assert!((0.95..=1.02).contains(&g), "{g}");
}

/// Three-segment path: down to `b` at `α = 0`, across at `β = b`, back up.
/// Its length `(1−b)² + (1−b) f_p(b) s` bounds `g_scal(s)` from above.
fn three_segment_bound(s: f64, p: &SurfaceParams) -> f64 {
    (1..2000)
        .map(|k| {
            let b = k as f64 / 2000.0;
            (1.0 - b).powi(2) + (1.0 - b) * p.ell * b / (1.0 - b).powf(p.p) * s
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn g_scal_below_explicit_paths_with_the_same_scaling() {
    for pv in [1.5, 2.0, 3.0] {
        let params = SurfaceParams::new(pv, 2.0, 1.0).unwrap();
        for s in [1e-3, 1e-2, 1e-1, 1.0] {
            let g = g_scal(s, &params, 1000).unwrap();
            let u = three_segment_bound(s, &params);
            assert!(g <= u * (1.0 + 1e-3), "p={pv} s={s}: {g} > {u}");
            // The three-segment bound has the same power law, so the ratio
            // stays bounded away from zero.
            assert!(g >= 0.3 * u, "p={pv} s={s}: {g} vs {u}");
        }
    }
}

#[test]
fn optimal_crack_profile_costs_one() {
    // beta = 1 - exp(-|x|/2): (1-beta)^2/4 + beta'^2 = exp(-|x|)/2 integrates to 1.
    let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
    let psi = BulkDensity::power(2.0).unwrap().recession();
    let (t, n) = (40.0, 16001);
    let p = Profile::from_fn(&[3.0], &[1.0], t, n, |x| if x > 0.0 { 1.0 } else { 0.0 }, |x| 1.0 - (-x.abs() / 2.0).exp()).unwrap();
    let e = cell_energy(&p, &psi, &params, f64::INFINITY).unwrap();
    assert!((e - 1.0).abs() < 2e-3, "{e}");
    assert_eq!(psi.value(&[0.0]), 0.0);
}

#[test]
fn mollifier_marginal_by_quadrature() {
    // phi(x) ~ exp(-1/(1-|x|^2)) on the unit disc; marginal CDF at t by a
    // plain midpoint rule on a fine grid.
    let bump = |x: f64, y: f64| {
        let r2 = x * x + y * y;
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    };
    let k = 1200;
    let d = 2.0 / k as f64;
    let mut total = 0.0;
    let mut below = 0.0;
    let t = 0.3;
    for i in 0..k {
        let x = -1.0 + (i as f64 + 0.5) * d;
        let col: f64 = (0..k).map(|j| bump(x, -1.0 + (j as f64 + 0.5) * d)).sum();
        total += col;
        if x < t {
            below += col;
        }
    }
    let m = Mollifier::new(2);
    assert!((m.marginal_cdf(t) - below / total).abs() < 2e-3);
    assert!((m.marginal_cdf(0.0) - 0.5).abs() < 1e-9);
    assert_eq!(m.marginal_cdf(-1.0), 0.0);
    assert_eq!(m.marginal_cdf(1.0), 1.0);
}
