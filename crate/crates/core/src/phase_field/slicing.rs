use super::{assemble_energy, BoundaryCondition, PhaseFieldState};
use crate::energy_models::{check_delta, h_delta_value, BulkDensity, MatrixDensity};
use crate::error::{input, Error, Result};
use crate::sbv::{DiscreteSBV, FacetTag};
use crate::surface_density::SurfaceParams;

/// `Φ(t) = ∫₀ᵗ (1−s) ds = t − t²/2`.
pub fn phi(t: f64) -> f64 {
    t - 0.5 * t * t
}

/// `β_δ = (1−δ^{q′})^{1/q′} (Φ(δ) − Φ(δ^{q′}))`.
pub fn beta_delta(delta: f64, params: &SurfaceParams) -> f64 {
    let qp = params.qprime();
    let dq = delta.powf(qp);
    (1.0 - dq).powf(1.0 / qp) * (phi(delta) - phi(dq))
}

/// Outcome of thresholding a phase-field state at a level of `Φ(v)`.
#[derive(Clone, Debug)]
pub struct SbvThresholdResult {
    /// `u χ_{Φ(v) > t̄}` on the nodes, one cell per node.
    pub ubar: DiscreteSBV,
    pub tbar: f64,
    pub delta: f64,
    pub lower_bound: f64,
    /// `F_ε(u, v)`.
    pub energy: f64,
    /// `δ^{q′+1} Σ h_δ(∇ũ) h` over elements not cut by the threshold.
    pub bulk_term: f64,
    /// `β_δ · Per({Φ(v) > t̄})`.
    pub surface_term: f64,
    /// `h_δ(0) |{v ≤ δ}|`.
    pub defect_term: f64,
    pub perimeter: f64,
}

/// Lower bound for `F_ε(u, v)` from the coarea formula applied to `Φ(v)`.
///
/// Each element satisfies `E_e ≥ δ min(Ψ, ℓ v/(1−v)^{p−1} Ψ^{1/q})
/// + (1−δ^{q′})^{1/q′} (1−v_e)|∇v_e|`, and on an interval
/// `(1−v_e)|∇v_e| = |∇Φ(v)|` exactly because `Φ` is quadratic. The
/// threshold `t̄ ∈ (Φ(δ^{q′}), Φ(δ))` minimises the number of cut elements,
/// which is then at most `Σ|ΔΦ(v)| / (Φ(δ) − Φ(δ^{q′}))`. Only 1D states
/// are accepted, since on triangles the identity above fails.
pub fn slicing_lower_bound(state: &PhaseFieldState, density: &BulkDensity, params: &SurfaceParams, delta: f64) -> Result<SbvThresholdResult> {
    check_delta(delta)?;
    if state.mesh.dim != 1 {
        return input("the slicing bound is implemented for 1D states only");
    }
    let energy = assemble_energy(state, density, params, &BoundaryCondition::none())?;
    let n = state.n_nodes();
    let m = state.m;
    let h = state.h();
    let qp = params.qprime();
    let w: Vec<f64> = state.v.iter().map(|&v| phi(v)).collect();
    let (a, b) = (phi(delta.powf(qp)), phi(delta));

    let cut = |t: f64, i: usize| (w[i] > t) != (w[i + 1] > t);
    let per = |t: f64| (0..n - 1).filter(|&i| cut(t, i)).count();
    let mut knots: Vec<f64> = w.iter().cloned().filter(|x| *x > a && *x < b).collect();
    knots.push(a);
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut best = (usize::MAX, 0.5 * (a + b));
    for k in knots.windows(2) {
        let t = 0.5 * (k[0] + k[1]);
        let p = per(t);
        if p < best.0 {
            best = (p, t);
        }
    }
    let (count, tbar) = best;
    let total_var: f64 = w.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    if (b - a) * count as f64 > total_var * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Invariant("coarea selection failed".into()));
    }

    let inside: Vec<bool> = w.iter().map(|x| *x > tbar).collect();
    let mut values = vec![0.0; n * m];
    for k in 0..n {
        if inside[k] {
            values[k * m..(k + 1) * m].copy_from_slice(state.u_at(k));
        }
    }
    let tags = (0..n - 1)
        .map(|i| if inside[i] != inside[i + 1] { FacetTag::Jump } else { FacetTag::Diffuse })
        .collect();
    let ubar = DiscreteSBV::with_tags(1, [n, 1], h, m, values, tags)?;

    let dq1 = delta.powf(qp + 1.0);
    let mut grad = vec![0.0; m];
    let mut bulk = 0.0;
    for i in 0..n - 1 {
        if inside[i] != inside[i + 1] {
            continue;
        }
        for a in 0..m {
            grad[a] = (ubar.values[(i + 1) * m + a] - ubar.values[i * m + a]) / h;
        }
        bulk += h_delta_value(density.value(&grad), params, delta) * h;
    }
    let bulk_term = dq1 * bulk;
    let perimeter = count as f64;
    let surface_term = beta_delta(delta, params) * perimeter;
    let low = (0..n - 1).filter(|&i| state.v[i].max(state.v[i + 1]) <= delta).count() as f64 * h;
    let defect_term = h_delta_value(density.value(&vec![0.0; m]), params, delta) * low;
    let lower_bound = bulk_term + surface_term - defect_term;
    if lower_bound > energy + 1e-9 * energy.abs().max(1.0) {
        return Err(Error::Invariant(format!("slicing bound {lower_bound} exceeds the energy {energy}")));
    }
    Ok(SbvThresholdResult {
        ubar,
        tbar,
        delta,
        lower_bound,
        energy,
        bulk_term,
        surface_term,
        defect_term,
        perimeter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    fn setup() -> (PhaseFieldState, BulkDensity, SurfaceParams) {
        let s = PhaseFieldState::new(Mesh::line(50, 0.02), 1, 0.05).unwrap();
        (s, BulkDensity::power(2.0).unwrap(), SurfaceParams::new(2.0, 2.0, 1.0).unwrap())
    }

    #[test]
    fn intact_phase_keeps_u() {
        let (mut s, psi, p) = setup();
        s.u.iter_mut().enumerate().for_each(|(i, u)| *u = (i as f64 * 0.1).sin());
        for d in [0.3, 0.6, 0.9] {
            let r = slicing_lower_bound(&s, &psi, &p, d).unwrap();
            assert_eq!(r.ubar.values, s.u);
            assert_eq!(r.perimeter, 0.0);
            assert!(r.lower_bound <= r.energy);
        }
    }

    #[test]
    fn broken_phase_gives_nonpositive_bound() {
        let (mut s, psi, p) = setup();
        s.v.iter_mut().for_each(|v| *v = 0.0);
        let r = slicing_lower_bound(&s, &psi, &p, 0.6).unwrap();
        assert!(r.ubar.values.iter().all(|u| *u == 0.0));
        assert!(r.lower_bound <= 0.0);
    }

    #[test]
    fn rejects_bad_delta() {
        let (s, psi, p) = setup();
        assert!(slicing_lower_bound(&s, &psi, &p, 1.0).is_err());
        assert!(slicing_lower_bound(&s, &psi, &p, 0.0).is_err());
    }
}
