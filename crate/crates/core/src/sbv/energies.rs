use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{quantize_selected, DiscreteSBV, FacetTag};
use crate::energy_models::MatrixDensity;
use crate::error::{input, Error, Result};

/// `H_g(u) = Σ_{jump facets} g([u], ν) h^{dim−1}`.
pub fn surface_energy<G: Fn(&[f64], &[f64]) -> f64>(u: &DiscreteSBV, g: G) -> f64 {
    surface_energy_where(u, g, |_| true)
}

/// [`surface_energy`] restricted to jump facets whose amplitude passes
/// `keep`.
pub fn surface_energy_where<G, K>(u: &DiscreteSBV, g: G, keep: K) -> f64
where
    G: Fn(&[f64], &[f64]) -> f64,
    K: Fn(f64) -> bool,
{
    let mut diff = vec![0.0; u.m];
    let normals = [u.normal(0), if u.dim == 2 { u.normal(1) } else { u.normal(0) }];
    let mut total = 0.0;
    for k in 0..u.n_facets() {
        if u.tags[k] != FacetTag::Jump {
            continue;
        }
        u.facet_difference(k, &mut diff);
        let amp = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
        if amp == 0.0 || !keep(amp) {
            continue;
        }
        total += g(&diff, &normals[u.facet(k).axis]);
    }
    total * u.facet_area()
}

/// `H_Ψ(u) = Σ_cells Ψ(∇u) h^{dim}` with the cell gradient of
/// [`DiscreteSBV::cell_gradient`].
pub fn bulk_energy<D: MatrixDensity + ?Sized>(u: &DiscreteSBV, density: &D) -> f64 {
    let mut g = vec![0.0; u.m * u.dim];
    let mut total = 0.0;
    for c in 0..u.n_cells() {
        u.cell_gradient(c, &mut g);
        total += density.value(&g);
    }
    total * u.cell_volume()
}

/// Isotropic model surface density `g₀(s) = ℓ s^γ` with `γ ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G0Density {
    pub gamma: f64,
    pub ell: f64,
}

impl G0Density {
    pub fn new(gamma: f64, ell: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return input(format!("gamma must lie in (0, 1), got {gamma}"));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return input(format!("ell must be positive, got {ell}"));
        }
        Ok(G0Density { gamma, ell })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.ell * s.abs().powf(self.gamma)
    }

    /// `g₀(|z|)`, usable as a surface density in [`surface_energy`].
    pub fn surface(&self) -> impl Fn(&[f64], &[f64]) -> f64 + '_ {
        move |z, _| self.eval(z.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Largest `g₀(s+t) − g₀(s) − g₀(t)` over random pairs in `[0, s_max]²`.
    pub fn worst_subadditivity_defect(&self, pairs: usize, s_max: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..pairs)
            .map(|_| {
                let s = rng.gen_range(0.0..s_max);
                let t = rng.gen_range(0.0..s_max);
                self.eval(s + t) - self.eval(s) - self.eval(t)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Right-hand side of the piecewise-constant approximation estimate, term
/// by term; the unknown constant `C` is reported as `ratio`.
#[derive(Clone, Debug)]
pub struct QuantizationReport {
    /// `H_g(u_ε)`.
    pub lhs: f64,
    /// `H_g(u)`.
    pub base: f64,
    /// `(ε/δ)^γ H_g(u)`.
    pub delta_term: f64,
    /// `(η/ε)^{1−γ} H_g(u)`.
    pub eta_term: f64,
    /// `(ε/η)^γ H_g(u; {|[u]| ∈ [η, δ)})`.
    pub band_term: f64,
    /// `ε^{γ−1} ‖∇u‖₁`.
    pub gradient_term: f64,
    /// Smallest `C` with `lhs ≤ base + C·(sum of the four terms)`.
    pub ratio: f64,
    pub rho: Vec<f64>,
    /// `‖u − u_ε‖_∞ ≤ ε`.
    pub sup_ok: bool,
    /// `|Du_ε^i| ≤ |Du^i|` for every component.
    pub tv_ok: bool,
    pub quantized: DiscreteSBV,
}

/// Quantises `u` with the selected offsets and evaluates every term of the
/// estimate for `g = g₀(|·|)`.
pub fn verify_quantization_estimate(u: &DiscreteSBV, eps: f64, delta: f64, eta: f64, g0: &G0Density) -> Result<QuantizationReport> {
    if !(delta > 4.0 * eps) {
        return input(format!("need delta > 4 eps, got delta={delta}, eps={eps}"));
    }
    if !(eta > 0.0 && eta < eps) {
        return input(format!("need 0 < eta < eps, got eta={eta}, eps={eps}"));
    }
    let (q, rho) = quantize_selected(u, eps)?;
    let g = g0.surface();
    let lhs = surface_energy(&q, &g);
    let base = surface_energy(u, &g);
    let gam = g0.gamma;
    let delta_term = (eps / delta).powf(gam) * base;
    let eta_term = (eta / eps).powf(1.0 - gam) * base;
    let band = surface_energy_where(u, &g, |a| a >= eta && a < delta);
    let band_term = (eps / eta).powf(gam) * band;
    let gradient_term = eps.powf(gam - 1.0) * u.gradient_l1();
    let rhs = delta_term + eta_term + band_term + gradient_term;
    let excess = (lhs - base).max(0.0);
    let ratio = if excess == 0.0 {
        0.0
    } else if rhs > 0.0 {
        excess / rhs
    } else {
        f64::INFINITY
    };
    let sup_ok = u.sup_distance(&q)? <= eps;
    let tv_ok = (0..u.m).all(|i| q.component_variation(i) <= u.component_variation(i) * (1.0 + TV_SLACK));
    Ok(QuantizationReport {
        lhs,
        base,
        delta_term,
        eta_term,
        band_term,
        gradient_term,
        ratio,
        rho,
        sup_ok,
        tv_ok,
        quantized: q,
    })
}

/// Relative slack for comparing variations that are equal in exact
/// arithmetic but summed in a different order.
pub const TV_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BvEllipticityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// The flat interface `zχ_{x·ν>1/2}` on `n×n` cells of the unit square,
/// `ν = e_axis`.
pub fn reference_step(n: usize, z: &[f64], axis: usize) -> Result<DiscreteSBV> {
    if n < 4 || n % 2 != 0 {
        return input("the unit-square grid needs an even cell count >= 4");
    }
    if axis > 1 {
        return input("normal must be e1 or e2");
    }
    let m = z.len();
    let mut values = vec![0.0; n * n * m];
    for j in 0..n {
        for i in 0..n {
            let coord = if axis == 0 { i } else { j };
            if coord >= n / 2 {
                values[(i + j * n) * m..(i + j * n + 1) * m].copy_from_slice(z);
            }
        }
    }
    DiscreteSBV::piecewise_constant(2, [n, n], 1.0 / n as f64, m, values)
}

/// Reference step with an intermediate plateau `θz` inserted just past the
/// interface, `width` cells thick, leaving a one-cell collar untouched.
pub fn split_competitor(n: usize, z: &[f64], axis: usize, theta: f64, width: usize) -> Result<DiscreteSBV> {
    let step = reference_step(n, z, axis)?;
    if width == 0 || n / 2 + width > n - 1 {
        return input("plateau width must fit inside the collar");
    }
    let m = z.len();
    let mut values = step.values.clone();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let along = if axis == 0 { i } else { j };
            if along >= n / 2 && along < n / 2 + width {
                for a in 0..m {
                    values[(i + j * n) * m + a] = theta * z[a];
                }
            }
        }
    }
    DiscreteSBV::piecewise_constant(2, [n, n], step.h, m, values)
}

/// Compares `g(z, ν)` with `H_g` of a competitor that agrees with the
/// reference step on the outer ring of cells.
pub fn bv_ellipticity_test<G: Fn(&[f64], &[f64]) -> f64>(
    g: G,
    z: &[f64],
    nu: &[f64],
    competitor: &DiscreteSBV,
    tol: f64,
) -> Result<BvEllipticityReport> {
    if competitor.dim != 2 || competitor.shape[0] != competitor.shape[1] {
        return Err(Error::Shape("competitor must live on a square 2D grid".into()));
    }
    let axis = match nu {
        [x, y] if (*x - 1.0).abs() < 1e-14 && *y == 0.0 => 0,
        [x, y] if *x == 0.0 && (*y - 1.0).abs() < 1e-14 => 1,
        _ => return input("only the normals e1 and e2 are supported on the grid"),
    };
    let n = competitor.shape[0];
    let reference = reference_step(n, z, axis)?;
    for j in 0..n {
        for i in 0..n {
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                let c = i + j * n;
                if competitor.value(c) != reference.value(c) {
                    return input("competitor differs from the reference step on the collar");
                }
            }
        }
    }
    let lhs = g(z, nu);
    let rhs = surface_energy(competitor, &g);
    Ok(BvEllipticityReport {
        lhs,
        rhs,
        violated: lhs > rhs + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_models::BulkDensity;

    #[test]
    fn single_step_surface_energy() {
        let g0 = G0Density::new(0.5, 1.0).unwrap();
        let u = DiscreteSBV::piecewise_constant(1, [4, 1], 0.25, 1, vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        assert!((surface_energy(&u, g0.surface()) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn affine_field_has_only_bulk() {
        let n = 20;
        let h = 1.0 / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 * h).collect();
        let u = DiscreteSBV::classify(1, [n, 1], h, 1, vals, 10.0).unwrap();
        let g0 = G0Density::new(0.5, 1.0).unwrap();
        assert_eq!(surface_energy(&u, g0.surface()), 0.0);
        let psi = BulkDensity::power(2.0).unwrap();
        // The last cell has no forward neighbour.
        assert!((bulk_energy(&u, &psi) - 9.0 * (n - 1) as f64 * h).abs() < 1e-12);
    }

    #[test]
    fn g0_is_subadditive() {
        let g0 = G0Density::new(0.3, 2.0).unwrap();
        assert!(g0.worst_subadditivity_defect(10_000, 10.0, 1) <= 0.0);
        assert!(G0Density::new(1.0, 1.0).is_err());
    }

    #[test]
    fn estimate_hypotheses_are_enforced() {
        let u = DiscreteSBV::piecewise_constant(1, [2, 1], 0.5, 1, vec![0.0, 1.0]).unwrap();
        let g0 = G0Density::new(0.5, 1.0).unwrap();
        assert!(verify_quantization_estimate(&u, 0.1, 0.3, 0.05, &g0).is_err());
        assert!(verify_quantization_estimate(&u, 0.1, 0.5, 0.1, &g0).is_err());
        let r = verify_quantization_estimate(&u, 0.1, 0.5, 0.05, &g0).unwrap();
        assert!(r.sup_ok && r.tv_ok);
        assert_eq!(r.quantized.jump_count(), 1);
    }

    #[test]
    fn split_detects_non_subadditive_density() {
        let z = [2.0];
        let comp = split_competitor(16, &z, 0, 0.5, 1).unwrap();
        let sq = |d: &[f64], _: &[f64]| d.iter().map(|x| x * x).sum::<f64>();
        let r = bv_ellipticity_test(sq, &z, &[1.0, 0.0], &comp, 1e-9).unwrap();
        assert!(r.violated, "{r:?}");
        let g0 = G0Density::new(0.5, 1.0).unwrap();
        let r = bv_ellipticity_test(g0.surface(), &z, &[1.0, 0.0], &comp, 1e-9).unwrap();
        assert!(!r.violated, "{r:?}");
    }

    #[test]
    fn reference_step_is_its_own_competitor() {
        let z = [1.0, -0.5];
        let step = reference_step(10, &z, 1).unwrap();
        let g0 = G0Density::new(0.5, 1.0).unwrap();
        let r = bv_ellipticity_test(g0.surface(), &z, &[0.0, 1.0], &step, 1e-12).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        assert!(!r.violated);
    }
}
