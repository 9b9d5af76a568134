use super::DiscreteSBV;
use crate::error::{input, Result};

/// Quantisation step per component, `ε/√m`.
pub fn quantization_step(eps: f64, m: usize) -> f64 {
    eps / (m as f64).sqrt()
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        input(format!("quantisation step must be positive, got {eps}"))
    }
}

fn level(u: f64, s: f64, rho: f64) -> i64 {
    (u / s + rho).floor() as i64
}

/// `u_{ε,ρ} = s⌊u/s + ρ⌋` componentwise with `s = ε/√m`. The result is
/// piecewise constant; every facet with a nonzero difference is a jump.
pub fn quantize(u: &DiscreteSBV, eps: f64, rho: &[f64]) -> Result<DiscreteSBV> {
    check_eps(eps)?;
    if rho.len() != u.m {
        return input(format!("offset has {} components, field has {}", rho.len(), u.m));
    }
    if rho.iter().any(|r| !(0.0..1.0).contains(r)) {
        return input("offsets must lie in [0, 1)");
    }
    let s = quantization_step(eps, u.m);
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| s * level(x, s, rho[k % u.m]) as f64)
        .collect();
    DiscreteSBV::piecewise_constant(u.dim, u.shape, u.h, u.m, values)
}

/// Left ends of the intervals of `[0, 1)` on which every level of
/// component `comp` is constant, sorted and deduplicated.
fn breakpoints(u: &DiscreteSBV, comp: usize, s: f64) -> Vec<f64> {
    let mut b: Vec<f64> = (0..u.n_cells())
        .map(|c| {
            let t = u.value(c)[comp] / s;
            let f = t - t.floor();
            if f == 0.0 {
                0.0
            } else {
                1.0 - f
            }
        })
        .collect();
    b.push(0.0);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// `Σ_facets |k_b − k_a|` for component `comp` at offset `rho`.
fn level_variation(u: &DiscreteSBV, comp: usize, s: f64, rho: f64) -> u64 {
    (0..u.n_facets())
        .map(|k| {
            let f = u.facet(k);
            let la = level(u.value(f.a)[comp], s, rho);
            let lb = level(u.value(f.b)[comp], s, rho);
            la.abs_diff(lb)
        })
        .sum()
}

/// Offsets, one per component, minimising `|Du^i_{ε,ρ}|`.
///
/// `ρ ↦ |Du^i_{ε,ρ}|` is piecewise constant with breakpoints at the
/// fractional parts of `u/s`, and its mean over `[0, 1)` equals `|Du^i|`.
/// Every subinterval is evaluated at its midpoint and the first minimiser
/// is returned, so `|Du^i_{ε,ρ}| ≤ |Du^i|` holds for the result.
pub fn select_rho(u: &DiscreteSBV, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    let s = quantization_step(eps, u.m);
    let mut rho = Vec::with_capacity(u.m);
    for comp in 0..u.m {
        let b = breakpoints(u, comp, s);
        let mut best = (u64::MAX, 0.0);
        for (i, &lo) in b.iter().enumerate() {
            let hi = b.get(i + 1).copied().unwrap_or(1.0);
            let mid = 0.5 * (lo + hi);
            let k = level_variation(u, comp, s, mid);
            if k < best.0 {
                best = (k, mid);
            }
        }
        rho.push(best.1);
    }
    Ok(rho)
}

/// `∫₀¹ |Du^i_{ε,ρ}| dρ` evaluated exactly over the breakpoint intervals.
pub fn mean_variation_over_rho(u: &DiscreteSBV, eps: f64, comp: usize) -> Result<f64> {
    check_eps(eps)?;
    if comp >= u.m {
        return input("component out of range");
    }
    let s = quantization_step(eps, u.m);
    let b = breakpoints(u, comp, s);
    let mut total = 0.0;
    for (i, &lo) in b.iter().enumerate() {
        let hi = b.get(i + 1).copied().unwrap_or(1.0);
        total += (hi - lo) * level_variation(u, comp, s, 0.5 * (lo + hi)) as f64;
    }
    Ok(total * s * u.facet_area())
}

/// Quantises with offsets from [`select_rho`].
pub fn quantize_selected(u: &DiscreteSBV, eps: f64) -> Result<(DiscreteSBV, Vec<f64>)> {
    let rho = select_rho(u, eps)?;
    Ok((quantize(u, eps, &rho)?, rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(vals: Vec<f64>, m: usize) -> DiscreteSBV {
        let n = vals.len() / m;
        DiscreteSBV::classify(1, [n, 1], 0.1, m, vals, 10.0).unwrap()
    }

    #[test]
    fn constant_stays_constant() {
        let u = line(vec![0.37; 8], 1);
        let (q, _) = quantize_selected(&u, 0.1).unwrap();
        assert_eq!(q.total_variation(), 0.0);
        assert!(u.sup_distance(&q).unwrap() <= 0.1);
    }

    #[test]
    fn two_cell_mean_is_the_difference() {
        for (a, b) in [(0.0, 0.37), (-1.234, 2.5), (0.05, 0.051)] {
            let u = line(vec![a, b], 1);
            let mean = mean_variation_over_rho(&u, 0.1, 0).unwrap();
            assert!((mean - (a - b).abs()).abs() < 1e-12, "{a} {b} {mean}");
        }
    }

    #[test]
    fn selected_offset_does_not_increase_variation() {
        let vals: Vec<f64> = (0..40).map(|i| ((i as f64) * 0.7).sin() * 0.3 + (i / 10) as f64 * 0.15).collect();
        let u = line(vals, 2);
        let (q, _) = quantize_selected(&u, 0.05).unwrap();
        for i in 0..2 {
            assert!(q.component_variation(i) <= u.component_variation(i) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn quantization_is_idempotent() {
        let u = line((0..10).map(|i| i as f64 * 0.123).collect(), 1);
        let q = quantize(&u, 0.2, &[0.3]).unwrap();
        let qq = quantize(&q, 0.2, &[0.3]).unwrap();
        assert_eq!(q.values, qq.values);
    }

    #[test]
    fn bad_offsets_are_rejected() {
        let u = line(vec![0.0, 1.0], 1);
        assert!(quantize(&u, 0.1, &[1.0]).is_err());
        assert!(quantize(&u, 0.0, &[0.0]).is_err());
        assert!(quantize(&u, 0.1, &[0.0, 0.0]).is_err());
    }
}
