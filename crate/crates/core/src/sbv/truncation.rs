use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiscreteSBV;
use crate::error::{input, Result};

/// Radial truncations `𝒯_k` with radii `a_k = 3^k`.
///
/// `𝒯_k(z) = ρ_k(|z|) z/|z|` where `ρ_k` is the identity up to `a = a_k`,
/// vanishes from `b = 3a` on, and in between has a piecewise-linear
/// derivative: `1 → −1` on `[a, 1.5a]`, `−1` on `[1.5a, 2a]`,
/// `−1 → 0` on `[2a, 3a]`. Then `|ρ′| ≤ 1` and `ρ(r) ≤ r`, so `𝒯_k` is
/// 1-Lipschitz, and `ρ` is C¹.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TruncationLadder;

impl TruncationLadder {
    pub fn radius(&self, k: u32) -> f64 {
        3f64.powi(k as i32)
    }

    /// The radial profile `ρ_k(r)` for `r ≥ 0`.
    pub fn profile(&self, k: u32, r: f64) -> f64 {
        let a = self.radius(k);
        if r <= a {
            return r;
        }
        let x = r - a;
        if x <= 0.5 * a {
            // ρ′ = 1 − 4x/a
            a + x - 2.0 * x * x / a
        } else if x <= a {
            // ρ(1.5a) = a, then slope −1
            a - (x - 0.5 * a)
        } else if x <= 2.0 * a {
            // ρ(2a) = a/2, slope −1 + (x−a)/a
            let y = x - a;
            0.5 * a - y + 0.5 * y * y / a
        } else {
            0.0
        }
    }

    pub fn apply(&self, k: u32, z: &[f64], out: &mut [f64]) {
        let r = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = if r > 0.0 { self.profile(k, r) / r } else { 1.0 };
        for (o, x) in out.iter_mut().zip(z) {
            *o = s * x;
        }
    }

    /// Largest `|𝒯_k(z₁) − 𝒯_k(z₂)| / |z₁ − z₂|` over `pairs` random pairs
    /// in the ball of radius `1.2 a_{k+1}`.
    pub fn sampled_lipschitz(&self, k: u32, m: usize, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 1.2 * self.radius(k + 1);
        let mut worst: f64 = 0.0;
        let (mut z1, mut z2, mut t1, mut t2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..pairs {
            for a in 0..m {
                z1[a] = rng.gen_range(-r..r);
                // Half the pairs are close, to probe the local slope.
                let spread = if i % 2 == 0 { r } else { 1e-3 * r };
                z2[a] = z1[a] + rng.gen_range(-spread..spread);
            }
            self.apply(k, &z1, &mut t1);
            self.apply(k, &z2, &mut t2);
            let num = t1.iter().zip(&t2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let den = z1.iter().zip(&z2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if den > 0.0 {
                worst = worst.max(num / den);
            }
        }
        worst
    }
}

/// Cellwise `𝒯_k(u)`; facet tags are kept.
pub fn truncate(u: &DiscreteSBV, k: u32, ladder: &TruncationLadder) -> Result<DiscreteSBV> {
    if k < 1 {
        return input("truncation index starts at 1");
    }
    let mut values = vec![0.0; u.values.len()];
    for c in 0..u.n_cells() {
        ladder.apply(k, u.value(c), &mut values[c * u.m..(c + 1) * u.m]);
    }
    Ok(u.with_values(values))
}

/// Number of cells with `|u| > r`.
pub fn cells_above(u: &DiscreteSBV, r: f64) -> usize {
    (0..u.n_cells())
        .filter(|&c| u.value(c).iter().map(|x| x * x).sum::<f64>().sqrt() > r)
        .count()
}

/// Number of cells with `|u − w| > r`.
pub fn cells_differing(u: &DiscreteSBV, w: &DiscreteSBV, r: f64) -> Result<usize> {
    u.check_same_grid(w)?;
    Ok((0..u.n_cells())
        .filter(|&c| {
            u.value(c)
                .iter()
                .zip(w.value(c))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                > r
        })
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_continuous_with_matching_slopes() {
        let t = TruncationLadder;
        let a = t.radius(1);
        assert_eq!(a, 3.0);
        for knot in [a, 1.5 * a, 2.0 * a, 3.0 * a] {
            let (l, r) = (t.profile(1, knot - 1e-9), t.profile(1, knot + 1e-9));
            assert!((l - r).abs() < 1e-8, "jump at {knot}");
        }
        let slope = |r: f64| (t.profile(1, r + 1e-6) - t.profile(1, r - 1e-6)) / 2e-6;
        assert!((slope(a) - 1.0).abs() < 1e-5);
        assert!((slope(3.0 * a) - 0.0).abs() < 1e-5);
        assert!((slope(1.75 * a) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_inside_zero_outside() {
        let t = TruncationLadder;
        let mut out = [0.0; 2];
        t.apply(2, &[3.0, -4.0], &mut out);
        assert_eq!(out, [3.0, -4.0]);
        t.apply(2, &[27.0, 1.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn ladder_gap_and_lipschitz() {
        let t = TruncationLadder;
        for k in 1..5 {
            assert!(2.0 * t.radius(k) < t.radius(k + 1));
            assert!(t.sampled_lipschitz(k, 2, 10_000, k as u64) <= 1.0 + 1e-9);
        }
    }
}
