use crate::energy_models::{MatrixDensity, RecessionDensity};
use crate::error::{input, Error, Result};
use crate::surface_density::{SurfaceParams, M_NUM};

/// A discretised pair `(α, β)` on `[−T/2, T/2]` with `N` equispaced nodes.
///
/// `alpha` is stored row-major (`N × m`).
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub t_len: f64,
    pub n: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub z: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Profile {
    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn step(&self) -> f64 {
        self.t_len / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.t_len + i as f64 * self.step()
    }

    pub fn alpha_at(&self, i: usize) -> &[f64] {
        let m = self.m();
        &self.alpha[i * m..i * m + m]
    }

    /// Builds a profile from node functions `α(x)` and `β(x)`, then imposes
    /// the boundary values exactly.
    pub fn from_fn(
        z: &[f64],
        nu: &[f64],
        t_len: f64,
        n: usize,
        alpha: impl Fn(f64) -> f64,
        beta: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n < 3 || !(t_len > 0.0) {
            return input(format!("profile needs N >= 3 and T > 0, got N={n}, T={t_len}"));
        }
        let m = z.len();
        let mut p = Profile {
            t_len,
            n,
            alpha: vec![0.0; n * m],
            beta: vec![1.0; n],
            z: z.to_vec(),
            nu: nu.to_vec(),
        };
        for i in 0..n {
            let x = p.x(i);
            let s = alpha(x);
            for a in 0..m {
                p.alpha[i * m + a] = z[a] * s;
            }
            p.beta[i] = beta(x).clamp(0.0, 1.0);
        }
        p.impose_boundary();
        Ok(p)
    }

    pub fn impose_boundary(&mut self) {
        let m = self.m();
        let n = self.n;
        for a in 0..m {
            self.alpha[a] = 0.0;
            self.alpha[(n - 1) * m + a] = self.z[a];
        }
        self.beta[0] = 1.0;
        self.beta[n - 1] = 1.0;
    }

    /// Checks the constraint set: pinned ends and `0 ≤ β ≤ 1`.
    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if self.alpha.len() != self.n * m || self.beta.len() != self.n {
            return Err(Error::Shape(format!(
                "profile with N={} has {} alpha and {} beta values",
                self.n,
                self.alpha.len(),
                self.beta.len()
            )));
        }
        if (norm(&self.nu) - 1.0).abs() > 1e-12 {
            return input("normal must have unit length");
        }
        if let Some(b) = self.beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::Invariant(format!("beta value {b} outside [0, 1]")));
        }
        if self.alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite alpha".into()));
        }
        let ends_ok = self.beta[0] == 1.0
            && self.beta[self.n - 1] == 1.0
            && self.alpha_at(0).iter().all(|v| *v == 0.0)
            && self.alpha_at(self.n - 1) == self.z.as_slice();
        if !ends_ok {
            return Err(Error::Invariant("profile boundary values not imposed".into()));
        }
        Ok(())
    }

    /// Linear interpolation onto a window of length `t_len` with `n` nodes;
    /// outside the old window `β = 1` and `α` is extended by its end values.
    pub fn resample(&self, t_len: f64, n: usize) -> Profile {
        let m = self.m();
        let mut out = Profile {
            t_len,
            n,
            alpha: vec![0.0; n * m],
            beta: vec![1.0; n],
            z: self.z.clone(),
            nu: self.nu.clone(),
        };
        let h = self.step();
        for i in 0..n {
            let x = out.x(i);
            let s = (x + 0.5 * self.t_len) / h;
            if s <= 0.0 {
                // α already 0, β already 1
            } else if s >= (self.n - 1) as f64 {
                out.alpha[i * m..i * m + m].copy_from_slice(&self.z);
            } else {
                let k = (s.floor() as usize).min(self.n - 2);
                let th = s - k as f64;
                out.beta[i] = (1.0 - th) * self.beta[k] + th * self.beta[k + 1];
                for a in 0..m {
                    out.alpha[i * m + a] = (1.0 - th) * self.alpha[k * m + a] + th * self.alpha[(k + 1) * m + a];
                }
            }
        }
        out.impose_boundary();
        out
    }

    pub fn min_beta(&self) -> f64 {
        self.beta.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Midpoint/forward-difference discretisation of
/// `∫ f_p^q(β)Ψ_∞(α′⊗ν) + (1−β)^{q′}/κ + |β′|^q`, with the coefficient
/// truncated at `M^{q−1}` when `m_trunc` is finite and at [`M_NUM`]
/// otherwise. A vanishing `Ψ_∞` term contributes zero whatever the
/// coefficient.
pub fn cell_energy(profile: &Profile, psi_inf: &RecessionDensity, params: &SurfaceParams, m_trunc: f64) -> Result<f64> {
    profile.validate()?;
    let m = profile.m();
    let nd = profile.nu.len();
    let h = profile.step();
    let kappa = params.kappa();
    let qp = params.qprime();
    let cap = if m_trunc.is_finite() {
        m_trunc.powf(params.q - 1.0).min(M_NUM)
    } else {
        M_NUM
    };
    let mut xi = vec![0.0; m * nd];
    let mut total = 0.0;
    for i in 0..profile.n - 1 {
        let bm = 0.5 * (profile.beta[i] + profile.beta[i + 1]);
        let db = (profile.beta[i + 1] - profile.beta[i]) / h;
        for a in 0..m {
            let da = (profile.alpha[(i + 1) * m + a] - profile.alpha[i * m + a]) / h;
            for j in 0..nd {
                xi[a * nd + j] = da * profile.nu[j];
            }
        }
        let psi = psi_inf.value(&xi);
        let elastic = if psi == 0.0 {
            0.0
        } else {
            let coef = params.f_p(bm)?.powf(params.q).min(cap);
            coef * psi
        };
        total += h * (elastic + (1.0 - bm).powf(qp) / kappa + db.abs().powf(params.q));
    }
    Ok(total)
}

/// `Σ (1 − β_mid)|β′| h`, a lower bound for [`cell_energy`] by Young's
/// inequality applied interval by interval.
pub fn crack_lower_bound(profile: &Profile) -> f64 {
    (0..profile.n - 1)
        .map(|i| {
            let bm = 0.5 * (profile.beta[i] + profile.beta[i + 1]);
            (1.0 - bm) * (profile.beta[i + 1] - profile.beta[i]).abs()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_models::BulkDensity;

    fn iso() -> RecessionDensity {
        BulkDensity::power(2.0).unwrap().recession()
    }

    #[test]
    fn trivial_profile_has_zero_energy() {
        let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let p = Profile::from_fn(&[0.0], &[1.0], 4.0, 101, |_| 0.0, |_| 1.0).unwrap();
        assert_eq!(cell_energy(&p, &iso(), &params, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(crack_lower_bound(&p), 0.0);
    }

    #[test]
    fn crack_competitor_converges_to_one() {
        let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let (t, n) = (40.0, 8001);
        let h = t / (n - 1) as f64;
        // β = 0 on the two central intervals, then the optimal 1 − e^{−s/2}.
        let beta = move |x: f64| 1.0 - (-(x.abs() - h).max(0.0) / 2.0).exp();
        let p = Profile::from_fn(&[5.0], &[1.0], t, n, |x| if x > 0.0 { 1.0 } else { 0.0 }, beta).unwrap();
        let e = cell_energy(&p, &iso(), &params, f64::INFINITY).unwrap();
        assert!((e - 1.0).abs() < 0.02, "{e}");
        assert!((crack_lower_bound(&p) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_infeasible_beta() {
        let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let mut p = Profile::from_fn(&[1.0], &[1.0], 4.0, 11, |x| x + 0.5, |_| 1.0).unwrap();
        p.beta[3] = 1.2;
        assert!(matches!(cell_energy(&p, &iso(), &params, f64::INFINITY), Err(Error::Invariant(_))));
    }

    #[test]
    fn resample_keeps_constraints() {
        let p = Profile::from_fn(&[2.0, -1.0], &[0.0, 1.0], 4.0, 41, |x| 0.5 + 0.25 * x, |x| (x.abs()).min(1.0)).unwrap();
        let r = p.resample(8.0, 81);
        r.validate().unwrap();
        assert!((r.beta[40] - p.beta[20]).abs() < 1e-12);
    }
}
