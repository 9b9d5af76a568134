use crate::error::{input, Result};

/// Exponents and scale of the degradation function `f_p(t) = ℓt/(1−t)^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceParams {
    pub p: f64,
    pub q: f64,
    pub ell: f64,
}

impl SurfaceParams {
    pub fn new(p: f64, q: f64, ell: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return input(format!("p must be finite and > 1, got {p}"));
        }
        if !(q > 1.0 && q.is_finite()) {
            return input(format!("q must be finite and > 1, got {q}"));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return input(format!("ell must be finite and > 0, got {ell}"));
        }
        Ok(SurfaceParams { p, q, ell })
    }

    /// Conjugate exponent `q/(q−1)`.
    pub fn qprime(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// Dissipation normalisation `q′ q^{q′/q}`.
    pub fn kappa(&self) -> f64 {
        let qp = self.qprime();
        qp * self.q.powf(qp / self.q)
    }

    /// Exponent `2/(p+1)` of the small-jump scaling law.
    pub fn small_jump_exponent(&self) -> f64 {
        2.0 / (self.p + 1.0)
    }

    /// `f_p(t)`; returns `+∞` at `t = 1`.
    pub fn f_p(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return input(format!("f_p needs t in [0, 1], got {t}"));
        }
        if t == 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.ell * t / (1.0 - t).powf(self.p))
    }

    /// `f_{ε,p,q}(t) = min(1, ε^{1−1/q} f_p(t))`, equal to 1 at `t = 1`.
    pub fn f_eps(&self, t: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return input(format!("eps must be positive, got {eps}"));
        }
        let f = self.f_p(t)?;
        Ok((eps.powf(1.0 - 1.0 / self.q) * f).min(1.0))
    }
}

/// Capped coefficient `k(c) = min(cap, s·f_p(c)^q)` with its first two
/// derivatives. The derivatives vanish where the cap is active.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Degradation {
    pub p: f64,
    pub q: f64,
    pub ell: f64,
    pub scale: f64,
    pub cap: f64,
}

impl Degradation {
    pub fn new(params: &SurfaceParams, scale: f64, cap: f64) -> Self {
        Degradation {
            p: params.p,
            q: params.q,
            ell: params.ell,
            scale,
            cap,
        }
    }

    pub fn eval(&self, c: f64) -> (f64, f64, f64) {
        if c >= 1.0 {
            return (self.cap, 0.0, 0.0);
        }
        let c = c.max(0.0);
        let (p, q) = (self.p, self.q);
        let w = 1.0 - c;
        let a = self.scale * self.ell.powf(q);
        let pq = p * q;
        let wm = w.powf(-pq);
        let k = a * c.powf(q) * wm;
        if !(k < self.cap) {
            return (self.cap, 0.0, 0.0);
        }
        let d1 = a * (q * c.powf(q - 1.0) * wm + pq * c.powf(q) * wm / w);
        let cs = if q < 2.0 { c.max(1e-8) } else { c };
        let d2 = a
            * (q * (q - 1.0) * cs.powf(q - 2.0) * wm
                + 2.0 * pq * q * c.powf(q - 1.0) * wm / w
                + pq * (pq + 1.0) * c.powf(q) * wm / (w * w));
        (k, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(p.qprime(), 2.0);
        assert!((p.kappa() - 4.0).abs() < 1e-14);
        assert!(SurfaceParams::new(1.0, 2.0, 1.0).is_err());
        assert!(SurfaceParams::new(2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn degradation_values() {
        let p = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(p.f_p(0.0).unwrap(), 0.0);
        assert_eq!(p.f_p(0.5).unwrap(), 2.0);
        assert_eq!(p.f_p(1.0).unwrap(), f64::INFINITY);
        assert!(p.f_p(1.5).is_err() && p.f_p(-0.1).is_err());
        assert_eq!(p.f_eps(1.0, 0.3).unwrap(), 1.0);
        assert!((p.f_eps(0.5, 0.01).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(p.f_eps(0.0, 0.01).unwrap(), 0.0);
        let mut last = 0.0;
        for i in 0..1000 {
            let v = p.f_p(i as f64 / 1000.0).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn coefficient_derivatives() {
        for (pp, q) in [(2.0, 2.0), (1.5, 3.0), (3.0, 1.5)] {
            let params = SurfaceParams::new(pp, q, 1.3).unwrap();
            let d = Degradation::new(&params, 0.7, 1e12);
            for c in [0.1, 0.4, 0.8] {
                let (k, k1, k2) = d.eval(c);
                let h = 1e-6;
                let (kp, k1p, _) = d.eval(c + h);
                let (km, k1m, _) = d.eval(c - h);
                assert!(((kp - km) / (2.0 * h) - k1).abs() < 1e-6 * (1.0 + k1.abs()));
                assert!(((k1p - k1m) / (2.0 * h) - k2).abs() < 1e-5 * (1.0 + k2.abs()));
                let exact = 0.7 * params.f_p(c).unwrap().powf(q);
                assert!((k - exact).abs() < 1e-12 * (1.0 + exact));
            }
            assert_eq!(d.eval(1.0).0, 1e12);
        }
    }
}
