use crate::energy_models::{power_gradient, power_hessian, power_value, MatrixDensity};
use crate::mesh::{Integrand, Layout};
use crate::surface_density::{Degradation, SurfaceParams};

/// Fidelity data `|ū − w̄_e|^r`, with `w̄` stored per element.
#[derive(Clone, Debug)]
pub(crate) struct Fidelity {
    pub wbar: Vec<f64>,
    pub r: f64,
}

/// Element integrand
/// `(k(c) + η) Ψ(G Rᵀ) + (1−c)^{q′}/(κε) + ε^{q−1}|∇v|^q [+ |ū − w̄|^r]`
/// with `k(c) = min(cap, ε^{q−1} f_p(c)^q)`.
///
/// `rot` (`n×d`, row-major) maps grid directions to the density's input
/// columns: it is the identity for plain grids, `ν` for the 1D cell and
/// `[ν⊥, ν]` for the rotated square.
pub(crate) struct PhaseFieldIntegrand {
    pub density: Box<dyn MatrixDensity + Send>,
    pub layout: Layout,
    pub n: usize,
    pub rot: Vec<f64>,
    pub deg: Degradation,
    pub diss: f64,
    pub qprime: f64,
    pub grad_coef: f64,
    pub q: f64,
    pub eta: f64,
    pub fidelity: Option<Fidelity>,
}

impl PhaseFieldIntegrand {
    pub fn new(
        density: Box<dyn MatrixDensity + Send>,
        layout: Layout,
        rot: Vec<f64>,
        params: &SurfaceParams,
        eps: f64,
        cap: f64,
    ) -> Self {
        let n = rot.len() / layout.d;
        let q = params.q;
        let scale = eps.powf(q - 1.0);
        PhaseFieldIntegrand {
            density,
            layout,
            n,
            rot,
            deg: Degradation::new(params, scale, cap),
            diss: 1.0 / (params.kappa() * eps),
            qprime: params.qprime(),
            grad_coef: scale,
            q,
            eta: 0.0,
            fidelity: None,
        }
    }

    /// `ξ = G Rᵀ`.
    pub fn xi(&self, g: &[f64], out: &mut [f64]) {
        let Layout { m, d } = self.layout;
        let n = self.n;
        for a in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..d {
                    s += g[a * d + k] * self.rot[j * d + k];
                }
                out[a * n + j] = s;
            }
        }
    }
}

impl Integrand for PhaseFieldIntegrand {
    fn eval(&self, elem: usize, r: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64 {
        let lay = self.layout;
        let Layout { m, d } = lay;
        let n = self.n;
        let mn = m * n;
        let nr = lay.nr();
        let mut xi = [0.0; 16];
        self.xi(&r[..m * d], &mut xi[..mn]);
        let xi = &xi[..mn];
        let psi = self.density.value(xi);
        let c = r[lay.c()];
        let (k, k1, k2) = self.deg.eval(c);
        let w = (1.0 - c).max(0.0);
        let gv = &r[lay.gv()..lay.gv() + d];
        let elastic = if psi == 0.0 { 0.0 } else { (k + self.eta) * psi };
        let mut val = elastic + self.diss * w.powf(self.qprime) + self.grad_coef * power_value(gv, self.q);
        let fid = self.fidelity.as_ref().map(|f| {
            let wb = &f.wbar[elem * m..elem * m + m];
            let mut diff = [0.0; 4];
            for a in 0..m {
                diff[a] = r[lay.ubar() + a] - wb[a];
            }
            (diff, f.r)
        });
        if let Some((diff, rr)) = &fid {
            val += power_value(&diff[..m], *rr);
        }

        let need_grad = grad.is_some() || hess.is_some();
        if !need_grad {
            return val;
        }
        let mut gxi = [0.0; 16];
        self.density.gradient_into(xi, &mut gxi[..mn]);
        // dΨ/dG = gξ R
        let mut dpsi_dg = [0.0; 8];
        for a in 0..m {
            for kk in 0..d {
                let mut s = 0.0;
                for j in 0..n {
                    s += gxi[a * n + j] * self.rot[j * d + kk];
                }
                dpsi_dg[a * d + kk] = s;
            }
        }
        let qp = self.qprime;
        let d_diss = -self.diss * qp * w.powf(qp - 1.0);
        if let Some(g) = grad {
            g[..nr].iter_mut().for_each(|v| *v = 0.0);
            for i in 0..m * d {
                g[i] = (k + self.eta) * dpsi_dg[i];
            }
            let mut gg = [0.0; 2];
            power_gradient(gv, self.q, &mut gg[..d]);
            for kk in 0..d {
                g[lay.gv() + kk] = self.grad_coef * gg[kk];
            }
            g[lay.c()] = k1 * psi + d_diss;
            if let Some((diff, rr)) = &fid {
                let mut gd = [0.0; 4];
                power_gradient(&diff[..m], *rr, &mut gd[..m]);
                g[lay.ubar()..lay.ubar() + m].copy_from_slice(&gd[..m]);
            }
        }
        if let Some(h) = hess {
            h[..nr * nr].iter_mut().for_each(|v| *v = 0.0);
            let mut hxi = [0.0; 256];
            self.density.hessian_into(xi, &mut hxi[..mn * mn]);
            let kc = k + self.eta;
            for a in 0..m {
                for kk in 0..d {
                    let row = a * d + kk;
                    for b in 0..m {
                        for l in 0..d {
                            let col = b * d + l;
                            let mut s = 0.0;
                            for j in 0..n {
                                for j2 in 0..n {
                                    s += hxi[(a * n + j) * mn + b * n + j2] * self.rot[j * d + kk] * self.rot[j2 * d + l];
                                }
                            }
                            h[row * nr + col] = kc * s;
                        }
                    }
                    h[row * nr + lay.c()] = k1 * dpsi_dg[row];
                    h[lay.c() * nr + row] = k1 * dpsi_dg[row];
                }
            }
            let ws = if qp < 2.0 { w.max(1e-8) } else { w };
            h[lay.c() * nr + lay.c()] = k2 * psi + self.diss * qp * (qp - 1.0) * ws.powf(qp - 2.0);
            let mut hg = [0.0; 4];
            power_hessian(gv, self.q, &mut hg[..d * d]);
            for i in 0..d {
                for j in 0..d {
                    h[(lay.gv() + i) * nr + lay.gv() + j] = self.grad_coef * hg[i * d + j];
                }
            }
            if let Some((diff, rr)) = &fid {
                let mut hd = [0.0; 16];
                power_hessian(&diff[..m], *rr, &mut hd[..m * m]);
                for i in 0..m {
                    for j in 0..m {
                        h[(lay.ubar() + i) * nr + lay.ubar() + j] = hd[i * m + j];
                    }
                }
            }
        }
        val
    }
}

/// Integrand of the q-th power geodesic problem
/// `ℓ^q c^q (1−c)^{q(1−p)} |α′|^q + (1−c)^q |β′|^q` (scalar `α`, `d = 1`).
pub(crate) struct GeodesicIntegrand {
    pub a: Degradation,
    pub q: f64,
}

impl GeodesicIntegrand {
    pub fn new(params: &SurfaceParams, cap: f64) -> Self {
        let shifted = SurfaceParams {
            p: params.p - 1.0,
            ..*params
        };
        GeodesicIntegrand {
            a: Degradation::new(&shifted, 1.0, cap),
            q: params.q,
        }
    }

    /// `(A|α′|^q + B|β′|^q)^{1/q}`, the length element.
    pub fn length(&self, r: &[f64]) -> f64 {
        let (a, _, _) = self.a.eval(r[2]);
        let b = (1.0 - r[2]).max(0.0).powf(self.q);
        let ga = r[0].abs().powf(self.q);
        let s = if ga == 0.0 { 0.0 } else { a * ga } + b * r[1].abs().powf(self.q);
        s.powf(1.0 / self.q)
    }
}

impl Integrand for GeodesicIntegrand {
    fn eval(&self, _elem: usize, r: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64 {
        // r = [α′, β′, c, ū]
        let q = self.q;
        let (a, a1, a2) = self.a.eval(r[2]);
        let w = (1.0 - r[2]).max(0.0);
        let b = w.powf(q);
        let b1 = -q * w.powf(q - 1.0);
        let ws = if q < 2.0 { w.max(1e-8) } else { w };
        let b2 = q * (q - 1.0) * ws.powf(q - 2.0);
        let pa = power_value(&r[0..1], q);
        let pb = power_value(&r[1..2], q);
        let val = if pa == 0.0 { 0.0 } else { a * pa } + b * pb;
        if grad.is_none() && hess.is_none() {
            return val;
        }
        let mut ga = [0.0];
        let mut gb = [0.0];
        power_gradient(&r[0..1], q, &mut ga);
        power_gradient(&r[1..2], q, &mut gb);
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[0] = a * ga[0];
            g[1] = b * gb[0];
            g[2] = a1 * pa + b1 * pb;
        }
        if let Some(h) = hess {
            h.iter_mut().for_each(|v| *v = 0.0);
            let mut ha = [0.0];
            let mut hb = [0.0];
            power_hessian(&r[0..1], q, &mut ha);
            power_hessian(&r[1..2], q, &mut hb);
            let nr = 4;
            h[0] = a * ha[0];
            h[nr + 1] = b * hb[0];
            h[2 * nr + 2] = a2 * pa + b2 * pb;
            h[2] = a1 * ga[0];
            h[2 * nr] = a1 * ga[0];
            h[nr + 2] = b1 * gb[0];
            h[2 * nr + 1] = b1 * gb[0];
        }
        val
    }
}
