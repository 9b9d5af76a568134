//! Bulk energy densities and the constructions built on them.
//!
//! Matrices are passed either as [`nalgebra::DMatrix`] (checked entry points)
//! or as row-major slices (the fast path used inside the assemblers). For the
//! 2×2 kinds the slice is `[a, b, c, d]` for `[[a, b], [c, d]]`.

mod envelope;
mod projection;

pub use envelope::{convex_envelope_1d, verify_hdelta_limit, EnvelopeGrid1D, HdeltaLimitReport};
pub use projection::{check_projection_property, random_projection_samples, ProjectionReport};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::surface_density::SurfaceParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DensityKind {
    /// `|ξ|^q`.
    PowerQ,
    /// `(|ξ|² − 2)_+² + α(det ξ − 1)²`, 2×2 only.
    CompressiblePlus,
    /// `(|ξ|² − 2 det ξ)² + α(det ξ − 1)²`, 2×2 only.
    CompressibleHat,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::PowerQ => "power_q",
            DensityKind::CompressiblePlus => "compressible_plus",
            DensityKind::CompressibleHat => "compressible_hat",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_q" | "power" => Ok(DensityKind::PowerQ),
            "compressible_plus" | "plus" => Ok(DensityKind::CompressiblePlus),
            "compressible_hat" | "hat" => Ok(DensityKind::CompressibleHat),
            other => input(format!("unknown density kind `{other}`")),
        }
    }
}

/// Pointwise operations shared by [`BulkDensity`] and [`RecessionDensity`].
///
/// `xi` is row-major. `hessian_into` writes a `k×k` row-major matrix where
/// `k = xi.len()`.
pub trait MatrixDensity: Sync {
    fn exponent(&self) -> f64;
    fn value(&self, xi: &[f64]) -> f64;
    fn gradient_into(&self, xi: &[f64], out: &mut [f64]);
    fn hessian_into(&self, xi: &[f64], out: &mut [f64]);
}

/// Structured description used by configuration files.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySpec {
    pub kind: DensityKind,
    /// Only read for `power_q`; the 2×2 kinds always have `q = 4`.
    pub q: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BulkDensity {
    pub kind: DensityKind,
    pub q: f64,
    /// Growth constant in `|ξ|^q / c − c ≤ Ψ(ξ) ≤ c(|ξ|^q + 1)`.
    pub c: f64,
    pub alpha: f64,
}

impl BulkDensity {
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return input(format!("power density needs q > 1, got {q}"));
        }
        Ok(BulkDensity {
            kind: DensityKind::PowerQ,
            q,
            c: 1.0,
            alpha: 0.0,
        })
    }

    pub fn compressible_plus(alpha: f64) -> Result<Self> {
        Self::compressible(DensityKind::CompressiblePlus, alpha)
    }

    pub fn compressible_hat(alpha: f64) -> Result<Self> {
        Self::compressible(DensityKind::CompressibleHat, alpha)
    }

    fn compressible(kind: DensityKind, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return input(format!("alpha must be finite and nonnegative, got {alpha}"));
        }
        let mut d = BulkDensity {
            kind,
            q: 4.0,
            c: 1.0,
            alpha,
        };
        d.c = estimate_growth_constant(&d);
        Ok(d)
    }

    pub fn from_spec(spec: &DensitySpec) -> Result<Self> {
        match spec.kind {
            DensityKind::PowerQ => Self::power(spec.q),
            DensityKind::CompressiblePlus => Self::compressible_plus(spec.alpha),
            DensityKind::CompressibleHat => Self::compressible_hat(spec.alpha),
        }
    }

    /// Checks the shape of `xi` against the kind and rejects non-finite
    /// entries.
    fn check(&self, xi: &DMatrix<f64>) -> Result<Vec<f64>> {
        if self.kind != DensityKind::PowerQ && (xi.nrows() != 2 || xi.ncols() != 2) {
            return Err(Error::Shape(format!(
                "{} needs a 2x2 matrix, got {}x{}",
                self.kind,
                xi.nrows(),
                xi.ncols()
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return input("matrix has non-finite entries");
        }
        Ok(row_major(xi))
    }

    pub fn eval(&self, xi: &DMatrix<f64>) -> Result<f64> {
        let x = self.check(xi)?;
        Ok(self.value(&x))
    }

    pub fn grad(&self, xi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let x = self.check(xi)?;
        let mut g = vec![0.0; x.len()];
        self.gradient_into(&x, &mut g);
        Ok(DMatrix::from_row_slice(xi.nrows(), xi.ncols(), &g))
    }

    pub fn recession(&self) -> RecessionDensity {
        RecessionDensity {
            parent: self.clone(),
            closed_form: true,
        }
    }

    /// `max |Ψ(tξ)/t^q − Ψ_∞(ξ)|` over `samples` random unit matrices of the
    /// given shape.
    pub fn recession_defect(&self, t: f64, rows: usize, cols: usize, samples: usize, seed: u64) -> f64 {
        let rec = self.recession();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let xi = random_unit(&mut rng, rows * cols);
            let scaled: Vec<f64> = xi.iter().map(|v| v * t).collect();
            let d = self.value(&scaled) / t.powf(self.q) - rec.value(&xi);
            worst = worst.max(d.abs());
        }
        worst
    }
}

impl MatrixDensity for BulkDensity {
    fn exponent(&self) -> f64 {
        self.q
    }

    fn value(&self, xi: &[f64]) -> f64 {
        match self.kind {
            DensityKind::PowerQ => power_value(xi, self.q),
            DensityKind::CompressiblePlus => {
                let s = (norm2(xi) - 2.0).max(0.0);
                let dm = det(xi) - 1.0;
                s * s + self.alpha * dm * dm
            }
            DensityKind::CompressibleHat => {
                let s = norm2(xi) - 2.0 * det(xi);
                let dm = det(xi) - 1.0;
                s * s + self.alpha * dm * dm
            }
        }
    }

    fn gradient_into(&self, xi: &[f64], out: &mut [f64]) {
        match self.kind {
            DensityKind::PowerQ => power_gradient(xi, self.q, out),
            DensityKind::CompressiblePlus => {
                let s = (norm2(xi) - 2.0).max(0.0);
                let dm = det(xi) - 1.0;
                let cf = cof(xi);
                for i in 0..4 {
                    out[i] = 4.0 * s * xi[i] + 2.0 * self.alpha * dm * cf[i];
                }
            }
            DensityKind::CompressibleHat => {
                let s = norm2(xi) - 2.0 * det(xi);
                let dm = det(xi) - 1.0;
                let cf = cof(xi);
                for i in 0..4 {
                    out[i] = 2.0 * s * (2.0 * xi[i] - 2.0 * cf[i]) + 2.0 * self.alpha * dm * cf[i];
                }
            }
        }
    }

    fn hessian_into(&self, xi: &[f64], out: &mut [f64]) {
        match self.kind {
            DensityKind::PowerQ => power_hessian(xi, self.q, out),
            DensityKind::CompressiblePlus => {
                let n2 = norm2(xi);
                let s = (n2 - 2.0).max(0.0);
                let active = if n2 > 2.0 { 1.0 } else { 0.0 };
                let dm = det(xi) - 1.0;
                plus_like_hessian(xi, 8.0 * active, 4.0 * s, self.alpha, dm, out);
            }
            DensityKind::CompressibleHat => {
                let s = norm2(xi) - 2.0 * det(xi);
                hat_like_hessian(xi, s, self.alpha, det(xi) - 1.0, out);
            }
        }
    }
}

/// The `q`-homogeneous recession function `Ψ_∞(ξ) = lim Ψ(tξ)/t^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecessionDensity {
    pub parent: BulkDensity,
    pub closed_form: bool,
}

impl RecessionDensity {
    pub fn eval(&self, xi: &DMatrix<f64>) -> Result<f64> {
        let x = self.parent.check(xi)?;
        Ok(self.value(&x))
    }

    pub fn q(&self) -> f64 {
        self.parent.q
    }
}

impl MatrixDensity for RecessionDensity {
    fn exponent(&self) -> f64 {
        self.parent.q
    }

    fn value(&self, xi: &[f64]) -> f64 {
        let a = self.parent.alpha;
        match self.parent.kind {
            DensityKind::PowerQ => power_value(xi, self.parent.q),
            DensityKind::CompressiblePlus => {
                let n2 = norm2(xi);
                let d = det(xi);
                n2 * n2 + a * d * d
            }
            DensityKind::CompressibleHat => {
                let d = det(xi);
                let s = norm2(xi) - 2.0 * d;
                s * s + a * d * d
            }
        }
    }

    fn gradient_into(&self, xi: &[f64], out: &mut [f64]) {
        let a = self.parent.alpha;
        match self.parent.kind {
            DensityKind::PowerQ => power_gradient(xi, self.parent.q, out),
            DensityKind::CompressiblePlus => {
                let n2 = norm2(xi);
                let d = det(xi);
                let cf = cof(xi);
                for i in 0..4 {
                    out[i] = 4.0 * n2 * xi[i] + 2.0 * a * d * cf[i];
                }
            }
            DensityKind::CompressibleHat => {
                let d = det(xi);
                let s = norm2(xi) - 2.0 * d;
                let cf = cof(xi);
                for i in 0..4 {
                    out[i] = 2.0 * s * (2.0 * xi[i] - 2.0 * cf[i]) + 2.0 * a * d * cf[i];
                }
            }
        }
    }

    fn hessian_into(&self, xi: &[f64], out: &mut [f64]) {
        let a = self.parent.alpha;
        match self.parent.kind {
            DensityKind::PowerQ => power_hessian(xi, self.parent.q, out),
            DensityKind::CompressiblePlus => {
                plus_like_hessian(xi, 8.0, 4.0 * norm2(xi), a, det(xi), out);
            }
            DensityKind::CompressibleHat => {
                let d = det(xi);
                hat_like_hessian(xi, norm2(xi) - 2.0 * d, a, d, out);
            }
        }
    }
}

/// `h_δ(ξ) = min(Ψ(ξ), ℓ(1−δ^{q′})^{1−p} Ψ(ξ)^{1/q})`, the linear-growth
/// approximation of `Ψ`.
pub fn h_delta<D: MatrixDensity + ?Sized>(density: &D, params: &SurfaceParams, delta: f64, xi: &[f64]) -> Result<f64> {
    check_delta(delta)?;
    check_exponent(density.exponent(), params)?;
    Ok(h_delta_value(density.value(xi), params, delta))
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        input(format!("delta must lie in (0, 1), got {delta}"))
    }
}

pub(crate) fn check_exponent(q: f64, params: &SurfaceParams) -> Result<()> {
    if (q - params.q).abs() > 1e-12 {
        return input(format!("density exponent {q} differs from surface exponent {}", params.q));
    }
    Ok(())
}

/// `h_δ` as a function of the already evaluated `Ψ(ξ)`.
pub(crate) fn h_delta_value(psi: f64, params: &SurfaceParams, delta: f64) -> f64 {
    let slope = params.ell * (1.0 - delta.powf(params.qprime())).powf(1.0 - params.p);
    psi.min(slope * psi.powf(1.0 / params.q))
}

pub(crate) fn row_major(xi: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(xi.len());
    for i in 0..xi.nrows() {
        for j in 0..xi.ncols() {
            out.push(xi[(i, j)]);
        }
    }
    out
}

fn random_unit(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm2(&v).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Sampled estimate of the growth constant for the 2×2 kinds.
///
/// For each sample the smallest `c` compatible with both growth inequalities
/// for `Ψ`, and with `|ξ|^q / c ≤ Ψ_∞(ξ) ≤ c|ξ|^q`, is computed; the maximum
/// over samples with `|ξ| ≤ 10` is doubled.
fn estimate_growth_constant(d: &BulkDensity) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6f77);
    let rec = d.recession();
    let mut c: f64 = 1.0;
    for i in 0..20_000 {
        let dir = random_unit(&mut rng, 4);
        let r = if i % 2 == 0 { rng.gen_range(0.0..10.0) } else { 10.0 * rng.gen::<f64>().sqrt() };
        let xi: Vec<f64> = dir.iter().map(|v| v * r).collect();
        let psi = d.value(&xi);
        let nq = r.powf(d.q);
        let lower = (-psi + (psi * psi + 4.0 * nq).sqrt()) / 2.0;
        let upper = psi / (nq + 1.0);
        let ri = rec.value(&dir);
        c = c.max(lower).max(upper).max(ri).max(1.0 / ri.max(1e-300));
    }
    2.0 * c
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn det(x: &[f64]) -> f64 {
    x[0] * x[3] - x[1] * x[2]
}

/// Derivative of `det` with respect to the row-major entries.
#[inline]
fn cof(x: &[f64]) -> [f64; 4] {
    [x[3], -x[2], -x[1], x[0]]
}

/// Constant second derivative of `det`.
const DET_HESS: [[f64; 4]; 4] = [
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
];

pub(crate) fn power_value(xi: &[f64], q: f64) -> f64 {
    let n2 = norm2(xi);
    if q == 2.0 {
        n2
    } else {
        n2.powf(q / 2.0)
    }
}

pub(crate) fn power_gradient(xi: &[f64], q: f64, out: &mut [f64]) {
    let n2 = norm2(xi);
    let s = if n2 == 0.0 {
        0.0
    } else if q == 2.0 {
        2.0
    } else {
        q * n2.powf(q / 2.0 - 1.0)
    };
    for (o, x) in out.iter_mut().zip(xi) {
        *o = s * x;
    }
}

/// Hessian of `|ξ|^q`. For `q < 2` the singularity at the origin is cut off
/// at `|ξ| = 1e-6`.
pub(crate) fn power_hessian(xi: &[f64], q: f64, out: &mut [f64]) {
    let k = xi.len();
    let n2 = norm2(xi);
    out[..k * k].iter_mut().for_each(|v| *v = 0.0);
    if q == 2.0 {
        for i in 0..k {
            out[i * k + i] = 2.0;
        }
        return;
    }
    let n = n2.sqrt().max(if q < 2.0 { 1e-6 } else { 0.0 });
    if n == 0.0 {
        return;
    }
    let a = q * n.powf(q - 2.0);
    let b = if n2 > 0.0 { a * (q - 2.0) / n2 } else { 0.0 };
    for i in 0..k {
        for j in 0..k {
            out[i * k + j] = b * xi[i] * xi[j];
        }
        out[i * k + i] += a;
    }
}

/// Hessian of `A(|ξ|²) + α D(det ξ)` style densities with
/// `w_outer·ξ⊗ξ + w_id·I + 2α cof⊗cof + 2α·dm·∂²det`.
fn plus_like_hessian(xi: &[f64], w_outer: f64, w_id: f64, alpha: f64, dm: f64, out: &mut [f64]) {
    let cf = cof(xi);
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = w_outer * xi[i] * xi[j] + 2.0 * alpha * (cf[i] * cf[j] + dm * DET_HESS[i][j]);
        }
        out[i * 4 + i] += w_id;
    }
}

fn hat_like_hessian(xi: &[f64], s: f64, alpha: f64, dm: f64, out: &mut [f64]) {
    let cf = cof(xi);
    let ds: Vec<f64> = (0..4).map(|i| 2.0 * xi[i] - 2.0 * cf[i]).collect();
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 2.0 } else { 0.0 };
            out[i * 4 + j] = 2.0 * ds[i] * ds[j]
                + 2.0 * s * (id - 2.0 * DET_HESS[i][j])
                + 2.0 * alpha * (cf[i] * cf[j] + dm * DET_HESS[i][j]);
        }
    }
}
