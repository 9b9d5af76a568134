use std::path::Path;

use super::{check_delta, check_exponent, h_delta_value, DensityKind, MatrixDensity};
use crate::error::{input, Error, Result};
use crate::surface_density::SurfaceParams;

/// Samples of a scalar function on increasing abscissae together with the
/// values of its greatest convex minorant.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeGrid1D {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub hull_ys: Vec<f64>,
}

impl EnvelopeGrid1D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let hull_ys = lower_hull(&xs, &ys)?;
        Ok(EnvelopeGrid1D { xs, ys, hull_ys })
    }

    /// Samples `f` at `n` equispaced points of `[a, b]`.
    pub fn sample(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 3 || !(b > a) {
            return input("need at least 3 points on a nondegenerate interval");
        }
        let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    /// Two-column CSV `x,value` with the sampled values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "value"])?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            w.write_record([format!("{x:.17e}"), format!("{y:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Input(format!("bad envelope row {:?}", rec)))
            };
            xs.push(parse(0)?);
            ys.push(parse(1)?);
        }
        Self::new(xs, ys)
    }
}

/// Greatest convex minorant of the piecewise-linear interpolant of
/// `(xs, ys)`, evaluated at `xs`.
pub fn convex_envelope_1d(xs: &[f64], ys: &[f64]) -> Result<EnvelopeGrid1D> {
    EnvelopeGrid1D::new(xs.to_vec(), ys.to_vec())
}

fn lower_hull(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} abscissae but {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return input("envelope needs at least 3 points");
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return input("abscissae must be strictly increasing");
    }
    if ys.iter().chain(xs).any(|v| !v.is_finite()) {
        return input("envelope data must be finite");
    }
    // Monotone chain: drop the middle point while it is on or above the
    // chord through its neighbours.
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (ys[b] - ys[a]) / (xs[b] - xs[a]);
        for i in a..=b {
            out[i] = if i == b { ys[b] } else { ys[a] + slope * (xs[i] - xs[a]) };
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HdeltaLimitReport {
    /// `(δ, sup-distance)` after including all parameters up to `δ`.
    pub history: Vec<(f64, f64)>,
    pub max_error: f64,
}

/// Distance between `sup_δ (h_δ)^{**}` and `Ψ^{**}` on the grid `xs` for a
/// scalar density.
pub fn verify_hdelta_limit<D: MatrixDensity + ?Sized>(
    density: &D,
    kind: DensityKind,
    params: &SurfaceParams,
    delta_seq: &[f64],
    xs: &[f64],
) -> Result<HdeltaLimitReport> {
    if kind != DensityKind::PowerQ {
        return Err(Error::Shape(format!("{kind} is not a scalar density")));
    }
    check_exponent(density.exponent(), params)?;
    if delta_seq.is_empty() || delta_seq.windows(2).any(|w| !(w[1] > w[0])) {
        return input("delta sequence must be nonempty and increasing");
    }
    for &d in delta_seq {
        check_delta(d)?;
    }
    let psi: Vec<f64> = xs.iter().map(|&x| density.value(&[x])).collect();
    let target = lower_hull(xs, &psi)?;
    let mut sup = vec![f64::NEG_INFINITY; xs.len()];
    let mut history = Vec::with_capacity(delta_seq.len());
    for &delta in delta_seq {
        let h: Vec<f64> = psi.iter().map(|&v| h_delta_value(v, params, delta)).collect();
        let hull = lower_hull(xs, &h)?;
        for (s, v) in sup.iter_mut().zip(&hull) {
            *s = s.max(*v);
        }
        let err = sup.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        history.push((delta, err));
    }
    let max_error = history.last().map(|h| h.1).unwrap_or(f64::NAN);
    Ok(HdeltaLimitReport { history, max_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_models::BulkDensity;

    #[test]
    fn double_well_hull() {
        let g = EnvelopeGrid1D::sample(-2.0, 2.0, 4001, |x| (x * x - 1.0).powi(2)).unwrap();
        for (x, (y, h)) in g.xs.iter().zip(g.ys.iter().zip(&g.hull_ys)) {
            if x.abs() <= 1.0 {
                assert!(h.abs() < 1e-12);
            } else {
                assert!((y - h).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convex_fixed_point_and_idempotence() {
        let g = EnvelopeGrid1D::sample(-1.0, 3.0, 101, |x| x * x).unwrap();
        assert_eq!(g.ys, g.hull_ys);
        let g2 = convex_envelope_1d(&g.xs, &g.hull_ys).unwrap();
        assert_eq!(g2.hull_ys, g.hull_ys);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(convex_envelope_1d(&[0.0, 2.0, 1.0], &[0.0; 3]).is_err());
        assert!(convex_envelope_1d(&[0.0, 1.0], &[0.0; 2]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("env.csv");
        let g = EnvelopeGrid1D::sample(-1.0, 1.0, 11, |x| x.abs() - x * x).unwrap();
        g.write_csv(&path).unwrap();
        assert_eq!(EnvelopeGrid1D::read_csv(&path).unwrap(), g);
    }

    #[test]
    fn hdelta_limit_improves() {
        let params = SurfaceParams::new(2.0, 2.0, 1.0).unwrap();
        let d = BulkDensity::power(2.0).unwrap();
        let xs: Vec<f64> = (0..401).map(|i| -3.0 + 6.0 * i as f64 / 400.0).collect();
        let rep = verify_hdelta_limit(&d, d.kind, &params, &[0.5, 0.9, 0.99, 0.999], &xs).unwrap();
        assert!(rep.history[3].1 < rep.history[0].1);
        assert!(rep.max_error < 0.05);
    }
}
