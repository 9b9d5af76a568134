use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{row_major, MatrixDensity, RecessionDensity};
use crate::error::{input, Error, Result};

const VIOLATION_TOL: f64 = -1e-9;

#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub holds: bool,
    /// Minimum of `Ψ_∞(ξ) − Ψ_∞(ξ ν⊗ν)` over the samples.
    pub worst_violation: f64,
    /// The sample attaining `worst_violation` when it is below `-1e-9`.
    pub witness: Option<(DMatrix<f64>, DVector<f64>)>,
}

/// Evaluates `Ψ_∞(ξ) ≥ Ψ_∞(ξ ν⊗ν)` on every sample.
pub fn check_projection_property(
    psi_inf: &RecessionDensity,
    samples: &[(DMatrix<f64>, DVector<f64>)],
) -> Result<ProjectionReport> {
    let mut worst = f64::INFINITY;
    let mut worst_idx = None;
    for (k, (xi, nu)) in samples.iter().enumerate() {
        if (nu.norm() - 1.0).abs() > 1e-12 {
            return input(format!("sample {k}: normal has length {}", nu.norm()));
        }
        if xi.ncols() != nu.len() {
            return Err(Error::Shape(format!(
                "sample {k}: {}x{} matrix with a normal in R^{}",
                xi.nrows(),
                xi.ncols(),
                nu.len()
            )));
        }
        let projected = xi * nu * nu.transpose();
        let full = psi_inf.eval(xi)?;
        let proj = psi_inf.value(&row_major(&projected));
        let gap = full - proj;
        if gap < worst {
            worst = gap;
            worst_idx = Some(k);
        }
    }
    let holds = !(worst < VIOLATION_TOL);
    let witness = if holds { None } else { worst_idx.map(|k| samples[k].clone()) };
    Ok(ProjectionReport {
        holds,
        worst_violation: if samples.is_empty() { 0.0 } else { worst },
        witness,
    })
}

/// Random `(ξ, ν)` pairs with entries of `ξ` uniform in `[-2, 2]` and `ν`
/// uniform on the sphere.
pub fn random_projection_samples(rows: usize, cols: usize, count: usize, seed: u64) -> Vec<(DMatrix<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let xi = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-2.0..2.0));
            let nu = loop {
                let v = DVector::from_fn(cols, |_, _| rng.gen_range(-1.0..1.0));
                let n = v.norm();
                if n > 1e-3 && n <= 1.0 {
                    let u: DVector<f64> = v / n;
                    break u;
                }
            };
            (xi, nu)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_models::BulkDensity;

    #[test]
    fn plus_obeys_hat_does_not() {
        let mut samples = random_projection_samples(2, 2, 2000, 3);
        let plus = BulkDensity::compressible_plus(1.0).unwrap().recession();
        assert!(check_projection_property(&plus, &samples).unwrap().holds);

        samples.push((
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.1]),
            DVector::from_vec(vec![1.0, 0.0]),
        ));
        let hat = BulkDensity::compressible_hat(1.0).unwrap().recession();
        let rep = check_projection_property(&hat, &samples).unwrap();
        assert!(!rep.holds);
        assert!(rep.worst_violation <= 0.6661 - 1.0 + 1e-12);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn power_holds_and_rejects_non_unit() {
        let pw = BulkDensity::power(2.0).unwrap().recession();
        let samples = random_projection_samples(1, 3, 500, 4);
        let rep = check_projection_property(&pw, &samples).unwrap();
        assert!(rep.holds && rep.worst_violation >= 0.0);
        let bad = vec![(DMatrix::zeros(1, 2), DVector::from_vec(vec![1.0, 1.0]))];
        assert!(check_projection_property(&pw, &bad).is_err());
    }
}
