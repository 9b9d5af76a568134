//! Lower convex hull of a sampled double well, and the envelope limit of
//! `h_δ` as `δ → 1`.

use cohesive_phase::energy_models::{verify_hdelta_limit, EnvelopeGrid1D};
use cohesive_phase::{BulkDensity, DensityKind, SurfaceParams};

fn main() -> anyhow::Result<()> {
    let well = EnvelopeGrid1D::sample(-2.0, 2.0, 9, |x| (x * x - 1.0).powi(2))?;
    for ((x, y), h) in well.xs.iter().zip(&well.ys).zip(&well.hull_ys) {
        println!("x = {x:5.2}  W = {y:6.3}  W** = {h:6.3}");
    }

    let xs: Vec<f64> = (0..401).map(|i| -3.0 + 0.015 * i as f64).collect();
    for q in [2.0, 4.0] {
        let params = SurfaceParams::new(2.0, q, 1.0)?;
        let rep = verify_hdelta_limit(&BulkDensity::power(q)?, DensityKind::PowerQ, &params, &[0.2, 0.5, 0.8, 0.95], &xs)?;
        for (delta, err) in rep.history {
            println!("q = {q}: up to delta = {delta:.2}, sup distance {err:.4}");
        }
    }
    Ok(())
}
