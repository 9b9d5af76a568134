//! The isotropic surface density `g_scal(s)` and its small-jump power law.

use cohesive_phase::surface_density::{fit_small_z_exponent, g_scal};
use cohesive_phase::SurfaceParams;

fn main() -> anyhow::Result<()> {
    let params = SurfaceParams::new(2.0, 2.0, 1.0)?;
    for s in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0] {
        println!("g_scal({s:>6}) = {:.5}", g_scal(s, &params, 800)?);
    }
    let grid: Vec<f64> = (0..7).map(|i| 1e-3 * 10f64.powf(i as f64 / 3.0)).collect();
    let fit = fit_small_z_exponent(&params, &grid, 800)?;
    println!(
        "fitted exponent {:.3} (r2 {:.4}), predicted {:.3}",
        fit.exponent,
        fit.r2,
        params.small_jump_exponent()
    );
    Ok(())
}
