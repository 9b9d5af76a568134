//! Bulk densities, their recession functions and the linear-growth
//! approximations `h_δ`.

use cohesive_phase::energy_models::{check_projection_property, h_delta, random_projection_samples, MatrixDensity};
use cohesive_phase::{BulkDensity, SurfaceParams};

fn main() -> anyhow::Result<()> {
    let params = SurfaceParams::new(2.0, 4.0, 1.0)?;
    let xi = [1.0, 0.2, -0.3, 0.9];
    for d in [BulkDensity::power(4.0)?, BulkDensity::compressible_plus(1.0)?, BulkDensity::compressible_hat(1.0)?] {
        let rec = d.recession();
        println!("{:<18} c = {:.3}  psi = {:.4}  psi_inf = {:.4}", d.kind, d.c, d.value(&xi), rec.value(&xi));
        for delta in [0.3, 0.9, 0.999] {
            println!("    h_delta({delta}) = {:.4}", h_delta(&d, &params, delta, &xi)?);
        }
        let samples = random_projection_samples(2, 2, 2000, 1);
        let rep = check_projection_property(&rec, &samples)?;
        println!("    projection property holds: {} (worst {:.3})", rep.holds, rep.worst_violation);
    }
    Ok(())
}
