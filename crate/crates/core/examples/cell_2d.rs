//! The two-dimensional cell problem on a rotated square with mollified
//! boundary data. Larger squares approach the one-dimensional value from
//! above.

use cohesive_phase::phase_field::{cell_energy_nd, NdCellSpec};
use cohesive_phase::surface_density::g_scal;
use cohesive_phase::{BulkDensity, SurfaceParams};

fn main() -> anyhow::Result<()> {
    let params = SurfaceParams::new(2.0, 2.0, 1.0)?;
    let psi_inf = BulkDensity::power(2.0)?.recession();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    println!("g_scal(1) = {:.4}", g_scal(1.0, &params, 1000)?);
    for (nu, t_len) in [([0.0, 1.0], 4.0), ([0.0, 1.0], 8.0), ([s, s], 8.0)] {
        let spec = NdCellSpec { z: vec![1.0, 0.0], nu, t_len, h: 0.5 };
        let r = cell_energy_nd(&spec, &psi_inf, &params)?;
        println!("nu = ({:.3}, {:.3}) T = {t_len}: value/T = {:.4}  min v {:.3}", nu[0], nu[1], r.value, r.state.min_v());
    }
    Ok(())
}
