//! A bar pulled apart by `z`: phase-field minimisers as `ε → 0`, compared
//! with the elastic and crack energies, and the crossover between them.

use cohesive_phase::phase_field::{crossover, gamma_sweep, BarProblem, StaggeredOptions};
use cohesive_phase::surface_density::g_scal;
use cohesive_phase::SurfaceParams;

fn main() -> anyhow::Result<()> {
    let params = SurfaceParams::new(2.0, 2.0, 1.0)?;
    let opts = StaggeredOptions::default();
    for z in [0.5, 3.0] {
        let bar = BarProblem::scalar(z, params)?;
        let sweep = gamma_sweep(&bar, &[0.1, 0.05, 0.025], &opts)?;
        println!("z = {z}: elastic {:.4}, crack {:.4}", sweep.elastic_reference, sweep.crack_reference);
        for r in &sweep.rows {
            println!("  eps {:<6} h {:.5}  energy {:.5}  min v {:.3}  jump {}", r.eps, r.h, r.energy, r.min_v, r.jump);
        }
    }
    let (lo, hi) = crossover(&params, 1.0, 0.1, 10.0, 0.01, 500)?;
    println!("crossover z* in [{lo:.4}, {hi:.4}], g_scal there {:.4}", g_scal(lo, &params, 500)?);
    Ok(())
}
