//! The one-dimensional optimal-profile problem on growing windows, with
//! and without truncation.

use cohesive_phase::surface_density::{g_of, GOptions};
use cohesive_phase::{BulkDensity, SurfaceParams};

fn main() -> anyhow::Result<()> {
    let params = SurfaceParams::new(2.0, 2.0, 1.0)?;
    let psi_inf = BulkDensity::power(2.0)?.recession();
    let opts = GOptions {
        spacing: 0.01,
        ..GOptions::default()
    };
    for z in [0.1, 1.0, 10.0] {
        let est = g_of(&[z], &[1.0], &psi_inf, &params, &opts)?;
        let windows: Vec<String> = est.convergence_history.iter().map(|(t, v)| format!("T={t}: {v:.5}")).collect();
        println!("z = {z:>4}: g = {:.5}  young bound {:.5}  min beta {:.3}", est.value, est.lower_bound, est.profile.min_beta());
        println!("          {}", windows.join(", "));
        let truncated = g_of(&[z], &[1.0], &psi_inf, &params, &GOptions { m_trunc: 10.0, ..opts.clone() })?;
        println!("          with M = 10: {:.5}", truncated.value);
    }
    Ok(())
}
