//! Radial truncations `𝒯_k` at radii `3^k`, applied to a field.

use cohesive_phase::sbv::{cells_differing, truncate, DiscreteSBV, TruncationLadder};

fn main() -> anyhow::Result<()> {
    let ladder = TruncationLadder;
    for k in 1..4 {
        let a = ladder.radius(k);
        let samples: Vec<String> = [0.5, 1.0, 1.5, 2.0, 3.0].iter().map(|f| format!("{:.2}", ladder.profile(k, f * a))).collect();
        println!("k = {k}: a = {a}, rho(r) at r/a = .5,1,1.5,2,3: {}  Lip ~ {:.4}", samples.join(" "), ladder.sampled_lipschitz(k, 2, 20_000, k as u64));
    }
    let values: Vec<f64> = (0..20).map(|i| (i as f64 - 10.0).powi(3) / 40.0).collect();
    let u = DiscreteSBV::piecewise_constant(1, [20, 1], 0.05, 1, values)?;
    let t = truncate(&u, 1, &ladder)?;
    println!("cells changed by T_1: {}", cells_differing(&u, &t, 0.0)?);
    Ok(())
}
