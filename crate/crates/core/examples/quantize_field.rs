//! Piecewise-constant approximation of an SBV field with optimally chosen
//! offsets, and the surface-energy estimate for `g₀(s) = s^γ`.

use cohesive_phase::sbv::{quantize_selected, verify_quantization_estimate, DiscreteSBV, G0Density};

fn main() -> anyhow::Result<()> {
    let n = 64;
    let h = 1.0 / n as f64;
    // A ramp with a jump of 0.8 in the middle, two components.
    let values: Vec<f64> = (0..n)
        .flat_map(|i| {
            let x = (i as f64 + 0.5) * h;
            let jump = if x > 0.5 { 0.8 } else { 0.0 };
            [x + jump, 0.5 * x]
        })
        .collect();
    let u = DiscreteSBV::classify(1, [n, 1], h, 2, values, 10.0)?;
    println!("u: |Du| = {:.4}, jump facets {}", u.total_variation(), u.jump_count());
    for eps in [0.2, 0.05] {
        let (q, rho) = quantize_selected(&u, eps)?;
        println!(
            "eps {eps}: rho = {rho:.3?}  sup error {:.4}  |Du_eps| = {:.4}  jumps {}",
            u.sup_distance(&q)?,
            q.total_variation(),
            q.jump_count()
        );
    }
    let g0 = G0Density::new(0.5, 1.0)?;
    let rep = verify_quantization_estimate(&u, 0.05, 0.5, 0.01, &g0)?;
    println!("H(u_eps) = {:.4}, H(u) = {:.4}, implied constant {:.4}", rep.lhs, rep.base, rep.ratio);
    Ok(())
}
