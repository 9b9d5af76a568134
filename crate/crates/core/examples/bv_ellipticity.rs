//! A flat interface against competitors that split the jump in two.

use cohesive_phase::sbv::{bv_ellipticity_test, split_competitor, G0Density};

fn main() -> anyhow::Result<()> {
    let z = [2.0];
    let nu = [1.0, 0.0];
    let sqrt = G0Density::new(0.5, 1.0)?;
    let square = |v: &[f64], _: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    for theta in [0.25, 0.5, 0.75] {
        let comp = split_competitor(16, &z, 0, theta, 2)?;
        let a = bv_ellipticity_test(sqrt.surface(), &z, &nu, &comp, 1e-12)?;
        let b = bv_ellipticity_test(square, &z, &nu, &comp, 1e-12)?;
        println!(
            "theta {theta}: sqrt  {:.3} vs {:.3} violated {}   square {:.3} vs {:.3} violated {}",
            a.lhs, a.rhs, a.violated, b.lhs, b.rhs, b.violated
        );
    }
    Ok(())
}
