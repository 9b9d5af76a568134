//! Saving a phase-field state and reading it back.

use cohesive_phase::io::FieldDump;
use cohesive_phase::phase_field::{BarProblem, PhaseFieldState, StaggeredOptions};
use cohesive_phase::SurfaceParams;

fn main() -> anyhow::Result<()> {
    let bar = BarProblem::scalar(5.0, SurfaceParams::new(2.0, 2.0, 1.0)?)?;
    let sol = bar.solve(0.1, None, &StaggeredOptions::default())?;
    let dir = std::env::temp_dir().join("cohesive-phase-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("bar.cpf");
    sol.state.to_dump().write(&path)?;

    let back = PhaseFieldState::from_dump(&FieldDump::read(&path)?)?;
    println!("wrote {} ({} nodes, eps {})", path.display(), back.n_nodes(), back.eps);
    println!("round trip exact: {}", back.u == sol.state.u && back.v == sol.state.v);
    Ok(())
}
