//! Driving the experiment harness from code: a sweep over `p` written to
//! a CSV file.

use cohesive_phase::experiments::{run, write_rows, JobConfig};

fn main() -> anyhow::Result<()> {
    let job = JobConfig::from_args(&["g-scal", "--mode", "value", "--s", "0.01,1,100", "--n", "400", "--grid.p", "1.5,2,3"])?;
    let out = run(&job)?;
    write_rows(std::io::stdout(), &out.rows)?;
    println!("exit code {}", out.exit_code());
    Ok(())
}
