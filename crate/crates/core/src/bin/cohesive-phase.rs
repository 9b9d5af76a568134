use std::process::ExitCode;

use anyhow::Context;
use cohesive_phase::experiments::{self, JobConfig, Subcommand, THREADS_ENV};

fn usage() -> String {
    let names: Vec<&str> = Subcommand::ALL.iter().map(|s| s.name()).collect();
    format!(
        "usage: cohesive-phase <subcommand> [--config FILE] [--key value ...]\n\nsubcommands: {}\n\n\
         Results go to <out>/results.csv (default out = .). {THREADS_ENV} sets the worker count.",
        names.join(", ")
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        eprintln!("{}", usage());
        return ExitCode::from(if args.is_empty() { 2 } else { 0 });
    }
    if let Err(e) = set_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let job = match JobConfig::from_args(&args) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", usage());
            return ExitCode::from(2);
        }
    };
    let outcome = match experiments::run(&job) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(experiments::exit_code_for(&e) as u8);
        }
    };
    for r in &outcome.rows {
        let verdict = if r.pass { "pass" } else { "FAIL" };
        println!("{verdict} {:<32} {:>14.6e}  (bound {:.3e})  {}", r.metric, r.value, r.tolerance, r.note);
    }
    match experiments::write_outputs(&job, &outcome) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn set_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV}={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
