//! Configuration, dispatch and CSV reporting for the `cohesive-phase`
//! binary.
//!
//! A job is a [`Subcommand`] plus a flat [`Config`]. Every job produces
//! [`ResultRow`]s; a key of the form `grid.NAME = a, b, c` turns the job
//! into a sweep over `NAME`, run in parallel and merged in grid order.

mod config;
mod jobs;
mod report;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

pub use config::Config;
pub use report::{write_csv, write_rows, ResultRow, CSV_SCHEMA};

use crate::error::{Error, Result};

/// Environment variable read by the binary for the worker thread count.
pub const THREADS_ENV: &str = "COHESIVE_PHASE_THREADS";

/// Keys accepted by every subcommand.
const COMMON_KEYS: &[&str] = &["out"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    CellDensity,
    GScal,
    SweepGamma,
    ExponentFit,
    QuantizeCheck,
    EnvelopeCheck,
    ProjectionCheck,
    BvTest,
    GradCheck,
    SlicingCheck,
}

impl Subcommand {
    pub const ALL: [Subcommand; 10] = [
        Subcommand::CellDensity,
        Subcommand::GScal,
        Subcommand::SweepGamma,
        Subcommand::ExponentFit,
        Subcommand::QuantizeCheck,
        Subcommand::EnvelopeCheck,
        Subcommand::ProjectionCheck,
        Subcommand::BvTest,
        Subcommand::GradCheck,
        Subcommand::SlicingCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CellDensity => "cell-density",
            Subcommand::GScal => "g-scal",
            Subcommand::SweepGamma => "sweep-gamma",
            Subcommand::ExponentFit => "exponent-fit",
            Subcommand::QuantizeCheck => "quantize-check",
            Subcommand::EnvelopeCheck => "envelope-check",
            Subcommand::ProjectionCheck => "projection-check",
            Subcommand::BvTest => "bv-test",
            Subcommand::GradCheck => "grad-check",
            Subcommand::SlicingCheck => "slicing-check",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Subcommand::CellDensity => jobs::CELL_DENSITY_KEYS,
            Subcommand::GScal => jobs::G_SCAL_KEYS,
            Subcommand::SweepGamma => jobs::SWEEP_GAMMA_KEYS,
            Subcommand::ExponentFit => jobs::EXPONENT_FIT_KEYS,
            Subcommand::QuantizeCheck => jobs::QUANTIZE_KEYS,
            Subcommand::EnvelopeCheck => jobs::ENVELOPE_KEYS,
            Subcommand::ProjectionCheck => jobs::PROJECTION_KEYS,
            Subcommand::BvTest => jobs::BV_KEYS,
            Subcommand::GradCheck => jobs::GRAD_KEYS,
            Subcommand::SlicingCheck => jobs::SLICING_KEYS,
        }
    }

    fn accepts(self, key: &str) -> bool {
        COMMON_KEYS.contains(&key) || jobs::SURFACE_KEYS.contains(&key) || self.keys().contains(&key)
    }

    fn execute(self, c: &Config) -> Result<Vec<ResultRow>> {
        match self {
            Subcommand::CellDensity => jobs::cell_density(c),
            Subcommand::GScal => jobs::g_scal_job(c),
            Subcommand::SweepGamma => jobs::sweep_gamma(c),
            Subcommand::ExponentFit => jobs::exponent_fit(c),
            Subcommand::QuantizeCheck => jobs::quantize_check(c),
            Subcommand::EnvelopeCheck => jobs::envelope_check(c),
            Subcommand::ProjectionCheck => jobs::projection_check(c),
            Subcommand::BvTest => jobs::bv_test(c),
            Subcommand::GradCheck => jobs::grad_check(c),
            Subcommand::SlicingCheck => jobs::slicing_check(c),
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub subcommand: Subcommand,
    pub config: Config,
}

impl JobConfig {
    pub fn new(subcommand: Subcommand, config: Config) -> Self {
        JobConfig { subcommand, config }
    }

    /// `<subcommand> [--config FILE] [--key value ...]`.
    pub fn from_args<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let Some(first) = args.first() else {
            return Err(Error::Config("missing subcommand".into()));
        };
        Ok(JobConfig::new(first.as_ref().parse()?, Config::from_args(&args[1..])?))
    }

    fn check_keys(&self) -> Result<()> {
        for k in self.config.keys() {
            let key = k.strip_prefix("grid.").unwrap_or(k);
            if !self.subcommand.accepts(key) {
                return Err(Error::Config(format!("`{k}` is not a parameter of {}", self.subcommand)));
            }
        }
        Ok(())
    }

    fn grid(&self) -> Result<Option<(String, Vec<String>)>> {
        let keys: Vec<&str> = self.config.keys().filter(|k| k.starts_with("grid.")).collect();
        match keys[..] {
            [] => Ok(None),
            [k] => Ok(Some((k["grid.".len()..].to_string(), self.config.str_list(k, &[])))),
            _ => Err(Error::Config("only one grid.* key per run".into())),
        }
    }
}

/// Rows from one run, with failures that did not produce a metric counted
/// by kind.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub solver_errors: usize,
    pub input_errors: usize,
}

impl RunOutcome {
    pub fn all_pass(&self) -> bool {
        self.solver_errors == 0 && self.input_errors == 0 && self.rows.iter().all(|r| r.pass)
    }

    /// `0` all pass, `1` a metric failed, `2` input error, `3` solver error.
    pub fn exit_code(&self) -> i32 {
        if self.solver_errors > 0 {
            3
        } else if self.input_errors > 0 {
            2
        } else if self.rows.iter().all(|r| r.pass) {
            0
        } else {
            1
        }
    }
}

/// Exit code for a run that failed before producing rows.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::Invariant(_) => 3,
        _ => 2,
    }
}

/// Runs one job, or a sweep when a `grid.*` key is present.
pub fn run(job: &JobConfig) -> Result<RunOutcome> {
    job.check_keys()?;
    match job.grid()? {
        None => Ok(RunOutcome {
            rows: run_single(job.subcommand, &job.config)?,
            ..RunOutcome::default()
        }),
        Some((key, values)) => sweep(job, &key, &values),
    }
}

/// Fans the job out over `values` of `key`. Failing points become rows with
/// `pass = false`; rows are merged in the order of `values`.
pub fn sweep(job: &JobConfig, key: &str, values: &[String]) -> Result<RunOutcome> {
    let grid_key = format!("grid.{key}");
    let results: Vec<Result<Vec<ResultRow>>> = values
        .par_iter()
        .map(|v| {
            let mut c = job.config.clone();
            c.remove(&grid_key);
            c.set(key, v);
            run_single(job.subcommand, &c)
        })
        .collect();
    let mut out = RunOutcome::default();
    for (v, r) in values.iter().zip(results) {
        match r {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => {
                match exit_code_for(&e) {
                    3 => out.solver_errors += 1,
                    _ => out.input_errors += 1,
                }
                let mut row = ResultRow::new("error", f64::NAN, f64::NAN, false).with_note(e.to_string());
                row.subcommand = job.subcommand.name().to_string();
                row.params = format!("{key}={v}");
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

fn run_single(sub: Subcommand, c: &Config) -> Result<Vec<ResultRow>> {
    let t = Instant::now();
    let mut rows = sub.execute(c)?;
    let secs = t.elapsed().as_secs_f64();
    let echo = c.echo();
    for r in &mut rows {
        r.subcommand = sub.name().to_string();
        r.params = echo.clone();
        if r.wall_time_s == 0.0 {
            r.wall_time_s = secs;
        }
    }
    Ok(rows)
}

/// Writes `results.csv` into the job's `out` directory (default `.`).
pub fn write_outputs(job: &JobConfig, outcome: &RunOutcome) -> Result<std::path::PathBuf> {
    let dir = job.config.string("out", ".");
    std::fs::create_dir_all(&dir)?;
    let path = Path::new(&dir).join("results.csv");
    write_csv(&path, &outcome.rows)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.name().parse::<Subcommand>().unwrap(), s);
        }
        assert!("plot".parse::<Subcommand>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let job = JobConfig::from_args(&["bv-test", "--widht", "2"]).unwrap();
        assert!(matches!(run(&job), Err(Error::Config(_))));
    }

    #[test]
    fn empty_grid_gives_no_rows() {
        let job = JobConfig::from_args(&["bv-test", "--grid.n", ""]).unwrap();
        let out = run(&job).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn grid_points_keep_their_order_and_errors_become_rows() {
        let job = JobConfig::from_args(&["bv-test", "--grid.n", "8,3,16"]).unwrap();
        let out = run(&job).unwrap();
        let params: Vec<&str> = out.rows.iter().map(|r| r.params.as_str()).collect();
        assert!(params[0].contains("n=8"));
        assert!(out.rows.iter().any(|r| r.metric == "error" && r.params == "n=3"));
        assert!(params.last().unwrap().contains("n=16"));
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn projection_rows_match_expectations() {
        let job = JobConfig::from_args(&["projection-check", "--samples", "500"]).unwrap();
        let out = run(&job).unwrap();
        assert_eq!(out.exit_code(), 0, "{:?}", out.rows);
        assert_eq!(out.rows.len(), 3);
    }
}
