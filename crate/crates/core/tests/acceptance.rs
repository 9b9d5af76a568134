//! One line per acceptance criterion. Each criterion is exactly one
//! `cohesive-phase` invocation, with its tolerances spelled out here.
//!
//! The process exits 0 regardless of the verdicts unless
//! `ACCEPTANCE_STRICT=1` is set.

use std::time::Instant;

use cohesive_phase::experiments::{run, JobConfig, ResultRow};

struct Criterion {
    id: u32,
    title: &'static str,
    args: &'static [&'static str],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "crack saturation g_scal(100) in [0.95, 1.02] within 10 s",
        args: &["cell-density", "--mode", "saturation", "--z", "100", "--n", "2000", "--lo", "0.95", "--hi", "1.02", "--max_seconds", "10"],
    },
    Criterion {
        id: 2,
        title: "small-jump exponent 2/(p+1) within 0.15, r2 >= 0.98, < 120 s per p",
        args: &["exponent-fit", "--p_list", "1.5,2,3", "--s_min", "1e-3", "--s_max", "1e-1", "--n", "2000", "--tol", "0.15", "--r2", "0.98", "--max_seconds", "120"],
    },
    Criterion {
        id: 3,
        title: "1D cell g_of(z, e1) vs g_scal within 2%",
        args: &["cell-density", "--mode", "isotropy", "--z", "0.1,1,10", "--tol", "0.02"],
    },
    Criterion {
        id: 4,
        title: "truncation M = 1e3 vs M = inf within 1%",
        args: &["cell-density", "--mode", "truncation", "--z", "0.1,1,10", "--m_trunc", "1e3", "--tol", "0.01"],
    },
    Criterion {
        id: 5,
        title: "subadditivity on 100 random pairs, slack 2e-3",
        args: &["g-scal", "--mode", "subadditivity", "--pairs", "100", "--z_max", "5", "--slack", "2e-3", "--seed", "5"],
    },
    Criterion {
        id: 6,
        title: "Young lower bound <= value + 1e-8 on every cell solve",
        args: &["cell-density", "--mode", "young", "--z", "0.1,1,10"],
    },
    Criterion {
        id: 7,
        title: "bar at eps = 0.0125 within 10% of the sharp limit; indicator flips across z*",
        args: &["sweep-gamma", "--z", "0.1,10", "--eps", "0.1,0.05,0.025,0.0125", "--tol", "0.1", "--bracket", "0.05"],
    },
    Criterion {
        id: 8,
        title: "2D cell value/T at T = 16 within 10% of g_scal(1); z = 0 decreasing in T",
        args: &["cell-density", "--mode", "nd", "--z", "1,0", "--nu", "0,1", "--t_list", "4,8,16", "--h", "0.5", "--tol", "0.1"],
    },
    Criterion {
        id: 9,
        title: "envelope sup_delta hull(h_delta) vs hull(psi) <= 0.05 for x^2 and x^4",
        args: &["envelope-check", "--q_list", "2,4", "--x_max", "3", "--points", "4001", "--tol", "0.05"],
    },
    Criterion {
        id: 10,
        title: "projection property: plus holds, hat fails with witness <= -0.3",
        args: &["projection-check", "--density", "compressible_plus,compressible_hat", "--alpha", "1", "--samples", "10000", "--witness_bound", "-0.3"],
    },
    Criterion {
        id: 11,
        title: "quantiser sup and variation bounds on 1000 fields",
        args: &["quantize-check", "--seed", "7", "--fields", "1000"],
    },
    Criterion {
        id: 12,
        title: "analytic vs central-difference gradients <= 1e-5",
        args: &["grad-check", "--states", "20", "--tol", "1e-5"],
    },
    Criterion {
        id: 13,
        title: "slicing bound <= energy on 10 minimisers; crack has a jump facet",
        args: &["slicing-check", "--deltas", "0.3,0.6,0.9", "--z", "0.1,0.5,1,2", "--eps", "0.1,0.05", "--z_crack", "10"],
    },
    Criterion {
        id: 14,
        title: "BV-ellipticity: g0 = s^(1/2) passes, |z|^2 violated at z = 2",
        args: &["bv-test", "--gamma", "0.5", "--z", "2"],
    },
];

fn summary(rows: &[ResultRow]) -> String {
    rows.iter()
        .map(|r| format!("{}{}={:.4e}", if r.pass { "" } else { "!" }, r.metric, r.value))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let t = Instant::now();
        let verdict = JobConfig::from_args(c.args).and_then(|job| run(&job));
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(out) if out.all_pass() => {
                println!("criterion {:>2}: PASS  {}  [{secs:.1}s] {}", c.id, c.title, summary(&out.rows))
            }
            Ok(out) => {
                failed.push(c.id);
                println!("criterion {:>2}: FAIL  {}  [{secs:.1}s] {}", c.id, c.title, summary(&out.rows));
            }
            Err(e) => {
                failed.push(c.id);
                println!("criterion {:>2}: FAIL  {}  [{secs:.1}s] error: {e}", c.id, c.title);
            }
        }
    }
    println!("{} of {} criteria pass; failing: {failed:?}", CRITERIA.len() - failed.len(), CRITERIA.len());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
