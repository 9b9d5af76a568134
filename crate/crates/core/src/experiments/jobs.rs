use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Config, ResultRow};
use crate::energy_models::{
    check_projection_property, random_projection_samples, verify_hdelta_limit, BulkDensity, DensityKind, DensitySpec,
    MatrixDensity,
};
use crate::error::{input, Error, Result};
use crate::mesh::Mesh;
use crate::phase_field::{
    crossover, energy_gradient, assemble_energy, gamma_sweep, jump_indicator, slicing_lower_bound, BarProblem,
    BoundaryCondition, NdCellSpec, PhaseFieldState, StaggeredOptions, cell_energy_nd,
};
use crate::sbv::{
    bv_ellipticity_test, quantize_selected, split_competitor, DiscreteSBV, G0Density, DEFAULT_JUMP_THRESHOLD, TV_SLACK,
};
use crate::surface_density::{
    fit_small_z_exponent, g_of, g_scal, minimize_cell, CellOptions, CellSpec, GOptions, SurfaceParams,
};

pub(super) const SURFACE_KEYS: &[&str] = &["p", "q", "ell"];

fn params(c: &Config) -> Result<SurfaceParams> {
    SurfaceParams::new(c.f64("p", 2.0)?, c.f64("q", 2.0)?, c.f64("ell", 1.0)?)
}

fn elapsed(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub(super) const CELL_DENSITY_KEYS: &[&str] =
    &["mode", "z", "n", "lo", "hi", "max_seconds", "tol", "m_trunc", "nu", "t_list", "h", "spacing"];

/// Modes: `saturation`, `isotropy`, `truncation`, `young`, `nd`.
pub(super) fn cell_density(c: &Config) -> Result<Vec<ResultRow>> {
    let p = params(c)?;
    let psi = BulkDensity::power(p.q)?.recession();
    let n = c.usize("n", 2000)?;
    match c.string("mode", "saturation").as_str() {
        "saturation" => {
            let z = c.f64("z", 100.0)?;
            let (lo, hi) = (c.f64("lo", 0.95)?, c.f64("hi", 1.02)?);
            let t = Instant::now();
            let g = g_scal(z, &p, n)?;
            let secs = elapsed(t);
            Ok(vec![
                ResultRow::new("g_scal", g, hi, lo <= g && g <= hi).with_note(format!("range [{lo}, {hi}]")).with_time(secs),
                ResultRow::at_most("runtime_s", secs, c.f64("max_seconds", 10.0)?),
            ])
        }
        "isotropy" => {
            let tol = c.f64("tol", 0.02)?;
            let mut rows = Vec::new();
            for z in c.f64_list("z", &[0.1, 1.0, 10.0])? {
                let t = Instant::now();
                let est = g_of(&[z], &[1.0], &psi, &p, &GOptions::default())?;
                let gs = g_scal(z, &p, n)?;
                rows.push(
                    ResultRow::at_most(format!("g_of_vs_g_scal[z={z}]"), rel(est.value, gs), tol)
                        .with_note(format!("g_of={:.6} g_scal={gs:.6} T={}", est.value, est.t_used))
                        .with_time(elapsed(t)),
                );
            }
            Ok(rows)
        }
        "truncation" => {
            let tol = c.f64("tol", 0.01)?;
            let m = c.f64("m_trunc", 1e3)?;
            let mut rows = Vec::new();
            for z in c.f64_list("z", &[0.1, 1.0, 10.0])? {
                let t = Instant::now();
                let inf = g_of(&[z], &[1.0], &psi, &p, &GOptions::default())?;
                let opts = GOptions { m_trunc: m, ..GOptions::default() };
                let fin = g_of(&[z], &[1.0], &psi, &p, &opts)?;
                rows.push(
                    ResultRow::at_most(format!("truncated_vs_full[z={z}]"), rel(fin.value, inf.value), tol)
                        .with_note(format!("M={m}: {:.6}, M=inf: {:.6}", fin.value, inf.value))
                        .with_time(elapsed(t)),
                );
            }
            Ok(rows)
        }
        "young" => {
            let t = Instant::now();
            let spacing = c.f64("spacing", 0.02)?;
            let mut worst = f64::NEG_INFINITY;
            let mut solves = 0;
            for z in c.f64_list("z", &[0.1, 1.0, 10.0])? {
                for m in [f64::INFINITY, c.f64("m_trunc", 1e3)?] {
                    for tl in c.f64_list("t_list", &[4.0, 8.0, 16.0])? {
                        let spec = CellSpec {
                            z: vec![z],
                            nu: vec![1.0],
                            t_len: tl,
                            n: (tl / spacing).round() as usize + 1,
                            m_trunc: m,
                        };
                        let sol = minimize_cell(&spec, &psi, &p, None, &CellOptions::default())?;
                        worst = worst.max(sol.lower_bound - sol.value);
                        solves += 1;
                    }
                }
            }
            Ok(vec![ResultRow::at_most("young_gap_max", worst, 1e-8)
                .with_note(format!("{solves} cell solves"))
                .with_time(elapsed(t))])
        }
        "nd" => {
            let z = c.f64_list("z", &[1.0, 0.0])?;
            let nu = c.f64_list("nu", &[0.0, 1.0])?;
            let [n1, n2] = nu[..] else {
                return input("nu needs two components");
            };
            let ts = c.f64_list("t_list", &[4.0, 8.0, 16.0])?;
            if ts.is_empty() {
                return input("t_list is empty");
            }
            let h = c.f64("h", 0.5)?;
            let tol = c.f64("tol", 0.1)?;
            let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            let gs = g_scal(zn, &p, n)?;
            let mut rows = Vec::new();
            let mut last = f64::NAN;
            for &tl in &ts {
                let t = Instant::now();
                let r = cell_energy_nd(&NdCellSpec { z: z.clone(), nu: [n1, n2], t_len: tl, h }, &psi, &p)?;
                last = r.value;
                rows.push(
                    ResultRow::new(format!("value_over_T[T={tl}]"), r.value, f64::NAN, r.value.is_finite())
                        .with_note(format!("iterations={} converged={}", r.iterations, r.converged))
                        .with_time(elapsed(t)),
                );
            }
            rows.push(
                ResultRow::at_most("nd_vs_g_scal", rel(last, gs), tol)
                    .with_note(format!("T={} value={last:.6} g_scal={gs:.6}", ts[ts.len() - 1])),
            );
            let t = Instant::now();
            let zero = vec![0.0; z.len()];
            let mut vals = Vec::new();
            for &tl in &ts {
                vals.push(cell_energy_nd(&NdCellSpec { z: zero.clone(), nu: [n1, n2], t_len: tl, h }, &psi, &p)?.value);
            }
            let worst_rise = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            rows.push(
                ResultRow::new("zero_jump_decreasing", worst_rise, 0.0, worst_rise < 0.0)
                    .with_note(format!("{vals:?}"))
                    .with_time(elapsed(t)),
            );
            Ok(rows)
        }
        other => input(format!("unknown cell-density mode `{other}`")),
    }
}

pub(super) const G_SCAL_KEYS: &[&str] = &["mode", "s", "n", "upper", "pairs", "z_max", "m", "seed", "slack"];

/// Modes: `value` and `subadditivity`.
pub(super) fn g_scal_job(c: &Config) -> Result<Vec<ResultRow>> {
    let p = params(c)?;
    match c.string("mode", "value").as_str() {
        "value" => {
            let n = c.usize("n", 2000)?;
            let upper = c.f64("upper", 1.02)?;
            let s_list = c.f64_list("s", &[1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0])?;
            let vals: Vec<Result<(f64, f64)>> = s_list
                .par_iter()
                .map(|&s| {
                    let t = Instant::now();
                    Ok((g_scal(s, &p, n)?, elapsed(t)))
                })
                .collect();
            s_list
                .iter()
                .zip(vals)
                .map(|(s, v)| {
                    let (g, secs) = v?;
                    Ok(ResultRow::at_most(format!("g_scal[s={s}]"), g, upper).with_time(secs))
                })
                .collect()
        }
        "subadditivity" => {
            let n = c.usize("n", 400)?;
            let m = c.usize("m", 2)?;
            let pairs = c.usize("pairs", 100)?;
            let z_max = c.f64("z_max", 5.0)?;
            let slack = c.f64("slack", 2e-3)?;
            if m == 0 {
                return input("m must be positive");
            }
            let t = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(c.u64("seed", 1)?);
            let mut ball = || loop {
                let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-z_max..z_max)).collect();
                if norm(&v) <= z_max {
                    break v;
                }
            };
            // g(z) = g_scal(|z|) in the isotropic case.
            let mut norms = Vec::with_capacity(3 * pairs);
            for _ in 0..pairs {
                let (a, b) = (ball(), ball());
                let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                norms.extend([norm(&a), norm(&b), norm(&s)]);
            }
            let g: Vec<f64> = norms.par_iter().map(|&s| g_scal(s, &p, n)).collect::<Result<_>>()?;
            let worst = g.chunks(3).map(|w| w[2] - w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
            Ok(vec![ResultRow::at_most("subadditivity_defect", worst, slack)
                .with_note(format!("{pairs} pairs, |z| <= {z_max}, m = {m}"))
                .with_time(elapsed(t))])
        }
        other => input(format!("unknown g-scal mode `{other}`")),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(super) const SWEEP_GAMMA_KEYS: &[&str] =
    &["z", "eps", "n", "tol", "length", "lo", "hi", "bracket", "flip_eps", "crossover_n", "crossover", "dump"];

/// The bar problem for each `z` over a decreasing `ε` list, then the
/// elastic/crack crossover.
pub(super) fn sweep_gamma(c: &Config) -> Result<Vec<ResultRow>> {
    let p = params(c)?;
    let eps = c.f64_list("eps", &[0.1, 0.05, 0.025, 0.0125])?;
    let n = c.usize("n", 2000)?;
    let tol = c.f64("tol", 0.1)?;
    let length = c.f64("length", 1.0)?;
    let opts = StaggeredOptions::default();
    let mut rows = Vec::new();
    for z in c.f64_list("z", &[0.1, 10.0])? {
        let t = Instant::now();
        let mut bar = BarProblem::scalar(z, p)?;
        bar.length = length;
        let sweep = gamma_sweep(&bar, &eps, &opts)?;
        let reference = bar.elastic_reference().min(g_scal(z, &p, n)?);
        let secs = elapsed(t);
        let mut errs = Vec::new();
        for r in &sweep.rows {
            if let Some(e) = &r.error {
                rows.push(
                    ResultRow::new(format!("solve[z={z},eps={}]", r.eps), f64::NAN, f64::NAN, false)
                        .with_note(format!("solver error: {e}")),
                );
            } else {
                errs.push((r.energy - reference).abs());
            }
        }
        let Some(last) = sweep.rows.last() else {
            continue;
        };
        rows.push(
            ResultRow::at_most(format!("rel_err[z={z}]"), rel(last.energy, reference), tol)
                .with_note(format!(
                    "eps={} energy={:.6} reference={reference:.6} jump={}",
                    last.eps, last.energy, last.jump
                ))
                .with_time(secs),
        );
        // The distance to the limit should not grow as ε decreases.
        let rise = errs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let energies: Vec<String> = sweep.rows.iter().map(|r| format!("{:.6}", r.energy)).collect();
        rows.push(ResultRow::at_most(format!("trend[z={z}]"), rise, 1e-9 * reference.max(1e-300)).with_note(energies.join(" ")));
        if let (Some(prefix), Some(state)) = (c.get("dump"), &sweep.final_state) {
            state.to_dump().write(Path::new(&format!("{prefix}_z{z}.cpf")))?;
        }
    }
    if c.string("crossover", "yes") == "yes" {
        let t = Instant::now();
        let bracket = c.f64("bracket", 0.05)?;
        let (a, b) = crossover(&p, length, c.f64("lo", 0.1)?, c.f64("hi", 10.0)?, bracket, c.usize("crossover_n", 1000)?)?;
        rows.push(
            ResultRow::at_most("crossover_bracket", (b - a) / a, bracket)
                .with_note(format!("z* in [{a:.6}, {b:.6}]"))
                .with_time(elapsed(t)),
        );
        let flip_eps = c.f64("flip_eps", *eps.last().unwrap_or(&0.0125))?;
        let mut jumps = Vec::new();
        for z in [0.95 * a, 1.05 * b] {
            let mut bar = BarProblem::scalar(z, p)?;
            bar.length = length;
            jumps.push(jump_indicator(&bar.solve(flip_eps, None, &opts)?.state));
        }
        let flips = !jumps[0] && jumps[1];
        rows.push(
            ResultRow::new("indicator_flip", flips as u8 as f64, 1.0, flips)
                .with_note(format!("jump at 0.95 z*: {}, at 1.05 z*: {}", jumps[0], jumps[1]))
                .with_time(elapsed(t)),
        );
    }
    Ok(rows)
}

pub(super) const EXPONENT_FIT_KEYS: &[&str] = &["p_list", "s_min", "s_max", "points", "n", "tol", "r2", "max_seconds"];

pub(super) fn exponent_fit(c: &Config) -> Result<Vec<ResultRow>> {
    let base = params(c)?;
    let (lo, hi) = (c.f64("s_min", 1e-3)?, c.f64("s_max", 1e-1)?);
    let k = c.usize("points", 9)?;
    if !(lo > 0.0 && hi > lo) || k < 5 {
        return input("need 0 < s_min < s_max and at least 5 points");
    }
    let grid: Vec<f64> = (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect();
    let n = c.usize("n", 2000)?;
    let tol = c.f64("tol", 0.15)?;
    let mut rows = Vec::new();
    for pv in c.f64_list("p_list", &[base.p])? {
        let t = Instant::now();
        let p = SurfaceParams::new(pv, base.q, base.ell)?;
        let fit = fit_small_z_exponent(&p, &grid, n)?;
        let secs = elapsed(t);
        let expected = p.small_jump_exponent();
        rows.push(
            ResultRow::new(format!("exponent[p={pv}]"), fit.exponent, tol, (fit.exponent - expected).abs() <= tol)
                .with_note(format!("expected {expected:.6}"))
                .with_time(secs),
        );
        rows.push(ResultRow::at_least(format!("r2[p={pv}]"), fit.r2, c.f64("r2", 0.98)?));
        rows.push(ResultRow::at_most(format!("runtime_s[p={pv}]"), secs, c.f64("max_seconds", 120.0)?));
    }
    Ok(rows)
}

pub(super) const QUANTIZE_KEYS: &[&str] = &["seed", "fields", "eps_min", "eps_max", "max_cells"];

/// Random piecewise-smooth fields with `m = 1, 2, 3` on 1D and 2D grids.
pub(super) fn quantize_check(c: &Config) -> Result<Vec<ResultRow>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(c.u64("seed", 7)?);
    let fields = c.usize("fields", 1000)?;
    let (e_lo, e_hi) = (c.f64("eps_min", 0.01)?, c.f64("eps_max", 1.0)?);
    let max_cells = c.usize("max_cells", 12)?.max(2);
    let (mut sup_bad, mut comp_bad, mut total_bad) = (0usize, 0usize, 0usize);
    let mut worst_sup = 0.0f64;
    let mut worst_total = 0.0f64;
    for i in 0..fields {
        let m = 1 + i % 3;
        let u = random_field(&mut rng, m, max_cells)?;
        let eps = rng.gen_range(e_lo..e_hi);
        let (q, _) = quantize_selected(&u, eps)?;
        let sup = u.sup_distance(&q)?;
        worst_sup = worst_sup.max(sup / eps);
        sup_bad += (sup > eps) as usize;
        comp_bad += (0..m).any(|a| q.component_variation(a) > u.component_variation(a) * (1.0 + TV_SLACK)) as usize;
        let tv = u.total_variation();
        if tv > 0.0 {
            worst_total = worst_total.max(q.total_variation() / (tv * (m as f64).sqrt()));
        }
        total_bad += (q.total_variation() > (m as f64).sqrt() * tv * (1.0 + TV_SLACK)) as usize;
    }
    let secs = elapsed(t);
    Ok(vec![
        ResultRow::at_most("sup_violations", sup_bad as f64, 0.0)
            .with_note(format!("max |u - u_eps|/eps = {worst_sup:.6}"))
            .with_time(secs),
        ResultRow::at_most("component_tv_violations", comp_bad as f64, 0.0),
        ResultRow::at_most("total_tv_violations", total_bad as f64, 0.0)
            .with_note(format!("max |Du_eps|/(sqrt(m)|Du|) = {worst_total:.6}")),
    ])
}

fn random_field(rng: &mut ChaCha8Rng, m: usize, max_cells: usize) -> Result<DiscreteSBV> {
    let dim = if rng.gen_bool(0.5) { 1 } else { 2 };
    let shape = if dim == 1 {
        [rng.gen_range(2..=max_cells * 3), 1]
    } else {
        [rng.gen_range(2..=max_cells), rng.gen_range(2..=max_cells)]
    };
    let h = 1.0 / shape[0] as f64;
    let cells = shape[0] * shape[1];
    let mut values = vec![0.0; cells * m];
    for a in 0..m {
        let mut prev = rng.gen_range(-3.0..3.0);
        for k in 0..cells {
            prev = if rng.gen_bool(0.2) {
                rng.gen_range(-3.0..3.0)
            } else {
                prev + rng.gen_range(-0.05..0.05)
            };
            values[k * m + a] = prev;
        }
    }
    DiscreteSBV::classify(dim, shape, h, m, values, DEFAULT_JUMP_THRESHOLD)
}

pub(super) const ENVELOPE_KEYS: &[&str] = &["q_list", "deltas", "x_max", "points", "tol"];

pub(super) fn envelope_check(c: &Config) -> Result<Vec<ResultRow>> {
    let base = params(c)?;
    let mut default_deltas: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
    default_deltas.extend([0.99, 0.999]);
    let deltas = c.f64_list("deltas", &default_deltas)?;
    let x_max = c.f64("x_max", 3.0)?;
    let k = c.usize("points", 4001)?;
    if k < 2 {
        return input("need at least 2 points");
    }
    let xs: Vec<f64> = (0..k).map(|i| -x_max + 2.0 * x_max * i as f64 / (k - 1) as f64).collect();
    let mut rows = Vec::new();
    for q in c.f64_list("q_list", &[2.0, 4.0])? {
        let t = Instant::now();
        let p = SurfaceParams::new(base.p, q, base.ell)?;
        let rep = verify_hdelta_limit(&BulkDensity::power(q)?, DensityKind::PowerQ, &p, &deltas, &xs)?;
        rows.push(ResultRow::at_most(format!("hull_distance[q={q}]"), rep.max_error, c.f64("tol", 0.05)?).with_time(elapsed(t)));
    }
    Ok(rows)
}

pub(super) const PROJECTION_KEYS: &[&str] = &["density", "alpha", "samples", "seed", "expect", "witness_bound"];

/// Each density is expected to satisfy the property unless it is
/// `compressible_hat` or `expect = violated` is given.
pub(super) fn projection_check(c: &Config) -> Result<Vec<ResultRow>> {
    let alpha = c.f64("alpha", 1.0)?;
    let samples = random_projection_samples(2, 2, c.usize("samples", 10_000)?, c.u64("seed", 3)?);
    let mut rows = Vec::new();
    for name in c.str_list("density", &["compressible_plus", "compressible_hat"]) {
        let t = Instant::now();
        let kind: DensityKind = name.parse()?;
        let d = BulkDensity::from_spec(&DensitySpec { kind, q: c.f64("q", 4.0)?, alpha })?;
        let psi = d.recession();
        let expect_holds = match c.get("expect") {
            Some("holds") => true,
            Some("violated") => false,
            Some(o) => return Err(Error::Config(format!("expect must be `holds` or `violated`, got `{o}`"))),
            None => kind != DensityKind::CompressibleHat,
        };
        let rep = check_projection_property(&psi, &samples)?;
        rows.push(
            ResultRow::new(format!("projection[{kind}]"), rep.worst_violation, -1e-9, rep.holds == expect_holds)
                .with_note(format!("holds={} expected={}", rep.holds, if expect_holds { "holds" } else { "violated" }))
                .with_time(elapsed(t)),
        );
        if !expect_holds {
            let xi = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.1]);
            let nu = DVector::from_vec(vec![1.0, 0.0]);
            let w = check_projection_property(&psi, &[(xi, nu)])?;
            rows.push(
                ResultRow::at_most(format!("witness_gap[{kind}]"), w.worst_violation, c.f64("witness_bound", -0.3)?)
                    .with_note("xi = diag(1, 0.1), nu = e1"),
            );
        }
    }
    Ok(rows)
}

pub(super) const BV_KEYS: &[&str] = &["n", "z", "gamma", "widths", "thetas", "tol"];

pub(super) fn bv_test(c: &Config) -> Result<Vec<ResultRow>> {
    let t = Instant::now();
    let n = c.usize("n", 16)?;
    let z = c.f64_list("z", &[2.0])?;
    let tol = c.f64("tol", 1e-12)?;
    let g0 = G0Density::new(c.f64("gamma", 0.5)?, c.f64("ell", 1.0)?)?;
    let widths = c.f64_list("widths", &[1.0, 2.0, 3.0, 4.0])?;
    let thetas = c.f64_list("thetas", &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])?;
    let mut violations = 0;
    let mut margin = f64::INFINITY;
    let mut tried = 0;
    for axis in 0..2 {
        let nu = if axis == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        for &w in &widths {
            for &th in &thetas {
                let comp = split_competitor(n, &z, axis, th, w as usize)?;
                let r = bv_ellipticity_test(g0.surface(), &z, &nu, &comp, tol)?;
                violations += r.violated as usize;
                margin = margin.min(r.rhs - r.lhs);
                tried += 1;
            }
        }
    }
    let quad = |v: &[f64], _: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let comp = split_competitor(n, &z, 0, 0.5, 2)?;
    let r = bv_ellipticity_test(quad, &z, &[1.0, 0.0], &comp, tol)?;
    Ok(vec![
        ResultRow::at_most("g0_violations", violations as f64, 0.0)
            .with_note(format!("{tried} competitors, min margin {margin:.6}"))
            .with_time(elapsed(t)),
        ResultRow::new("quadratic_violation", r.lhs - r.rhs, tol, r.violated)
            .with_note(format!("g(z)={:.6} vs split {:.6}", r.lhs, r.rhs)),
    ])
}

pub(super) const GRAD_KEYS: &[&str] = &["states", "seed", "tol", "alpha", "power_q"];

/// Analytic against central-difference gradients for each density and for
/// the full phase-field energy.
pub(super) fn grad_check(c: &Config) -> Result<Vec<ResultRow>> {
    let states = c.usize("states", 20)?;
    let tol = c.f64("tol", 1e-5)?;
    let alpha = c.f64("alpha", 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.u64("seed", 11)?);
    let densities = [
        BulkDensity::power(c.f64("power_q", 3.0)?)?,
        BulkDensity::compressible_plus(alpha)?,
        BulkDensity::compressible_hat(alpha)?,
    ];
    let mut rows = Vec::new();
    for d in &densities {
        let t = Instant::now();
        let mut worst = 0.0f64;
        for _ in 0..states {
            let xi: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut g = vec![0.0; 4];
            d.gradient_into(&xi, &mut g);
            let fd: Vec<f64> = (0..4)
                .map(|i| {
                    let h = 1e-6 * xi[i].abs().max(1.0);
                    let (mut a, mut b) = (xi.clone(), xi.clone());
                    a[i] += h;
                    b[i] -= h;
                    (d.value(&a) - d.value(&b)) / (2.0 * h)
                })
                .collect();
            worst = worst.max(crate::optim::relative_error(&g, &fd, 1e-8));
        }
        rows.push(ResultRow::at_most(format!("density_grad[{}]", d.kind), worst, tol).with_time(elapsed(t)));
    }

    let t = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..states {
        let (mesh, m, d, p) = match i % 3 {
            0 => (Mesh::line(12, 1.0 / 12.0), 1, BulkDensity::power(2.0)?, SurfaceParams::new(2.0, 2.0, 1.0)?),
            1 => (Mesh::grid(4, 3, 0.25), 2, densities[1].clone(), SurfaceParams::new(2.0, 4.0, 1.0)?),
            _ => (Mesh::grid(4, 3, 0.25), 2, densities[2].clone(), SurfaceParams::new(1.5, 4.0, 1.0)?),
        };
        let mut s = PhaseFieldState::new(mesh, m, 0.2)?;
        s.u.iter_mut().for_each(|u| *u = rng.gen_range(-1.0..1.0));
        s.v.iter_mut().for_each(|v| *v = rng.gen_range(0.05..0.95));
        let bc = BoundaryCondition::none();
        let (du, dv) = energy_gradient(&s, &d, &p, &bc)?;
        let analytic: Vec<f64> = du.iter().chain(&dv).cloned().collect();
        let mut fd = Vec::with_capacity(analytic.len());
        let h = 1e-6;
        for k in 0..s.u.len() + s.v.len() {
            let mut plus = s.clone();
            let mut minus = s.clone();
            if k < s.u.len() {
                plus.u[k] += h;
                minus.u[k] -= h;
            } else {
                plus.v[k - s.u.len()] += h;
                minus.v[k - s.u.len()] -= h;
            }
            fd.push((assemble_energy(&plus, &d, &p, &bc)? - assemble_energy(&minus, &d, &p, &bc)?) / (2.0 * h));
        }
        worst = worst.max(crate::optim::relative_error(&analytic, &fd, 1e-8));
    }
    rows.push(ResultRow::at_most("phase_field_grad", worst, tol).with_time(elapsed(t)));
    Ok(rows)
}

pub(super) const SLICING_KEYS: &[&str] = &["z", "eps", "deltas", "z_crack"];

/// Slicing bound on bar minimisers, and the jump set it recovers on a
/// crack.
pub(super) fn slicing_check(c: &Config) -> Result<Vec<ResultRow>> {
    let t = Instant::now();
    let p = params(c)?;
    let deltas = c.f64_list("deltas", &[0.3, 0.6, 0.9])?;
    let eps_list = c.f64_list("eps", &[0.1, 0.05])?;
    let z_crack = c.f64("z_crack", 10.0)?;
    let mut zs = c.f64_list("z", &[0.1, 0.5, 1.0, 2.0])?;
    if !zs.contains(&z_crack) {
        zs.push(z_crack);
    }
    let opts = StaggeredOptions::default();
    let mut violations = 0;
    let mut margin = f64::INFINITY;
    let mut states = 0;
    let mut crack_jumps = usize::MAX;
    for &z in &zs {
        for &eps in &eps_list {
            let bar = BarProblem::scalar(z, p)?;
            let sol = bar.solve(eps, None, &opts)?;
            states += 1;
            for &d in &deltas {
                match slicing_lower_bound(&sol.state, &bar.density, &p, d) {
                    Ok(r) => {
                        margin = margin.min(r.energy - r.lower_bound);
                        if z == z_crack {
                            crack_jumps = crack_jumps.min(r.ubar.jump_count());
                        }
                    }
                    Err(Error::Invariant(_)) => violations += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(vec![
        ResultRow::at_most("bound_violations", violations as f64, 0.0)
            .with_note(format!("{states} minimisers, min energy - bound = {margin:.6}"))
            .with_time(elapsed(t)),
        ResultRow::at_least(format!("jump_facets[z={z_crack}]"), crack_jumps as f64, 1.0),
    ])
}
