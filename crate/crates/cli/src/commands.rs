//! Subcommand implementations. Exit codes: 0 success, 1 check failure,
//! 2 usage/config error (mapped in `main`).

use std::sync::Arc;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use tovlab_core::catalog::{
    all_entries, entry, verification_grid, verify_entry, CatalogEntry, Params, RowId,
};
use tovlab_core::classify::{
    classify, refine_change_point, scan_domain, standard_domain, sweep_state, ChangePoint,
    ClassificationReport, CriticalScanResult, SweepParameter, SweepPoint,
};
use tovlab_core::coupling::{modified_a, pseudo_limit_check, PressureSolver, TailReport};
use tovlab_core::extended::{tail_certificate, Certificate, Side};
use tovlab_core::numerics::{derivative, ScalarField};
use tovlab_core::tov::{riccati_coefficients, tov_residual, StellarSystem};

use crate::config::{OutputFormat, RunConfig};
use crate::jobs::parallel_map;
use crate::report::{emit, emit_json, plot_csv};

/// Whether a check-style command found failures (exit 1) or not (exit 0).
pub enum Outcome {
    Ok,
    CheckFailed,
}

/// Parse a row spec: "all", "constant", "sec33" (the cubic-denominator row
/// analyzed in the text, table row 4), or an index 1-10.
pub fn parse_row(s: &str) -> Result<RowId> {
    match s {
        "constant" => Ok(RowId::Constant),
        // the in-text singularity analysis says "row 7" but works with the
        // polynomial 12πr²(πr³ - c₁r + 1)³, which is table row 4's
        // denominator; the alias avoids resolving that silently
        "sec33" => Ok(RowId::Table(4)),
        _ => {
            let i: u8 = s.parse().map_err(|_| anyhow!("unknown row '{s}'"))?;
            match entry(RowId::Table(i)) {
                Ok(_) => Ok(RowId::Table(i)),
                Err(e) => bail!("{e}"),
            }
        }
    }
}

pub fn parse_rows(s: &str) -> Result<Vec<RowId>> {
    if s == "all" {
        return Ok(all_entries().iter().map(|e| e.row()).collect());
    }
    s.split(',').map(|p| parse_row(p.trim())).collect()
}

fn get_entry(row: RowId) -> CatalogEntry {
    entry(row).expect("validated row id")
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn cmd_verify(
    rows: &str,
    params: Params,
    grid_points: usize,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let rows = parse_rows(rows)?;
    let tol = cfg.tolerances;
    let reports: Vec<_> = parallel_map(&rows, cfg.jobs, |&row| {
        let e = get_entry(row);
        let grid = verification_grid(&e, params, grid_points, &tol);
        verify_entry(&e, params, &grid, &tol)
    });
    let mut all_pass = true;
    let mut payload = Vec::new();
    for rep in reports {
        let rep = rep.map_err(|e| anyhow!("verification error: {e}"))?;
        eprintln!(
            "{}: h_ode {:.3e}, lambda0 {:.3e}, continuity {:.3e} -> {}",
            rep.row,
            rep.max_h_ode,
            rep.max_lambda0,
            rep.max_continuity,
            if rep.pass { "pass" } else { "FAIL" }
        );
        if !rep.pass {
            all_pass = false;
            for d in &rep.diagnostics {
                eprintln!(
                    "  {:?} residual {:.3e} at r = {:.8} (candidate transcription defect)",
                    d.kind, d.normalized_residual, d.radius
                );
            }
        }
        payload.push(rep);
    }
    match cfg.output_format {
        OutputFormat::Json => emit_json(cfg.output_path.as_deref(), "verification", &payload)?,
        OutputFormat::Csv => {
            let mut s =
                String::from("row,c1,c2,grid_len,max_h_ode,max_lambda0,max_continuity,pass\n");
            for r in &payload {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.row,
                    r.params.c1,
                    r.params.c2,
                    r.grid_len,
                    r.max_h_ode,
                    r.max_lambda0,
                    r.max_continuity,
                    r.pass
                ));
            }
            emit(cfg.output_path.as_deref(), &s)?;
        }
    }
    Ok(if all_pass { Outcome::Ok } else { Outcome::CheckFailed })
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClassifyPayload {
    report: ClassificationReport,
    note: Option<&'static str>,
}

pub fn cmd_classify(
    row: &str,
    params: Params,
    plot: Option<&std::path::Path>,
    grid_points: usize,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let row_id = parse_row(row)?;
    let e = get_entry(row_id);
    let tol = cfg.tolerances;
    let domain = standard_domain(&e, params, &tol);
    let report = classify(&e, params, &domain, &tol).map_err(|err| anyhow!("{err}"))?;
    let note = (row == "sec33").then_some("sec33 is an alias for table row 4");
    if let Some(path) = plot {
        let iv = domain.intervals()[0];
        let hi = iv.hi.min(cfg.r_max);
        let rho = e.density_field(params, &tol);
        let mut samples = Vec::with_capacity(grid_points);
        for k in 0..grid_points {
            let r = iv.lo + (hi - iv.lo) * (k as f64 + 0.5) / (grid_points as f64);
            samples.push((r, rho.eval_raw(r)));
        }
        std::fs::write(path, plot_csv(&samples, &report.singularities))?;
    }
    emit_json(
        cfg.output_path.as_deref(),
        "classification",
        ClassifyPayload { report, note },
    )?;
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

pub fn cmd_scan(
    row: &str,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    fixed: Params,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let row_id = parse_row(row)?;
    let e = get_entry(row_id);
    let parameter = match param {
        "c1" => SweepParameter::C1,
        "c2" => SweepParameter::C2,
        other => bail!("unknown parameter '{other}'"),
    };
    let fixed_other = match parameter {
        SweepParameter::C1 => fixed.c2,
        SweepParameter::C2 => fixed.c1,
    };
    if !(to > from) {
        bail!("scan range must be increasing");
    }
    if steps < 8 {
        bail!("scan needs at least 8 steps");
    }
    let tol = cfg.tolerances;
    let domain = scan_domain(&e, parameter, fixed_other, (from, to), &tol);
    let values: Vec<f64> = (0..steps)
        .map(|k| from + (to - from) * (k as f64) / (steps as f64 - 1.0))
        .collect();
    let states = parallel_map(&values, cfg.jobs, |&v| {
        sweep_state(&e, parameter.apply(v, fixed_other), &domain, &tol)
    });
    let mut sweep = Vec::with_capacity(steps);
    for (v, st) in values.iter().zip(states) {
        let (n_singular, n_cavity, pattern) = st.map_err(|err| anyhow!("{err}"))?;
        sweep.push(SweepPoint { value: *v, n_singular, n_cavity, pattern });
    }
    let mut pairs = Vec::new();
    for k in 1..sweep.len() {
        let (a, b) = (&sweep[k - 1], &sweep[k]);
        if a.n_singular != b.n_singular || a.n_cavity != b.n_cavity || a.pattern != b.pattern {
            pairs.push((a.value, b.value));
        }
    }
    let refined = parallel_map(&pairs, cfg.jobs, |&(lo, hi)| {
        refine_change_point(&e, parameter, fixed_other, &domain, lo, hi, &tol)
    });
    let mut change_points = Vec::new();
    for (&(lo, hi), r) in pairs.iter().zip(refined) {
        change_points.push(ChangePoint {
            value_lo: lo,
            value_hi: hi,
            refined: r.map_err(|err| anyhow!("{err}"))?,
        });
    }
    let result = CriticalScanResult {
        row: row_id,
        parameter,
        fixed_other,
        sweep,
        change_points,
    };
    for c in &result.change_points {
        eprintln!("change point near {:.6} (bracket {} .. {})", c.refined, c.value_lo, c.value_hi);
    }
    match cfg.output_format {
        OutputFormat::Json => emit_json(cfg.output_path.as_deref(), "critical-scan", &result)?,
        OutputFormat::Csv => {
            let mut s = String::from("value,n_singular,n_cavity,pattern\n");
            for p in &result.sweep {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    p.value, p.n_singular, p.n_cavity, p.pattern
                ));
            }
            for c in &result.change_points {
                s.push_str(&format!("# change_point,{}\n", c.refined));
            }
            emit(cfg.output_path.as_deref(), &s)?;
        }
    }
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// The window between the singular radii adjacent to the base point, capped
/// by the standard domain and `r_max`.
fn singularity_free_window(
    e: &CatalogEntry,
    params: Params,
    base: f64,
    cfg: &RunConfig,
) -> Result<(f64, f64)> {
    let tol = cfg.tolerances;
    let mut lo = e.domain_lo();
    let mut hi = standard_domain(e, params, &tol).intervals()[0].hi.min(cfg.r_max);
    for s in e.singular_radii(params, &tol) {
        if s < base {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
    }
    let pad = |x: f64| 2e-3 * (1.0 + x.abs());
    let (lo, hi) = (lo + pad(lo), hi - pad(hi));
    if !(base > lo && base < hi) {
        bail!(
            "base point {base} is not inside a regular window of {} (found ({lo:.6}, {hi:.6})); \
             set --base-point",
            e.row()
        );
    }
    Ok((lo, hi))
}

/// Shrink a window to where the horizon factor 1 - 2M/r stays clear of zero.
fn horizon_free_window(
    mass: &tovlab_core::tov::MassModel,
    base: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    // stay clear of 1 - 2M/r = 0: the Riccati coefficients and their
    // derivatives blow up there, which both spoils the antiderivative caches
    // and makes residuals meaningless
    let ok = |r: f64| {
        let m = mass.m.eval_raw(r);
        m.is_finite() && (1.0 - 2.0 * m / r) > 0.05
    };
    if !ok(base) {
        bail!("base point {base} sits at or inside the horizon locus");
    }
    let step = (hi - lo) / 2000.0;
    let mut wlo = base;
    while wlo - step > lo && ok(wlo - step) {
        wlo -= step;
    }
    let mut whi = base;
    while whi + step < hi && ok(whi + step) {
        whi += step;
    }
    // inset the usable window so evaluation stays away from the clipped edges
    let inset = 0.02 * (whi - wlo);
    Ok((wlo + inset, whi - inset))
}

#[derive(Serialize)]
struct SolveRow {
    r: f64,
    p: f64,
    riccati_residual: f64,
    tov_residual: Option<f64>,
    flag: &'static str,
}

pub fn cmd_solve(
    row: &str,
    params: Params,
    c0: f64,
    grid_points: usize,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let row_id = parse_row(row)?;
    let e = get_entry(row_id);
    let tol = cfg.tolerances;
    let base = cfg.base_point;
    let (wlo, whi) = singularity_free_window(&e, params, base, cfg)?;
    let mass = e
        .mass_model_cached(params, wlo, whi, 4096, &tol)
        .map_err(|err| anyhow!("{err}"))?;
    let h = e.pressure_h(params, &tol);
    let (lo, hi) = horizon_free_window(&mass, base, wlo, whi)?;
    let solver = Arc::new(
        PressureSolver::build(&mass, &h, c0, base, lo, hi, 16384, &tol)
            .map_err(|err| anyhow!("{err}"))?,
    );
    let poles = solver.poles(1024);
    for &p in &poles {
        eprintln!("pressure pole (denominator zero) at r = {p:.8}");
    }
    let p_field = Arc::clone(&solver).pressure_field("p");
    let rho = e.density_field(params, &tol);
    let system = StellarSystem {
        pressure: p_field.clone(),
        density: rho,
        mass: mass.clone(),
    };
    let mut rows_out = Vec::with_capacity(grid_points);
    let mut max_res = 0.0f64;
    for k in 0..grid_points {
        let r = lo + (hi - lo) * (k as f64 + 0.5) / (grid_points as f64);
        let near_pole = poles.iter().any(|&x| (r - x).abs() <= 1e-2 * (1.0 + x.abs()));
        if near_pole {
            rows_out.push(SolveRow {
                r,
                p: f64::NAN,
                riccati_residual: f64::NAN,
                tov_residual: None,
                flag: "near_singularity",
            });
            continue;
        }
        let p = match solver.pressure(r) {
            Ok(p) => p,
            Err(_) => {
                rows_out.push(SolveRow {
                    r,
                    p: f64::NAN,
                    riccati_residual: f64::NAN,
                    tov_residual: None,
                    flag: "near_singularity",
                });
                continue;
            }
        };
        // residual of the modified Riccati equation p' = Ã + Bp + Cp²
        let res = (|| -> Result<f64, anyhow::Error> {
            let k_c = riccati_coefficients(&mass, r, &tol)?;
            let a_mod = modified_a(&mass, &h, r, &tol)?;
            let dp = derivative(&p_field, r, &tol)?;
            Ok(dp - (a_mod + k_c.b * p + k_c.c * p * p))
        })();
        let res = match res {
            Ok(v) => v,
            Err(_) => {
                rows_out.push(SolveRow {
                    r,
                    p,
                    riccati_residual: f64::NAN,
                    tov_residual: None,
                    flag: "near_singularity",
                });
                continue;
            }
        };
        max_res = max_res.max(res.abs());
        let tov = tov_residual(&system, r, &tol).ok();
        rows_out.push(SolveRow { r, p, riccati_residual: res, tov_residual: tov, flag: "ok" });
    }
    eprintln!(
        "solved on ({lo:.6}, {hi:.6}), base {base}, c0 {c0}; max |modified-Riccati residual| = {max_res:.3e}"
    );
    match cfg.output_format {
        OutputFormat::Csv => {
            let mut s = String::from("r,p,riccati_residual,tov_residual,flag\n");
            for row in &rows_out {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.r,
                    row.p,
                    row.riccati_residual,
                    row.tov_residual.map_or(String::from(""), |v| v.to_string()),
                    row.flag
                ));
            }
            for &p in &poles {
                s.push_str(&format!("# pole,{p}\n"));
            }
            emit(cfg.output_path.as_deref(), &s)?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct SolvePayload {
                row: RowId,
                params: Params,
                c0: f64,
                base: f64,
                bracket: (f64, f64),
                poles: Vec<f64>,
                max_riccati_residual: f64,
                rows: Vec<SolveRow>,
            }
            emit_json(
                cfg.output_path.as_deref(),
                "pressure-solution",
                SolvePayload {
                    row: row_id,
                    params,
                    c0,
                    base,
                    bracket: (lo, hi),
                    poles,
                    max_riccati_residual: max_res,
                    rows: rows_out,
                },
            )?;
        }
    }
    Ok(if max_res <= 10.0 * tol.residual_tol { Outcome::Ok } else { Outcome::CheckFailed })
}

// ---------------------------------------------------------------------------
// tails
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TailPayload {
    row: RowId,
    applicable: bool,
    note: Option<String>,
    report: Option<TailReport>,
    certificate: Option<Certificate>,
}

pub fn cmd_tails(rows: &str, params: Params, cfg: &RunConfig) -> Result<Outcome> {
    let rows = parse_rows(rows)?;
    let tol = cfg.tolerances;
    let ladder: Vec<f64> = (0..12)
        .map(|k| 1e3 * 10f64.powf(3.0 * (k as f64) / 11.0))
        .collect();
    let payloads: Vec<Result<TailPayload>> = parallel_map(&rows, cfg.jobs, |&row| {
        let e = get_entry(row);
        let Some(split) = e.split(params, &tol) else {
            return Ok(TailPayload {
                row,
                applicable: false,
                note: Some(String::from(
                    "constant-density solution: the coupling split is not applicable",
                )),
                report: None,
                certificate: None,
            });
        };
        let rec = Arc::new(e.reconstructed_mass(params, &tol).map_err(|err| anyhow!("{err}"))?);
        let mass = rec.mass_model();
        let report = pseudo_limit_check(&split, &mass, &ladder, &tol);
        let lam1_field = {
            let (rec, split, tol2) = (Arc::clone(&rec), split.clone(), tol);
            ScalarField::new(
                format!("Lambda1[{row}]"),
                tovlab_core::numerics::Domain::unbounded(500.0),
                move |r| match (rec.mass_at(r), rec.mass_prime_at(r)) {
                    (Ok(m), Ok(mp)) => split.lambda1(m, mp, r, &tol2).unwrap_or(f64::NAN),
                    _ => f64::NAN,
                },
            )
        };
        let cert = tail_certificate(&lam1_field, Side::PlusInfinity, &ladder, &tol);
        let note = match cert.limit_estimate {
            Some(l) if l.abs() > tol.residual_tol => Some(format!(
                "tail converges to a nonzero limit {l:.6e}: the pseudo-asymptotic boundary condition fails for this row"
            )),
            _ => None,
        };
        Ok(TailPayload {
            row,
            applicable: true,
            note,
            report: Some(report),
            certificate: Some(cert),
        })
    });
    let mut out = Vec::new();
    for p in payloads {
        let p = p?;
        if let Some(c) = &p.certificate {
            eprintln!(
                "{}: limit {:?}, oscillation {}, sign {:?}, monotone {:?}",
                p.row, c.limit_estimate, c.oscillation, c.sign_pattern, c.monotone_pattern
            );
        } else {
            eprintln!("{}: {}", p.row, p.note.as_deref().unwrap_or(""));
        }
        out.push(p);
    }
    emit_json(cfg.output_path.as_deref(), "tail-certificates", &out)?;
    Ok(Outcome::Ok)
}

// ---------------------------------------------------------------------------
// catalog-dump
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CatalogRowMeta {
    row: RowId,
    index: Option<u8>,
    f_tag: &'static str,
    h: &'static str,
    parameters: Vec<&'static str>,
    domain_lo: f64,
    boundary_singular: bool,
    origin_singular: bool,
    singular_descriptor: &'static str,
}

pub fn cmd_catalog_dump(cfg: &RunConfig) -> Result<Outcome> {
    let rows: Vec<CatalogRowMeta> = all_entries()
        .iter()
        .map(|e| CatalogRowMeta {
            row: e.row(),
            index: e.table_index(),
            f_tag: e.f_spec().tag(),
            h: e.h_text(),
            parameters: if e.table_index().is_some() {
                vec!["c1", "c2"]
            } else {
                vec!["c"]
            },
            domain_lo: e.domain_lo(),
            boundary_singular: e.boundary_singular(),
            origin_singular: e.origin_singular(),
            singular_descriptor: if e.table_index().is_some() {
                "zeros of the h denominator, bracketed and refined at runtime"
            } else {
                "none"
            },
        })
        .collect();
    emit_json(cfg.output_path.as_deref(), "catalog", &rows)?;
    Ok(Outcome::Ok)
}
