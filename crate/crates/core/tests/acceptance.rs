//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p tovlab-core --test acceptance -- --nocapture` to
//! see the per-criterion lines.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use tovlab_core::catalog::{
    all_entries, entry, independence_gram, pole_adjacent_grid, verification_grid, verify_entry,
    Params, RowId,
};
use tovlab_core::classify::{
    classify, critical_scan, row1_analysis, row2_singularity, row7_roots, standard_domain,
    SweepParameter,
};
use tovlab_core::coupling::{pseudo_limit_check, PressureSolver};
use tovlab_core::extended::{tail_certificate, Side};
use tovlab_core::numerics::{bracket_roots, derivative, Domain, ScalarField, Tolerances};
use tovlab_core::tov::{riccati_coefficients, tov_residual, StellarSystem};

fn tols() -> Tolerances {
    Tolerances::default()
}

/// Criterion 1: every catalog row at the reference parameter sets keeps the
/// h-ODE, linear-part, and continuity residuals below 1e-7 relative on a
/// 200-point grid avoiding singularities; under 10 s total.
#[test]
fn criterion_1_catalog_verification() {
    let t0 = Instant::now();
    let tol = tols();
    let mut all_pass = true;
    for &(c1, c2) in &[(0.0, 1.0), (7.0, 1.0), (1.0, 1.0), (5.0, 1.0)] {
        let params = Params::new(c1, c2);
        for e in all_entries() {
            let grid = verification_grid(&e, params, 200, &tol);
            let rep = verify_entry(&e, params, &grid, &tol).unwrap();
            println!(
                "criterion 1: {} at (c1,c2)=({c1},{c2}): h_ode {:.2e}, lambda0 {:.2e}, continuity {:.2e} -> {}",
                e.row(),
                rep.max_h_ode,
                rep.max_lambda0,
                rep.max_continuity,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            if !rep.pass {
                all_pass = false;
                for d in &rep.diagnostics {
                    println!(
                        "criterion 1:   diagnostic {:?} at r = {:.6}: {:.3e} (candidate transcription defect)",
                        d.kind, d.radius, d.normalized_residual
                    );
                }
            }
        }
    }
    let elapsed = t0.elapsed();
    println!("criterion 1: runtime {:.2?} (< 10 s required)", elapsed);
    assert!(all_pass, "criterion 1 FAIL: some row exceeded 1e-7 relative residuals");
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 1 FAIL: runtime {elapsed:.2?}");
    println!("criterion 1: PASS");
}

/// Criterion 2: the split-route Λ₁ of row 1 equals the printed closed form
/// -c₂²(5πr² - c₁)/(2πr⁶(c₁ - πr²)⁴) to 1e-10 relative on 50 radii, and
/// |Λ₁(10³)| < 1e-12.
#[test]
fn criterion_2_row1_lambda1_closed_form() {
    let tol = tols();
    let (c1, c2) = (7.0, 1.0);
    let e = entry(RowId::Table(1)).unwrap();
    let params = Params::new(c1, c2);
    let split = e.split(params, &tol).unwrap();
    let mass = e.mass_closed(params, &tol).unwrap();
    let closed = |r: f64| {
        -c2 * c2 * (5.0 * PI * r * r - c1) / (2.0 * PI * r.powi(6) * (c1 - PI * r * r).powi(4))
    };
    let r0 = (c1 / PI).sqrt();
    let mut worst = 0.0f64;
    for k in 0..50 {
        let r = (r0 + 0.1) * (1000.0 / (r0 + 0.1)).powf(k as f64 / 49.0);
        let (m, mp) = mass.eval(r, &tol).unwrap();
        let via_split = split.lambda1(m, mp, r, &tol).unwrap();
        let cf = closed(r);
        let rel = (via_split - cf).abs() / cf.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        assert!(rel < 1e-10, "criterion 2 FAIL: rel {rel:.3e} at r = {r}");
    }
    let tail = closed(1e3).abs();
    println!(
        "criterion 2: worst relative deviation {:.2e} over 50 radii; |Lambda1(1e3)| = {:.2e}"
        , worst, tail
    );
    assert!(tail < 1e-12, "criterion 2 FAIL: |Lambda1(1e3)| = {tail:.3e}");
    println!("criterion 2: PASS");
}

/// Criterion 3: row 1 at (c₁, c₂) = (7, 1) classifies into singularities
/// {0, 1.4927 ± 1e-6}, one cavity at 0.6676 ± 1e-6, pattern X|O|X, with
/// ρ'(cavity) > 0; under 1 s.
#[test]
fn criterion_3_row1_classification() {
    let t0 = Instant::now();
    let tol = tols();
    let e = entry(RowId::Table(1)).unwrap();
    let params = Params::new(7.0, 1.0);
    let rep = classify(&e, params, &standard_domain(&e, params, &tol), &tol).unwrap();
    println!(
        "criterion 3: singularities {:?}, cavities {:?}, pattern {}",
        rep.singularities,
        rep.cavities.iter().map(|c| c.radius).collect::<Vec<_>>(),
        rep.pattern
    );
    assert_eq!(rep.singularities.len(), 2, "criterion 3 FAIL: singularity count");
    assert!(rep.singularities[0].abs() <= 1e-12);
    assert!((rep.singularities[1] - 1.4927053303604616).abs() < 1e-6);
    assert_eq!(rep.cavities.len(), 1, "criterion 3 FAIL: cavity count");
    assert!((rep.cavities[0].radius - 0.66755811781245454).abs() < 1e-6);
    assert_eq!(rep.pattern, "X|O|X", "criterion 3 FAIL: pattern {}", rep.pattern);
    let analysis = row1_analysis(params, &tol);
    let slope = analysis.rho_prime_at_cavity.unwrap();
    assert!(slope > 0.0, "criterion 3 FAIL: rho'(cavity) = {slope}");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 3 FAIL: runtime {elapsed:.2?}");
    println!("criterion 3: PASS ({elapsed:.2?})");
}

/// Criterion 4: row 2 has exactly one singularity root r* > 1 for ten c₁
/// values across [-5, 20], and the c₁ = πr₀² + π log(r₀² - 1) inversion
/// round-trips to 1e-9 for r₀ ∈ {1.5, 2, 3, 5}.
#[test]
fn criterion_4_row2_uniqueness_and_round_trip() {
    let tol = tols();
    for k in 0..10 {
        let c1 = -5.0 + 25.0 * (k as f64) / 9.0;
        let r = row2_singularity(c1, &tol).unwrap();
        assert!(r > 1.0, "criterion 4 FAIL: root {r} <= 1 at c1 = {c1}");
        // independent count: exactly one sign change of Y on (1, 40)
        let y = move |x: f64| -c1 + PI * x * x + PI * (x * x - 1.0).ln();
        let roots = bracket_roots(&y, 1.0 + 1e-9, 40.0, 8000, tol.root_tol);
        assert_eq!(roots.len(), 1, "criterion 4 FAIL: {} roots at c1 = {c1}", roots.len());
        println!("criterion 4: c1 = {c1:+.3}: unique r* = {r:.9}");
    }
    for &r0 in &[1.5, 2.0, 3.0, 5.0] {
        let c1 = PI * r0 * r0 + PI * (r0 * r0 - 1.0f64).ln();
        let r = row2_singularity(c1, &tol).unwrap();
        assert!(
            (r - r0).abs() < 1e-9,
            "criterion 4 FAIL: round trip r0 = {r0} -> {r}"
        );
    }
    println!("criterion 4: PASS");
}

/// Criterion 5: the cubic denominator roots match the printed numerics at
/// c₁ = 5 to 0.01, the Vieta identities hold to 1e-12, and the critical scan
/// over c₁ ∈ (1, 5) finds exactly one change point within 0.01 of
/// (81π/12)^(1/3) ≈ 2.768.
#[test]
fn criterion_5_cubic_roots_and_critical_value() {
    let tol = tols();
    let (r1, r2, r3) = row7_roots(5.0);
    println!("criterion 5: roots at c1=5: {r1}, {r2}, {r3}");
    assert!((r1.re - 1.15).abs() < 0.01 && r1.im.abs() < 1e-12);
    assert!((r2.re + 1.35).abs() < 0.01 && r2.im.abs() < 1e-12);
    assert!((r3.re - 0.21).abs() < 0.01 && r3.im.abs() < 1e-12);
    for &c1 in &[0.5, 1.0, 2.0, 2.768, 3.5, 5.0] {
        let (a, b, c) = row7_roots(c1);
        let sum = a + b + c;
        let prod = a * b * c;
        let pair = a * b + a * c + b * c;
        assert!(sum.norm() < 1e-12, "criterion 5 FAIL: Vieta sum at c1 = {c1}");
        assert!((prod.re + 1.0 / PI).abs() < 1e-12 && prod.im.abs() < 1e-12);
        assert!((pair.re + c1 / PI).abs() < 1e-12 && pair.im.abs() < 1e-12);
    }
    // the scan detects the discriminant zero of 81π - 12c₁³
    let e = entry(RowId::Table(4)).unwrap();
    let scan = critical_scan(&e, SweepParameter::C1, 1.0, (1.0, 5.0), 64, &tol).unwrap();
    println!(
        "criterion 5: change points {:?}",
        scan.change_points.iter().map(|c| c.refined).collect::<Vec<_>>()
    );
    assert_eq!(scan.change_points.len(), 1, "criterion 5 FAIL: change-point count");
    let c_star = (81.0 * PI / 12.0).powf(1.0 / 3.0);
    let refined = scan.change_points[0].refined;
    assert!(
        (refined - c_star).abs() < 0.01,
        "criterion 5 FAIL: refined {refined} vs {c_star}"
    );
    println!("criterion 5: PASS (refined {refined:.6} vs (81pi/12)^(1/3) = {c_star:.6})");
}

/// Criterion 6: the row-2 scan at c₂ = 1 over c₁ ∈ (1, 5) with 64 steps finds
/// the two cavity-count changes within ±0.1 of 1.7 and 4.6.
#[test]
fn criterion_6_row2_critical_scan() {
    let tol = tols();
    let e = entry(RowId::Table(2)).unwrap();
    let scan = critical_scan(&e, SweepParameter::C1, 1.0, (1.0, 5.0), 64, &tol).unwrap();
    let refined: Vec<f64> = scan.change_points.iter().map(|c| c.refined).collect();
    println!("criterion 6: change points {refined:?}");
    assert_eq!(refined.len(), 2, "criterion 6 FAIL: expected two change points");
    assert!((refined[0] - 1.7).abs() <= 0.1, "criterion 6 FAIL: first {:.4}", refined[0]);
    assert!((refined[1] - 4.6).abs() <= 0.1, "criterion 6 FAIL: second {:.4}", refined[1]);
    // cross-check: the cavity enters/exits through the boundary r = 1 exactly
    // where the numerator vanishes at r = 1, i.e. (c₁ - π)² = 2c₂
    let exact = [PI - 2.0f64.sqrt(), PI + 2.0f64.sqrt()];
    assert!((refined[0] - exact[0]).abs() < 5e-3);
    assert!((refined[1] - exact[1]).abs() < 5e-3);
    println!(
        "criterion 6: PASS ({:.5}/{:.5} vs boundary-exit values {:.5}/{:.5})",
        refined[0], refined[1], exact[0], exact[1]
    );
}

/// Criterion 7: the explicit pressure solution reproduces the constant-density
/// interior solution (full TOV residual < 1e-7 on (0.05R, 0.95R) against the
/// closed-form oracle) and satisfies the modified Riccati equation for row 1
/// to 1e-6 away from singularities; under 5 s.
#[test]
fn criterion_7_pressure_solver() {
    let t0 = Instant::now();
    let tol = tols();

    // constant density: oracle p = c(y - y_R)/(3y_R - y), y = sqrt(1 - 8πcr²/3)
    let c = 1e-3;
    let big_r = 1.0;
    let e = entry(RowId::Constant).unwrap();
    let params = Params::new(c, 0.0);
    let mass = e.mass_closed(params, &tol).unwrap();
    let h = e.pressure_h(params, &tol);
    let y = move |r: f64| (1.0 - 8.0 * PI * c * r * r / 3.0).sqrt();
    let y_r = y(big_r);
    let oracle = move |r: f64| c * (y(r) - y_r) / (3.0 * y_r - y(r));
    let base = 0.5;
    let c0 = 1.0 / (oracle(base) - h.eval_raw(base) / 2.0);
    let solver = PressureSolver::build(
        &mass, &h, c0, base, 0.04 * big_r, 0.96 * big_r, 2048, &tol,
    )
    .unwrap();
    let p_field = Arc::new(solver).pressure_field("p[constant]");
    let system = StellarSystem {
        pressure: p_field.clone(),
        density: ScalarField::new("rho", Domain::unbounded(0.0), move |_| c),
        mass: mass.clone(),
    };
    let mut worst_tov = 0.0f64;
    let mut worst_gap = 0.0f64;
    for k in 0..50 {
        let r = 0.05 * big_r + 0.9 * big_r * (k as f64) / 49.0;
        let res = tov_residual(&system, r, &tol).unwrap();
        worst_tov = worst_tov.max(res.abs());
        worst_gap = worst_gap.max((p_field.eval_raw(r) - oracle(r)).abs());
    }
    println!(
        "criterion 7: constant density: max |TOV residual| {:.2e}, max |p - oracle| {:.2e}",
        worst_tov, worst_gap
    );
    assert!(worst_tov < 1e-7, "criterion 7 FAIL: TOV residual {worst_tov:.3e}");
    assert!(worst_gap < 1e-9, "criterion 7 FAIL: oracle gap {worst_gap:.3e}");

    // row 1: the same formula solves the modified Riccati p' = Ã + Bp + Cp²
    let e1 = entry(RowId::Table(1)).unwrap();
    let params1 = Params::new(7.0, 1.0);
    let mass1 = e1.mass_closed(params1, &tol).unwrap();
    let h1 = e1.pressure_h(params1, &tol);
    let solver1 =
        Arc::new(PressureSolver::build(&mass1, &h1, 1.0, 2.0, 1.6, 6.0, 16384, &tol).unwrap());
    let p1 = solver1.pressure_field("p[row 1]");
    let mut worst = 0.0f64;
    for k in 0..50 {
        let r = 1.7 + (5.8 - 1.7) * (k as f64) / 49.0;
        let p = p1.eval_raw(r);
        let k_coeffs = riccati_coefficients(&mass1, r, &tol).unwrap();
        let a_mod = tovlab_core::coupling::modified_a(&mass1, &h1, r, &tol).unwrap();
        let p_prime = derivative(&p1, r, &tol).unwrap();
        let res = p_prime - (a_mod + k_coeffs.b * p + k_coeffs.c * p * p);
        worst = worst.max(res.abs());
    }
    println!("criterion 7: row 1 modified-Riccati residual max {:.2e}", worst);
    assert!(worst < 1e-6, "criterion 7 FAIL: modified residual {worst:.3e}");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 7 FAIL: runtime {elapsed:.2?}");
    println!("criterion 7: PASS ({elapsed:.2?})");
}

/// Criterion 8: the normalized Gram determinant of the 11 masses on the
/// 16-point pole-adjacent grid exceeds 1e-12, and the scans produce the
/// 1 + 2 + 1 additional configurations (change points) for rows 1, 2, and the
/// cubic-denominator entry.
#[test]
fn criterion_8_independence_and_configuration_count() {
    let tol = tols();
    let params = Params::new(8.0, 1.0);
    let grid = pole_adjacent_grid(params, &tol);
    let entries: Vec<_> = all_entries().into_iter().map(|e| (e, params)).collect();
    let det = independence_gram(&entries, &grid, &tol).unwrap();
    println!("criterion 8: normalized gram det = {det:.3e} on 16-point pole-adjacent grid");
    assert!(det.abs() > 1e-12, "criterion 8 FAIL: det {det:.3e} <= 1e-12");

    let e1 = entry(RowId::Table(1)).unwrap();
    let s1 = critical_scan(&e1, SweepParameter::C1, 1.0, (-2.0, 2.0), 16, &tol).unwrap();
    assert_eq!(s1.change_points.len(), 1, "criterion 8 FAIL: row 1 change points");
    let e2 = entry(RowId::Table(2)).unwrap();
    let s2 = critical_scan(&e2, SweepParameter::C1, 1.0, (1.0, 5.0), 64, &tol).unwrap();
    assert_eq!(s2.change_points.len(), 2, "criterion 8 FAIL: row 2 change points");
    let e4 = entry(RowId::Table(4)).unwrap();
    let s4 = critical_scan(&e4, SweepParameter::C1, 1.0, (1.0, 5.0), 64, &tol).unwrap();
    assert_eq!(s4.change_points.len(), 1, "criterion 8 FAIL: cubic-entry change points");
    println!("criterion 8: PASS (1 + 2 + 1 additional configurations)");
}

/// Criterion 9: every table row's Λ₁ tail converges (no oscillation verdict)
/// with limit 0, stably under 2x refinement.
///
/// The seventh row fails this as printed: its reconstructed mass grows like
/// -r/(3(2π-1)), so Λ₁ tends to the constant 1/(36π(2π-1)) ≈ 1.6736e-3 for
/// every (c₁, c₂) — a converging but nonzero limit. The failure below is the
/// honest outcome; the printed closed-form asymptote is asserted alongside it
/// so the defect is pinned down, not merely observed.
#[test]
fn criterion_9_tail_certificates() {
    let tol = tols();
    let params = Params::new(1.0, 1.0);
    let ladder: Vec<f64> = (0..12)
        .map(|k| 1e3 * 10f64.powf(3.0 * (k as f64) / 11.0))
        .collect();
    let mut failures = Vec::new();
    for i in 1..=10u8 {
        let e = entry(RowId::Table(i)).unwrap();
        let split = e.split(params, &tol).unwrap();
        let rec = Arc::new(e.reconstructed_mass(params, &tol).unwrap());
        let mass = rec.mass_model();
        let report = pseudo_limit_check(&split, &mass, &ladder, &tol);

        let lam1_field = {
            let (rec, split, tol2) = (Arc::clone(&rec), split.clone(), tol);
            ScalarField::new(
                format!("Lambda1[row {i}]"),
                Domain::unbounded(500.0),
                move |r| match (rec.mass_at(r), rec.mass_prime_at(r)) {
                    (Ok(m), Ok(mp)) => split.lambda1(m, mp, r, &tol2).unwrap_or(f64::NAN),
                    _ => f64::NAN,
                },
            )
        };
        let window: Vec<f64> =
            (0..12).map(|k| 1e3 * 10f64.powf(3.0 * (k as f64) / 11.0)).collect();
        let window2: Vec<f64> =
            (0..24).map(|k| 1e3 * 10f64.powf(3.0 * (k as f64) / 23.0)).collect();
        let cert = tail_certificate(&lam1_field, Side::PlusInfinity, &window, &tol);
        let cert2 = tail_certificate(&lam1_field, Side::PlusInfinity, &window2, &tol);
        println!(
            "criterion 9: row {i}: limit {:?}, oscillation {}, sign {:?}, monotone {:?} -> {}",
            cert.limit_estimate,
            cert.oscillation,
            cert.sign_pattern,
            cert.monotone_pattern,
            if !cert.oscillation && cert.limit_is_zero { "PASS" } else { "FAIL" }
        );
        // refinement stability of the certificate verdicts
        assert_eq!(cert.oscillation, cert2.oscillation, "row {i} refinement instability");
        assert_eq!(cert.limit_is_zero, cert2.limit_is_zero, "row {i} refinement instability");
        assert_eq!(cert.sign_pattern, cert2.sign_pattern, "row {i} refinement instability");
        if cert.oscillation || !cert.limit_is_zero || !report.passes {
            failures.push((i, cert.limit_estimate));
        }
    }
    if !failures.is_empty() {
        // pin the known defect exactly: the seventh row's limit must equal the
        // closed-form asymptote of M M'/(2πr³h) for M ~ -r/(3(2π-1))
        for &(i, limit) in &failures {
            if i == 7 {
                let asymptote = 1.0 / (36.0 * PI * (2.0 * PI - 1.0));
                let l = limit.expect("row 7 tail converges");
                assert!(
                    (l - asymptote).abs() < 1e-6,
                    "row 7 limit {l} does not match the closed-form asymptote {asymptote}"
                );
                println!(
                    "criterion 9: row 7 limit {l:.6e} equals 1/(36 pi (2 pi - 1)) = {asymptote:.6e}, not 0"
                );
            }
        }
        panic!(
            "criterion 9 FAIL: rows {:?} do not satisfy the zero-limit tail condition \
             (row 7's nonzero limit is structural: its reconstructed mass grows linearly, \
             so Lambda1 -> 1/(36 pi (2 pi - 1)) for every (c1, c2))",
            failures.iter().map(|f| f.0).collect::<Vec<_>>()
        );
    }
    println!("criterion 9: PASS");
}
