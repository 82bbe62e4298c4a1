//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ckn_core::boundary::{self, ProbeConfig};
use ckn_core::grid::{Field, Grid};
use ckn_core::io;
use ckn_core::params::{
    ckn_from_cyl, critical_a, critical_exponent, cyl_from_ckn, fs_b, fs_lambda, kelvin_dual, CknParams, Region,
};
use ckn_core::radial::{c_p_gamma, c_p_quadrature, inv_c_star_closed, ln_c_p_gamma};
use ckn_core::solver::{self, GaussianDipole, MinimizeOptions};
use ckn_core::spectral::{poschl_teller_ground, LineGrid, ModeProblem};
use ckn_core::CylParams;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cyl(n: u32, lambda: f64, p: f64) -> CylParams {
    CylParams::new(n, lambda, p).expect("valid parameters")
}

fn c_p_identity() -> Outcome {
    let q = c_p_quadrature(4.0).map_err(|e| e.to_string())?;
    let g = c_p_gamma(4.0).map_err(|e| e.to_string())?;
    let (eq, eg) = ((q - 1.0 / 6.0).abs(), (g - 1.0 / 6.0).abs());
    check(eq < 1e-12 && eg < 1e-12, format!("|quad - 1/6| = {eq:.2e}, |gamma - 1/6| = {eg:.2e}"))
}

fn c_p_asymptotics() -> Outcome {
    let p: f64 = 2.001;
    let ln = 2.0 * p / (p - 2.0) * 2f64.ln() + 0.5 * (p - 2.0).ln() + ln_c_p_gamma(p).map_err(|e| e.to_string())?;
    let err = (ln.exp() - (2.0 * PI).sqrt()).abs();
    check(err < 1e-2, format!("|2^(2p/(p-2)) √(p-2) c_p - √(2π)| = {err:.3e} at p = 2.001"))
}

fn poschl_teller() -> Outcome {
    let start = Instant::now();
    let mp = ModeProblem::new(cyl(3, 1.0, 3.0), 1).map_err(|e| e.to_string())?;
    let err = |h: f64| -> Result<f64, String> {
        let r = poschl_teller_ground(&mp, &LineGrid { half_width: 20.0, spacing: h }).map_err(|e| e.to_string())?;
        Ok((r.lambda0 + 2.25).abs())
    };
    let (e1, e2) = (err(0.01)?, err(0.005)?);
    let ratio = e1 / e2;
    let elapsed = start.elapsed();
    check(
        e1 < 1e-3 && (3.5..=4.5).contains(&ratio) && elapsed < Duration::from_secs(5),
        format!("error {e1:.3e} at h = 0.01, halving ratio {ratio:.3}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn spectral_threshold() -> Outcome {
    let closed = boundary::mu1_threshold(3, 3.0).map_err(|e| e.to_string())?;
    let (lo, hi) = boundary::mu1_threshold_numeric(3, 3.0, (1.55, 1.65), 1e-3, 0.01).map_err(|e| e.to_string())?;
    check(
        closed == 1.6 && closed == fs_lambda(3, 3.0).unwrap() && lo >= 1.55 && hi <= 1.65,
        format!("numerical sign change in [{lo:.4}, {hi:.4}] ⊂ [1.55, 1.65], closed-form zero {closed}"),
    )
}

/// `∫ sech^{2k}(u) du = (2k-2)/(2k-1) ∫ sech^{2k-2}(u) du`, starting from 2.
fn sech_power_integral(k: u32) -> f64 {
    (2..=k).fold(2.0, |acc, j| acc * f64::from(2 * j - 2) / f64::from(2 * j - 1))
}

fn radial_constant() -> Outcome {
    let c = cyl(3, 1.0, 3.0);
    // w* = 1.5 sech²(t/2): ∫ w*³ = 1.5³ · 2 ∫ sech⁶
    let lp = 1.5f64.powi(3) * 2.0 * sech_power_integral(3);
    let oracle = (4.0 * PI * lp).powf(1.0 / 3.0);
    let closed = inv_c_star_closed(&c).map_err(|e| e.to_string())?;
    let grid = Arc::new(Grid::reference(&c).map_err(|e| e.to_string())?);
    let w = Field::radial_extremal(grid, c).map_err(|e| e.to_string())?;
    let e = solver::energy(&w).map_err(|e| e.to_string())?;
    let rel = ((e - closed) / closed).abs();
    check(
        (lp - 7.2).abs() < 1e-14 && (closed - oracle).abs() < 1e-12 && rel < 1e-4,
        format!("oracle {oracle:.12}, closed form {closed:.12}, discrete {e:.12} (rel {rel:.2e})"),
    )
}

fn perturbed_minimize(lambda: f64) -> Result<(solver::MinimizeReport, Duration), String> {
    let c = cyl(3, lambda, 3.0);
    let start = Instant::now();
    let grid = Arc::new(Grid::reference(&c).map_err(|e| e.to_string())?);
    let init = boundary::probe_field(&c, grid, 0.1).map_err(|e| e.to_string())?;
    let out = solver::minimize(&c, &init, &MinimizeOptions::default()).map_err(|e| e.to_string())?;
    Ok((out.report, start.elapsed()))
}

fn breaking_above() -> Outcome {
    let (r, t) = perturbed_minimize(3.0)?;
    check(
        r.converged && r.broke_symmetry && r.relative_gap > 1e-3 && r.el_residual < 1e-4 && t < Duration::from_secs(60),
        format!(
            "gap {:.4e}, EL residual {:.2e}, angular deviation {:.3}, {} iterations, {:.1} s",
            r.relative_gap,
            r.el_residual,
            r.angular_deviation,
            r.iterations,
            t.as_secs_f64()
        ),
    )
}

fn symmetry_below() -> Outcome {
    let (r, t) = perturbed_minimize(0.8)?;
    check(
        r.converged && r.angular_deviation < 1e-3 && r.relative_gap.abs() < 1e-3,
        format!("angular deviation {:.2e}, gap {:.2e}, {:.1} s", r.angular_deviation, r.relative_gap, t.as_secs_f64()),
    )
}

fn scaling_identity() -> Outcome {
    let c = cyl(3, 1.0, 3.0);
    let mut worst: f64 = 0.0;
    for sigma in [0.5, 2.0] {
        let r = solver::scaling_check(&GaussianDipole { dipole: 0.5 }, sigma, &c).map_err(|e| e.to_string())?;
        worst = worst.max(r.residual);
    }
    check(worst < 1e-8, format!("max residual {worst:.2e} over σ ∈ {{0.5, 2}}"))
}

fn parameter_algebra() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let strategy = (2u32..8, -6.0f64..0.0, 0.001f64..0.999, -10.0f64..10.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let (n, a, frac, k) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let a = a.min(critical_a(n) - 0.01);
        let q = CknParams { n, a, b: a + frac };
        if q.region() != Region::Interior {
            continue;
        }
        count += 1;
        let c = cyl_from_ckn(&q).map_err(|e| e.to_string())?;
        let back = ckn_from_cyl(&c).map_err(|e| e.to_string())?;
        let c2 = cyl_from_ckn(&back).map_err(|e| e.to_string())?;
        let kq = CknParams { n, a: k, b: k + frac };
        let dd = kelvin_dual(&kelvin_dual(&kq));
        worst = worst
            .max((back.a - q.a).abs())
            .max((back.b - q.b).abs())
            .max((c2.lambda - c.lambda).abs() / c.lambda.max(1.0))
            .max((c2.p - c.p).abs() / c.p)
            .max((dd.a - kq.a).abs() / kq.a.abs().max(1.0))
            .max((dd.b - kq.b).abs() / kq.b.abs().max(1.0));
        if critical_exponent(n).is_finite() && c.p >= critical_exponent(n) {
            return Err(format!("p = {} not below 2* for N = {n}", c.p));
        }
    }
    let mut fs_worst: f64 = 0.0;
    for a in [-0.5, -1.0, -2.0] {
        let b = fs_b(3, a).map_err(|e| e.to_string())?.b;
        let c = cyl_from_ckn(&CknParams { n: 3, a, b }).map_err(|e| e.to_string())?;
        fs_worst = fs_worst.max((fs_lambda(3, c.p).unwrap() - c.lambda).abs());
    }
    check(
        worst <= 1e-14 && fs_worst < 1e-10,
        format!("round trip / involution defect {worst:.2e} on 100 points, FS cross-check {fs_worst:.2e}"),
    )
}

/// Allowance for the discretization shift of the numerical threshold.
const SCAN_SLACK_FRACTION: f64 = 0.02;

fn boundary_scan() -> Outcome {
    let tol = 0.05;
    let start = Instant::now();
    let curve = boundary::scan(3, &[2.5, 3.0, 4.0], tol, &ProbeConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    println!("    p      lambda_star_num  width     lambda_fs  relative_gap");
    let mut ok = elapsed < Duration::from_secs(15 * 60);
    for pt in &curve.points {
        let bound = pt.lambda_fs + tol + SCAN_SLACK_FRACTION * pt.lambda_fs;
        ok &= pt.status == boundary::PointStatus::Ok && pt.lambda_star_num <= bound;
        println!(
            "    {:<6} {:<16.6} {:<9.5} {:<10.6} {:+.4}",
            pt.p,
            pt.lambda_star_num,
            pt.bracket_width,
            pt.lambda_fs,
            pt.relative_gap()
        );
    }
    let table = io::curve_table(&curve).to_string().map_err(|e| e.to_string())?;
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("boundary_gap.csv");
    std::fs::write(&path, table).map_err(|e| e.to_string())?;
    check(ok, format!("3 points in {:.0} s, gap table at {}", elapsed.as_secs_f64(), path.display()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("c_4 identity", c_p_identity),
        ("c_p asymptotics", c_p_asymptotics),
        ("Pöschl–Teller ground state", poschl_teller),
        ("spectral threshold", spectral_threshold),
        ("radial constant", radial_constant),
        ("symmetry breaking above threshold", breaking_above),
        ("symmetry below threshold", symmetry_below),
        ("scaling identity", scaling_identity),
        ("parameter algebra", parameter_algebra),
        ("boundary scan", boundary_scan),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
