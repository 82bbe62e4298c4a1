//! Tracing `Λ*(p)`, the largest `Λ` at which the quotient still has a radial
//! minimizer, by bisection on a descent-based breaking probe.
//!
//! The probe starts from `w* + ε ψ₁(t) cos φ` with `‖εψ₁ cos φ‖ = 0.1‖w*‖`
//! and compares the descent limit with the radial minimum of the same
//! discretization. Descent can only exhibit symmetry breaking, never rule out
//! a lower non-radial minimizer elsewhere, so `lambda_star_num` is an upper
//! bound estimate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridSpec, DECAY_MARGIN, REFERENCE_NPHI, REFERENCE_NT};
use crate::params::{critical_a, critical_exponent, fs_lambda, CylParams};
use crate::solver::{minimize, MinimizeOptions};
use crate::spectral::{poschl_teller_ground, psi1, LineGrid, ModeProblem};

/// Resolution shared by every probe of a scan; `T = decay_margin/√Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub decay_margin: f64,
    pub nt: usize,
    pub nphi: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { decay_margin: DECAY_MARGIN, nt: REFERENCE_NT, nphi: REFERENCE_NPHI }
    }
}

impl Resolution {
    pub fn grid(&self, n_dim: u32, lambda: f64) -> Result<Grid> {
        if self.decay_margin < DECAY_MARGIN * (1.0 - 1e-12) {
            return Err(Error::domain(format!("decay margin {} below {DECAY_MARGIN}", self.decay_margin)));
        }
        Grid::new(n_dim, self.decay_margin / lambda.sqrt(), self.nt, self.nphi)
    }

    pub fn refined(&self) -> Resolution {
        Resolution { nt: 2 * self.nt - 1, nphi: 2 * self.nphi, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub resolution: Resolution,
    pub minimize: MinimizeOptions,
    /// `‖ε ψ₁-mode‖ / ‖w*‖`.
    pub perturbation: f64,
    /// Relative energy drop below the discrete radial minimum that counts as
    /// breaking.
    pub margin: f64,
    /// Retry once on a refined grid when a run does not converge.
    pub refine: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            resolution: Resolution::default(),
            minimize: MinimizeOptions::default(),
            perturbation: 0.1,
            margin: 1e-7,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Broken,
    Radial,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingOutcome {
    pub lambda: f64,
    pub verdict: Verdict,
    /// `(radial_energy - energy)/radial_energy` against the closed form.
    pub margin: f64,
    /// Same gap against the discrete radial minimum; decides the verdict.
    pub discrete_margin: f64,
    pub energy: f64,
    pub radial_energy: f64,
    pub radial_energy_discrete: f64,
    pub angular_deviation: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grid: GridSpec,
    pub refined: bool,
}

impl BreakingOutcome {
    pub fn broken(&self) -> Option<bool> {
        match self.verdict {
            Verdict::Broken => Some(true),
            Verdict::Radial => Some(false),
            Verdict::Indeterminate => None,
        }
    }
}

/// `w* + ε ψ₁(t) cos φ` with `‖ε ψ₁ cos φ‖ = amplitude·‖w*‖` on the grid.
pub fn probe_field(c: &CylParams, grid: Arc<Grid>, amplitude: f64) -> Result<Field> {
    let w = Field::radial_extremal(grid.clone(), *c)?;
    let mode = Field::k1_mode(grid, *c, |t| psi1(c, t))?;
    let eps = amplitude * w.l2_norm() / mode.l2_norm();
    w.axpy(eps, &mode)
}

/// Runs the breaking probe at `c`.
pub fn detect_breaking(c: &CylParams, cfg: &ProbeConfig) -> Result<BreakingOutcome> {
    let first = probe_once(c, cfg, &cfg.resolution, false)?;
    if first.converged || !cfg.refine {
        return Ok(first);
    }
    log::info!("probe at Λ = {} did not converge; refining the grid", c.lambda);
    probe_once(c, cfg, &cfg.resolution.refined(), true)
}

fn probe_once(c: &CylParams, cfg: &ProbeConfig, res: &Resolution, refined: bool) -> Result<BreakingOutcome> {
    let grid = Arc::new(res.grid(c.n, c.lambda)?);
    grid.check_decay_margin(c)?;
    let radial_grid = Arc::new(Grid::new(c.n, grid.half_length, grid.nt, 1)?);
    let radial = minimize(c, &Field::radial_extremal(radial_grid, *c)?, &cfg.minimize)?;
    let run = minimize(c, &probe_field(c, grid.clone(), cfg.perturbation)?, &cfg.minimize)?;
    let r = &run.report;
    let reference = radial.report.energy;
    let discrete_margin = (reference - r.energy) / reference;
    let converged = r.converged && radial.report.converged;
    let verdict = if !converged {
        Verdict::Indeterminate
    } else if discrete_margin > cfg.margin {
        Verdict::Broken
    } else {
        Verdict::Radial
    };
    Ok(BreakingOutcome {
        lambda: c.lambda,
        verdict,
        margin: r.relative_gap,
        discrete_margin,
        energy: r.energy,
        radial_energy: r.radial_energy,
        radial_energy_discrete: reference,
        angular_deviation: r.angular_deviation,
        el_residual: r.el_residual,
        iterations: r.iterations,
        converged,
        grid: grid.spec(),
        refined,
    })
}

/// Zero of `μ¹` in `Λ`, i.e. `4(N-1)/(p²-4)`.
pub fn mu1_threshold(n: u32, p: f64) -> Result<f64> {
    fs_lambda(n, p)
}

/// Sign change of the numerical `μ¹(Λ)` from the Pöschl–Teller solver,
/// bisected inside `bracket` to width `tol`.
pub fn mu1_threshold_numeric(n: u32, p: f64, bracket: (f64, f64), tol: f64, spacing: f64) -> Result<(f64, f64)> {
    let mu = |l: f64| -> Result<f64> {
        let mp = ModeProblem::new(CylParams::new(n, l, p)?, 1)?;
        let half_width = 2.0 * DECAY_MARGIN / (p * l.sqrt());
        let h = spacing.min(0.01 / mp.alpha);
        Ok(poschl_teller_ground(&mp, &LineGrid { half_width, spacing: h })?.mu1)
    };
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::domain(format!("invalid bracket ({lo}, {hi}) or tolerance {tol}")));
    }
    if !(mu(lo)? > 0.0 && mu(hi)? < 0.0) {
        return Err(Error::NonConvergence(format!("μ¹ does not change sign on ({lo}, {hi})")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mu(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub p: f64,
    /// Bracket midpoint; NaN when the point failed.
    pub lambda_star_num: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub bracket_width: f64,
    pub lambda_fs: f64,
    pub mu1_zero: f64,
    /// `(N-2)/2 - √Λ*_num`.
    pub a_star_num: f64,
    /// `(N-2)/2 - √Λ^FS`.
    pub a_fs: f64,
    /// Closed-form margin of the probe at `bracket_hi`.
    pub margin: f64,
    /// Every recorded probe converged.
    pub converged: bool,
    /// No recorded probe contradicts a monotone predicate.
    pub monotone: bool,
    pub status: PointStatus,
    pub message: String,
    pub resolution: Resolution,
    pub trace: Vec<BreakingOutcome>,
}

impl BoundaryPoint {
    /// `(Λ*_num - Λ^FS)/Λ^FS`.
    pub fn relative_gap(&self) -> f64 {
        (self.lambda_star_num - self.lambda_fs) / self.lambda_fs
    }

    fn failed(n: u32, p: f64, cfg: &ProbeConfig, msg: String, trace: Vec<BreakingOutcome>) -> Self {
        let lambda_fs = fs_lambda(n, p).unwrap_or(f64::NAN);
        BoundaryPoint {
            p,
            lambda_star_num: f64::NAN,
            bracket_lo: f64::NAN,
            bracket_hi: f64::NAN,
            bracket_width: f64::NAN,
            lambda_fs,
            mu1_zero: lambda_fs,
            a_star_num: f64::NAN,
            a_fs: critical_a(n) - lambda_fs.sqrt(),
            margin: f64::NAN,
            converged: trace.iter().all(|o| o.converged),
            monotone: is_monotone(&trace),
            status: PointStatus::Failed,
            message: msg,
            resolution: cfg.resolution,
            trace,
        }
    }
}

const MAX_WIDENINGS: usize = 8;

/// Bisection for `Λ*(p)` on the breaking predicate.
///
/// The bracket is widened geometrically when its ends disagree with the
/// expected pattern: `lo` is halved while it still breaks, `hi` doubled while
/// it does not, up to `max(4Λ^FS, hi)`.
pub fn lambda_star_estimate(n: u32, p: f64, bracket: (f64, f64), tol: f64, cfg: &ProbeConfig) -> Result<BoundaryPoint> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0) || !(lo < hi) || !hi.is_finite() {
        return Err(Error::domain(format!("bracket ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    if !(p > 2.0 && p < critical_exponent(n)) {
        return Err(Error::domain(format!("p = {p} outside (2, 2*) for N = {n}")));
    }
    let lambda_fs = fs_lambda(n, p)?;
    let cap = (4.0 * lambda_fs).max(hi);
    let mut trace = Vec::new();
    let probe = |l: f64, trace: &mut Vec<BreakingOutcome>| -> Result<bool> {
        let out = detect_breaking(&CylParams::new(n, l, p)?, cfg)?;
        let b = out.broken();
        trace.push(out);
        b.ok_or_else(|| Error::NonConvergence(format!("breaking probe indeterminate at Λ = {l} after refinement")))
    };

    let mut widen = 0;
    while probe(lo, &mut trace)? {
        widen += 1;
        if widen > MAX_WIDENINGS {
            return Err(Error::NonConvergence(format!("symmetry still broken at Λ = {lo}; no radial lower end")));
        }
        hi = lo;
        lo *= 0.5;
    }
    while !probe(hi, &mut trace)? {
        if hi >= cap {
            return Err(Error::NonConvergence(format!(
                "bracket failure: no breaking detected up to Λ = {hi} (4Λ^FS = {}); grid too coarse?",
                4.0 * lambda_fs
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
    let mut hi_margin = trace.last().map(|o| o.margin).unwrap_or(f64::NAN);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut trace)? {
            hi = mid;
            hi_margin = trace.last().map(|o| o.margin).unwrap_or(f64::NAN);
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    Ok(BoundaryPoint {
        p,
        lambda_star_num: mid,
        bracket_lo: lo,
        bracket_hi: hi,
        bracket_width: hi - lo,
        lambda_fs,
        mu1_zero: mu1_threshold(n, p)?,
        a_star_num: critical_a(n) - mid.sqrt(),
        a_fs: critical_a(n) - lambda_fs.sqrt(),
        margin: hi_margin,
        converged: trace.iter().all(|o| o.converged),
        monotone: is_monotone(&trace),
        status: PointStatus::Ok,
        message: String::new(),
        resolution: cfg.resolution,
        trace,
    })
}

/// True when no radial verdict sits above a broken one in `Λ`.
pub fn is_monotone(trace: &[BreakingOutcome]) -> bool {
    let max_radial = trace.iter().filter(|o| o.verdict == Verdict::Radial).map(|o| o.lambda).fold(f64::NEG_INFINITY, f64::max);
    let min_broken = trace.iter().filter(|o| o.verdict == Verdict::Broken).map(|o| o.lambda).fold(f64::INFINITY, f64::min);
    max_radial < min_broken
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    #[serde(rename = "N")]
    pub n: u32,
    pub tol: f64,
    pub points: Vec<BoundaryPoint>,
}

/// Default bracket factors around `Λ^FS`.
pub const BRACKET_FACTORS: (f64, f64) = (0.5, 1.5);

/// Runs [`lambda_star_estimate`] for each `p`, one thread per point, and
/// merges in `p` order. Failed points are kept with status `Failed`.
pub fn scan(n: u32, p_grid: &[f64], tol: f64, cfg: &ProbeConfig) -> Result<BoundaryCurve> {
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("p grid must be strictly increasing"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    let points = std::thread::scope(|scope| {
        let handles: Vec<_> = p_grid
            .iter()
            .map(|&p| {
                scope.spawn(move || {
                    let bracket = match fs_lambda(n, p) {
                        Ok(l) => (BRACKET_FACTORS.0 * l, BRACKET_FACTORS.1 * l),
                        Err(e) => return BoundaryPoint::failed(n, p, cfg, e.to_string(), Vec::new()),
                    };
                    match lambda_star_estimate(n, p, bracket, tol, cfg) {
                        Ok(pt) => pt,
                        Err(e) => {
                            log::warn!("scan point p = {p} failed: {e}");
                            BoundaryPoint::failed(n, p, cfg, e.to_string(), Vec::new())
                        }
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .zip(p_grid)
            .map(|(h, &p)| {
                h.join().unwrap_or_else(|_| BoundaryPoint::failed(n, p, cfg, "worker panicked".into(), Vec::new()))
            })
            .collect()
    });
    Ok(BoundaryCurve { n, tol, points })
}
