//! Minimization of the Rayleigh quotient
//! `F_{Λ,p}[w] = (‖∂_t w‖² + ‖∇_θ w‖² + Λ‖w‖²) / ‖w‖²_{L^p}` on a [`Grid`].
//!
//! The discrete quotient uses second-order differences in `t` with zero
//! boundary rows and the exact harmonic-space angular Laplacian. Descent is a
//! projected gradient method in the discrete `H¹` metric: the preconditioner
//! `L = -D² + Λ - Δ_θ` is tridiagonal in `t` per harmonic, so each step costs
//! two angular transforms and one banded solve per mode.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, SphereRule};
use crate::params::CylParams;
use crate::quad::{decay_half_width, integrate, QuadOptions};
use crate::radial::{inv_c_star_closed, RadialProfile};
use crate::tridiag::{SpdFactor, SymTridiag};

/// Discrete operator `L = -D² + Λ - Δ_θ` and friends on one grid.
pub(crate) struct Operator {
    pub grid: Arc<Grid>,
    pub lambda: f64,
    factors: Vec<SpdFactor>,
}

impl Operator {
    pub fn new(grid: Arc<Grid>, lambda: f64) -> Result<Self> {
        let h = grid.spacing();
        let m = grid.nt - 2;
        let inv_h2 = 1.0 / (h * h);
        let factors = grid
            .sphere
            .degrees
            .iter()
            .map(|d| {
                let t = SymTridiag::new(vec![2.0 * inv_h2 + lambda + d; m], vec![-inv_h2; m - 1])?;
                SpdFactor::new(&t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Operator { grid, lambda, factors })
    }

    fn sphere(&self) -> &SphereRule {
        &self.grid.sphere
    }

    /// Mode-major coefficients `c[k * nt + i]`.
    pub fn to_modes(&self, values: &[f64]) -> Vec<f64> {
        let (nt, n) = (self.grid.nt, self.grid.nphi());
        let mut modes = vec![0.0; nt * n];
        let mut c = vec![0.0; n];
        for i in 1..nt - 1 {
            self.sphere().analyze(&values[i * n..(i + 1) * n], &mut c);
            for k in 0..n {
                modes[k * nt + i] = c[k];
            }
        }
        modes
    }

    pub fn from_modes(&self, modes: &[f64]) -> Vec<f64> {
        let (nt, n) = (self.grid.nt, self.grid.nphi());
        let mut values = vec![0.0; nt * n];
        let mut c = vec![0.0; n];
        for i in 1..nt - 1 {
            for k in 0..n {
                c[k] = modes[k * nt + i];
            }
            self.sphere().synthesize(&c, &mut values[i * n..(i + 1) * n]);
        }
        values
    }

    /// `⟨w, Lw⟩` from mode coefficients.
    pub fn quadratic_modes(&self, modes: &[f64]) -> f64 {
        let (nt, h) = (self.grid.nt, self.grid.spacing());
        let mut total = 0.0;
        for (k, d) in self.sphere().degrees.iter().enumerate() {
            let c = &modes[k * nt..(k + 1) * nt];
            let mut grad = 0.0;
            let mut mass = 0.0;
            for i in 0..nt - 1 {
                let diff = c[i + 1] - c[i];
                grad += diff * diff;
                mass += c[i] * c[i];
            }
            total += grad / h + (self.lambda + d) * h * mass;
        }
        total
    }

    pub fn quadratic(&self, values: &[f64]) -> f64 {
        self.quadratic_modes(&self.to_modes(values))
    }

    /// `L⁻¹ r` with zero boundary rows.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let nt = self.grid.nt;
        let mut modes = self.to_modes(rhs);
        for (k, f) in self.factors.iter().enumerate() {
            let c = &mut modes[k * nt + 1..(k + 1) * nt - 1];
            if c.iter().any(|&v| v != 0.0) {
                f.solve_in_place(c);
            }
        }
        self.from_modes(&modes)
    }

    /// `-Δ_θ` applied row by row.
    pub fn angular_laplacian(&self, values: &[f64]) -> Vec<f64> {
        let nt = self.grid.nt;
        let mut modes = self.to_modes(values);
        for (k, d) in self.sphere().degrees.iter().enumerate() {
            modes[k * nt..(k + 1) * nt].iter_mut().for_each(|c| *c *= d);
        }
        self.from_modes(&modes)
    }

    /// `h Σ ω u v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.grid.nphi();
        let w = &self.sphere().weights;
        let mut acc = 0.0;
        for (idx, (a, b)) in u.iter().zip(v).enumerate() {
            acc += w[idx % n] * a * b;
        }
        acc * self.grid.spacing()
    }

    pub fn lp_mass(&self, values: &[f64], p: f64) -> f64 {
        let n = self.grid.nphi();
        let w = &self.sphere().weights;
        let mut acc = 0.0;
        for (idx, v) in values.iter().enumerate() {
            if *v != 0.0 {
                acc += w[idx % n] * v.abs().powf(p);
            }
        }
        acc * self.grid.spacing()
    }
}

/// Discrete `F_{Λ,p}[w]` for the parameters attached to `w`.
pub fn energy(w: &Field) -> Result<f64> {
    let op = Operator::new(w.grid.clone(), w.cyl.lambda)?;
    quotient(&op, &w.values, w.cyl.p)
}

fn quotient(op: &Operator, values: &[f64], p: f64) -> Result<f64> {
    let mass = op.lp_mass(values, p);
    if !(mass > 0.0) {
        return Err(Error::domain("energy of the zero field is undefined"));
    }
    let e = op.quadratic(values) / mass.powf(2.0 / p);
    if !e.is_finite() {
        return Err(Error::Numerical(format!("energy evaluated to {e}")));
    }
    Ok(e)
}

/// `‖w - Pw‖ / ‖w‖` with `P` the spherical mean at each `t`.
pub fn angular_deviation(w: &Field) -> f64 {
    let g = &w.grid;
    let s = &g.sphere;
    let mut dev = 0.0;
    let mut total = 0.0;
    for i in 0..g.nt {
        let row = w.row(i);
        let mean = s.mean(row);
        for (v, wt) in row.iter().zip(&s.weights) {
            dev += wt * (v - mean) * (v - mean);
            total += wt * v * v;
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    (dev / total).sqrt()
}

/// Relative residual `‖-Δw + Λw - |w|^{p-2}w‖ / ‖|w|^{p-2}w‖` over interior
/// rows, with fourth-order differences in `t` away from the ends.
pub fn el_residual(w: &Field, c: &CylParams) -> Result<f64> {
    let g = &w.grid;
    let op = Operator::new(g.clone(), c.lambda)?;
    let (nt, n, h) = (g.nt, g.nphi(), g.spacing());
    let ang = op.angular_laplacian(&w.values);
    let v = &w.values;
    let at = |i: usize, j: usize| v[i * n + j];
    let mut res = 0.0;
    let mut scale = 0.0;
    for i in 1..nt - 1 {
        for j in 0..n {
            let d2 = if i >= 2 && i + 2 < nt {
                (-at(i - 2, j) + 16.0 * at(i - 1, j) - 30.0 * at(i, j) + 16.0 * at(i + 1, j) - at(i + 2, j))
                    / (12.0 * h * h)
            } else {
                (at(i - 1, j) - 2.0 * at(i, j) + at(i + 1, j)) / (h * h)
            };
            let u = at(i, j);
            let nl = u.abs().powf(c.p - 2.0) * u;
            let r = -d2 + ang[i * n + j] + c.lambda * u - nl;
            let wt = g.sphere.weights[j];
            res += wt * r * r;
            scale += wt * nl * nl;
        }
    }
    if !(scale > 0.0) {
        return Err(Error::domain("residual of the zero field is undefined"));
    }
    Ok((res / scale).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Relative energy decrease over `window` steps that counts as converged.
    pub energy_tol: f64,
    pub window: usize,
    pub breaking_margin: f64,
    pub recenter: bool,
    /// Replace `w(t)` by `(w(t) + w(-t))/2` after each step.
    pub symmetrize_even: bool,
    pub initial_step: f64,
    pub record_history: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 20_000,
            energy_tol: 1e-12,
            window: 50,
            breaking_margin: 1e-3,
            recenter: true,
            symmetrize_even: false,
            initial_step: 0.5,
            record_history: false,
        }
    }
}

const STEP_MIN: f64 = 1e-3;
const STEP_MAX: f64 = 20.0;
const MAX_HALVINGS: usize = 40;
const RECENTER_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub energy: f64,
    /// Closed-form `(C^{N,*}_{Λ,p})^{-1}`.
    pub radial_energy: f64,
    pub el_residual: f64,
    pub angular_deviation: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stopped because no step size lowered the energy in floating point.
    pub stalled: bool,
    pub broke_symmetry: bool,
    pub breaking_margin: f64,
    /// `(radial_energy - energy) / radial_energy`.
    pub relative_gap: f64,
    /// `‖w - w(-·)‖ / ‖w‖`, diagnosed only.
    pub t_asymmetry: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub report: MinimizeReport,
    /// Final iterate, normalized to unit `L^p` mass.
    pub field: Field,
}

/// Projected `H¹` gradient descent on `‖w‖_{L^p} = 1`.
pub fn minimize(c: &CylParams, init: &Field, opts: &MinimizeOptions) -> Result<Minimized> {
    c.require_open()?;
    if c.p <= 2.0 {
        return Err(Error::domain("minimization needs p > 2"));
    }
    if init.grid.n_dim() != c.n {
        return Err(Error::domain(format!("initial field is for N = {}, parameters for N = {}", init.grid.n_dim(), c.n)));
    }
    if opts.window == 0 || !(opts.initial_step > 0.0) {
        return Err(Error::domain("window and initial step must be positive"));
    }
    if init.values.iter().any(|&v| v < 0.0) {
        log::info!("initial field has negative entries; starting from its positive part");
    }
    let grid = init.grid.clone();
    let op = Operator::new(grid.clone(), c.lambda)?;
    let p = c.p;
    let n = grid.nphi();

    let mut w: Vec<f64> = init.values.iter().map(|v| v.max(0.0)).collect();
    let mass = op.lp_mass(&w, p);
    if !(mass > 0.0) {
        return Err(Error::domain("initial field must have positive L^p norm"));
    }
    normalize(&mut w, mass, p);

    let mut state = State::new(&op, w, p)?;
    let mut history = vec![state.energy];
    let mut tau = opts.initial_step;
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut halvings = 0;
        let trial = loop {
            let mut v: Vec<f64> = state.w.iter().zip(&state.g).map(|(a, b)| (a - tau * b).max(0.0)).collect();
            if opts.symmetrize_even {
                symmetrize(&mut v, grid.nt, n);
            }
            let m = op.lp_mass(&v, p);
            if m > 0.0 && m.is_finite() {
                normalize(&mut v, m, p);
                let e = quotient(&op, &v, p)?;
                if e <= state.energy {
                    break Some(v);
                }
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break None;
            }
            tau *= 0.5;
        };
        let Some(next) = trial else {
            stalled = true;
            break;
        };

        let s: Vec<f64> = next.iter().zip(&state.w).map(|(a, b)| a - b).collect();
        let prev_energy = state.energy;
        let prev_nl = std::mem::take(&mut state.nl);
        state = State::new(&op, next, p)?;

        // BB1 step in the H¹ metric: ⟨s,s⟩_L / ⟨s,Ly⟩ with y = g⁺ - g
        let ss = op.quadratic(&s);
        let cross: Vec<f64> = state.nl.iter().zip(&prev_nl).map(|(a, b)| state.energy * a - prev_energy * b).collect();
        let sy = 2.0 * (ss - op.inner(&s, &cross));
        tau = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX };

        if opts.recenter && iterations % RECENTER_EVERY == 0 {
            if let Some(shifted) = recentered(&state.w, &grid) {
                state = State::new(&op, shifted, p)?;
            }
        }

        history.push(state.energy);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if old - state.energy <= opts.energy_tol * state.energy.abs() {
                converged = true;
                break;
            }
        }
    }
    if stalled {
        log::debug!("descent stalled at energy {} after {iterations} iterations", state.energy);
        converged = true;
    }
    if !converged {
        log::warn!("minimize hit max_iter = {} without meeting the energy tolerance", opts.max_iter);
    }

    let field = Field::new(grid.clone(), *c, state.w)?;
    let e = state.energy;
    let rescaled = field.scaled(e.powf(1.0 / (p - 2.0)));
    let radial_energy = inv_c_star_closed(c)?;
    let relative_gap = (radial_energy - e) / radial_energy;
    let report = MinimizeReport {
        energy: e,
        radial_energy,
        el_residual: el_residual(&rescaled, c)?,
        angular_deviation: angular_deviation(&field),
        iterations,
        converged,
        stalled,
        broke_symmetry: radial_energy - e > opts.breaking_margin * radial_energy,
        breaking_margin: opts.breaking_margin,
        relative_gap,
        t_asymmetry: t_asymmetry(&field),
        history: if opts.record_history { history } else { Vec::new() },
    };
    Ok(Minimized { report, field })
}

/// One iterate with `P(w) = 1` and its `H¹` gradient.
struct State {
    w: Vec<f64>,
    energy: f64,
    /// `w^{p-1}`.
    nl: Vec<f64>,
    /// `2(w - F L⁻¹ w^{p-1})`.
    g: Vec<f64>,
}

impl State {
    fn new(op: &Operator, w: Vec<f64>, p: f64) -> Result<Self> {
        let energy = quotient(op, &w, p)?;
        let nl: Vec<f64> = w.iter().map(|&v| if v > 0.0 { v.powf(p - 1.0) } else { 0.0 }).collect();
        let r = op.solve(&nl);
        let g = w.iter().zip(&r).map(|(a, b)| 2.0 * (a - energy * b)).collect();
        Ok(State { w, energy, nl, g })
    }
}

fn normalize(w: &mut [f64], mass: f64, p: f64) {
    let s = mass.powf(-1.0 / p);
    w.iter_mut().for_each(|v| *v *= s);
}

fn symmetrize(w: &mut [f64], nt: usize, n: usize) {
    for i in 0..nt / 2 {
        let k = nt - 1 - i;
        for j in 0..n {
            let avg = 0.5 * (w[i * n + j] + w[k * n + j]);
            w[i * n + j] = avg;
            w[k * n + j] = avg;
        }
    }
}

/// Shifts rows so the spherical mass peak sits on the middle row.
fn recentered(w: &[f64], grid: &Grid) -> Option<Vec<f64>> {
    let (nt, n) = (grid.nt, grid.nphi());
    let weights = &grid.sphere.weights;
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..nt {
        let m: f64 = w[i * n..(i + 1) * n].iter().zip(weights).map(|(v, wt)| v * wt).sum();
        if m > best.1 {
            best = (i, m);
        }
    }
    let offset = best.0 as isize - (nt / 2) as isize;
    if offset.abs() < 2 {
        return None;
    }
    let mut out = vec![0.0; w.len()];
    for i in 1..nt - 1 {
        let src = i as isize + offset;
        if src >= 1 && src < nt as isize - 1 {
            let src = src as usize;
            out[i * n..(i + 1) * n].copy_from_slice(&w[src * n..(src + 1) * n]);
        }
    }
    Some(out)
}

fn t_asymmetry(w: &Field) -> f64 {
    let (nt, n) = (w.grid.nt, w.grid.nphi());
    let weights = &w.grid.sphere.weights;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..nt {
        let k = nt - 1 - i;
        for j in 0..n {
            let a = w.values[i * n + j];
            let d = a - w.values[k * n + j];
            num += weights[j] * d * d;
            den += weights[j] * a * a;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// A zonal field `w(t, φ)` known in closed form together with its partials.
pub trait ZonalField {
    fn value(&self, t: f64, phi: f64) -> f64;
    fn d_t(&self, t: f64, phi: f64) -> f64;
    fn d_phi(&self, t: f64, phi: f64) -> f64;
}

impl ZonalField for RadialProfile {
    fn value(&self, t: f64, _phi: f64) -> f64 {
        RadialProfile::value(self, t)
    }
    fn d_t(&self, t: f64, _phi: f64) -> f64 {
        self.derivative(t)
    }
    fn d_phi(&self, _t: f64, _phi: f64) -> f64 {
        0.0
    }
}

/// `e^{-t²}(1 + c·cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDipole {
    pub dipole: f64,
}

impl Default for GaussianDipole {
    fn default() -> Self {
        GaussianDipole { dipole: 0.5 }
    }
}

impl ZonalField for GaussianDipole {
    fn value(&self, t: f64, phi: f64) -> f64 {
        (-t * t).exp() * (1.0 + self.dipole * phi.cos())
    }
    fn d_t(&self, t: f64, phi: f64) -> f64 {
        -2.0 * t * self.value(t, phi)
    }
    fn d_phi(&self, t: f64, phi: f64) -> f64 {
        -self.dipole * (-t * t).exp() * phi.sin()
    }
}

/// The four integrals entering `F_{Λ,p}` for `w_σ(t, θ) = w(σt, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientIntegrals {
    pub grad_t: f64,
    pub grad_theta: f64,
    pub l2: f64,
    pub lp: f64,
}

impl QuotientIntegrals {
    pub fn quotient(&self, lambda: f64, p: f64) -> f64 {
        (self.grad_t + self.grad_theta + lambda * self.l2) / self.lp.powf(2.0 / p)
    }
}

const SCALING_NPHI: usize = 64;

pub fn quotient_integrals<W: ZonalField>(w: &W, n_dim: u32, p: f64, sigma: f64) -> Result<QuotientIntegrals> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("σ = {sigma} must be positive")));
    }
    let s = SphereRule::new(n_dim, SCALING_NPHI)?;
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-14, ..QuadOptions::default() };
    let sphere = |f: &dyn Fn(f64) -> f64| -> f64 { s.angles.iter().zip(&s.weights).map(|(a, wt)| wt * f(*a)).sum() };
    let mass = |t: f64| sphere(&|phi| w.value(sigma * t, phi).powi(2));
    let half = decay_half_width(&mass, 0.0, 1.0, 1e-20)?;
    let line = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        Ok(integrate(f, -half, 0.0, opts)?.value + integrate(f, 0.0, half, opts)?.value)
    };
    let grad_t = line(&|t| sphere(&|phi| (sigma * w.d_t(sigma * t, phi)).powi(2)))?;
    let grad_theta = line(&|t| sphere(&|phi| w.d_phi(sigma * t, phi).powi(2)))?;
    let l2 = line(&|t| sphere(&|phi| w.value(sigma * t, phi).powi(2)))?;
    let lp = line(&|t| sphere(&|phi| w.value(sigma * t, phi).abs().powf(p)))?;
    Ok(QuotientIntegrals { grad_t, grad_theta, l2, lp })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub sigma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of
/// `F_{σ²Λ,p}(w_σ) = σ^{1+2/p} F_{Λ,p}(w) - σ^{-1+2/p}(σ²-1) ∫|∇_θ w|² / (∫|w|^p)^{2/p}`
/// with every integral evaluated independently.
pub fn scaling_check<W: ZonalField>(w: &W, sigma: f64, c: &CylParams) -> Result<ScalingCheck> {
    let p = c.p;
    let base = quotient_integrals(w, c.n, p, 1.0)?;
    let scaled = quotient_integrals(w, c.n, p, sigma)?;
    let lhs = scaled.quotient(sigma * sigma * c.lambda, p);
    let rhs = sigma.powf(1.0 + 2.0 / p) * base.quotient(c.lambda, p)
        - sigma.powf(-1.0 + 2.0 / p) * (sigma * sigma - 1.0) * base.grad_theta / base.lp.powf(2.0 / p);
    Ok(ScalingCheck { sigma, lhs, rhs, residual: (lhs - rhs).abs() })
}
