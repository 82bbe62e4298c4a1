//! Linearization around `w*`: the quadratic form
//! `Q[ψ] = ‖∇ψ‖² + Λ‖ψ‖² - (p-1)∫ (w*)^{p-2} ψ²`, its reduction to the
//! harmonic sectors and the Pöschl–Teller problem `-f'' - βVf = λf`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::params::CylParams;
use crate::quad::{decay_half_width, integrate, integrate_line, QuadOptions};
use crate::radial::RadialProfile;
use crate::solver::Operator;
use crate::special::ln_cosh;
use crate::tridiag::SymTridiag;

/// Decay margin `(p/2)√Λ·T` of the ground state on the 1D grid.
pub const PT_DECAY_MARGIN: f64 = 25.0;
/// Upper bound on `α·h`.
pub const PT_MAX_ALPHA_H: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeProblem {
    pub cyl: CylParams,
    pub k: u32,
    pub gamma_k: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl ModeProblem {
    pub fn new(cyl: CylParams, k: u32) -> Result<Self> {
        check_open(&cyl)?;
        if k == 0 {
            return Err(Error::domain("harmonic index k must be at least 1"));
        }
        let (l, p) = (cyl.lambda, cyl.p);
        let kf = f64::from(k);
        Ok(ModeProblem {
            cyl,
            k,
            gamma_k: l + kf * (kf + cyl.dim() - 2.0),
            beta: l * p * (p - 1.0) / 2.0,
            alpha: (p - 2.0) * l.sqrt() / 2.0,
        })
    }

    /// `V(t) = cosh(αt)^{-2}`.
    pub fn potential(&self, t: f64) -> f64 {
        (-2.0 * ln_cosh(self.alpha * t)).exp()
    }

    /// `-α²s²` with `s = (-1 + √(1 + 4β/α²))/2`.
    pub fn ground_exact(&self) -> f64 {
        let s = 0.5 * (-1.0 + (1.0 + 4.0 * self.beta / (self.alpha * self.alpha)).sqrt());
        -self.alpha * self.alpha * s * s
    }
}

fn check_open(c: &CylParams) -> Result<()> {
    c.require_open()?;
    if c.p <= 2.0 {
        return Err(Error::domain("the linearized problem needs p > 2"));
    }
    Ok(())
}

/// `μ¹ = N - 1 - (p² - 4)Λ/4`.
pub fn mu1_closed_form(c: &CylParams) -> f64 {
    c.dim() - 1.0 - (c.p * c.p - 4.0) * c.lambda / 4.0
}

/// Whether `Λ > (N-2)²/4`, the range in which the bottom of the `k = 1`
/// spectrum is stated to be `μ¹`.
pub fn mu1_in_stated_regime(c: &CylParams) -> bool {
    let h = (c.dim() - 2.0) / 2.0;
    c.lambda > h * h
}

/// `cosh(αt)^{-p/(p-2)}`, the radial factor of the destabilizing mode.
pub fn psi1(c: &CylParams, t: f64) -> f64 {
    let alpha = (c.p - 2.0) * c.lambda.sqrt() / 2.0;
    (-c.p / (c.p - 2.0) * ln_cosh(alpha * t)).exp()
}

pub fn psi1_derivative(c: &CylParams, t: f64) -> f64 {
    let alpha = (c.p - 2.0) * c.lambda.sqrt() / 2.0;
    -c.p / (c.p - 2.0) * alpha * (alpha * t).tanh() * psi1(c, t)
}

/// Rayleigh quotient of a profile `f` in the sector `k`, by quadrature.
pub fn mode_rayleigh<F, D>(mp: &ModeProblem, f: F, df: D) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let prof = RadialProfile::new(mp.cyl)?;
    let p = mp.cyl.p;
    let opts = QuadOptions::default();
    let scale = 1.0 / mp.alpha.max(1e-3);
    let mass = |t: f64| f(t).powi(2);
    let half = decay_half_width(&mass, 0.0, scale, 1e-18)?;
    let num = integrate(
        |t| {
            let v = f(t);
            df(t).powi(2) + mp.gamma_k * v * v - (p - 1.0) * prof.value(t).powf(p - 2.0) * v * v
        },
        -half,
        half,
        opts,
    )?;
    let den = integrate_line(mass, 0.0, scale, opts)?;
    Ok(num.value / den.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    pub half_width: f64,
    pub spacing: f64,
}

impl LineGrid {
    pub fn nodes(&self) -> usize {
        (2.0 * self.half_width / self.spacing).round() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda0: f64,
    /// Interior nodes of the line grid.
    pub t: Vec<f64>,
    /// Positive ground state with `h Σ f² = 1`.
    pub f: Vec<f64>,
    /// `γ_k + λ₀`; `μ¹` when `k = 1`.
    pub mu1: f64,
    pub grid: LineGrid,
}

/// Ground state of `-f'' - βV f` with Dirichlet ends at `±T`.
pub fn poschl_teller_ground(mp: &ModeProblem, grid: &LineGrid) -> Result<EigenResult> {
    let (t_half, h) = (grid.half_width, grid.spacing);
    if !(t_half > 0.0) || !(h > 0.0) || h >= t_half {
        return Err(Error::domain(format!("invalid line grid T = {t_half}, h = {h}")));
    }
    let decay = mp.cyl.p / 2.0 * mp.cyl.lambda.sqrt() * t_half;
    if decay < PT_DECAY_MARGIN * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "decay margin (p/2)√Λ·T = {decay:.3} below {PT_DECAY_MARGIN}; enlarge T"
        )));
    }
    if mp.alpha * h > PT_MAX_ALPHA_H * (1.0 + 1e-12) {
        return Err(Error::domain(format!("α·h = {:.3e} exceeds {PT_MAX_ALPHA_H}; refine h", mp.alpha * h)));
    }
    let nodes = grid.nodes();
    let h = 2.0 * t_half / (nodes - 1) as f64;
    let m = nodes - 2;
    let inv_h2 = 1.0 / (h * h);
    let t: Vec<f64> = (1..=m).map(|i| -t_half + i as f64 * h).collect();
    let diag = t.iter().map(|&x| 2.0 * inv_h2 - mp.beta * mp.potential(x)).collect();
    let mat = SymTridiag::new(diag, vec![-inv_h2; m - 1])?;
    let lambda0 = mat.eigenvalue(0)?;
    if !(lambda0 < -10.0 * h * h) {
        return Err(Error::NonConvergence(format!(
            "lowest eigenvalue {lambda0:.3e} is not below -10h² = {:.3e}; no bound state resolved",
            -10.0 * h * h
        )));
    }
    let mut f = mat.eigenvector(lambda0, 2)?;
    let sum: f64 = f.iter().sum();
    let norm = sum.signum() / (h * f.iter().map(|v| v * v).sum::<f64>()).sqrt();
    f.iter_mut().for_each(|v| *v *= norm);
    Ok(EigenResult { lambda0, t, f, mu1: mp.gamma_k + lambda0, grid: LineGrid { half_width: t_half, spacing: h } })
}

/// Discrete `Q[ψ]` on a solver grid for a field with zero spherical mean.
pub fn q_form(psi: &Field, c: &CylParams) -> Result<f64> {
    check_open(c)?;
    let g = &psi.grid;
    if g.n_dim() != c.n {
        return Err(Error::domain("field and parameters disagree on N"));
    }
    let s = &g.sphere;
    let mut worst_mean = 0.0f64;
    let mut worst_rms = 0.0f64;
    for i in 0..g.nt {
        let row = psi.row(i);
        let mean: f64 = row.iter().zip(&s.weights).map(|(v, w)| v * w).sum::<f64>() / s.area();
        let ms: f64 = row.iter().zip(&s.weights).map(|(v, w)| v * v * w).sum::<f64>() / s.area();
        worst_mean = worst_mean.max(mean.abs());
        worst_rms = worst_rms.max(ms.sqrt());
    }
    if worst_mean > 1e-8 * worst_rms {
        return Err(Error::domain(format!(
            "ψ must have zero spherical mean; found {worst_mean:.3e} against scale {worst_rms:.3e}"
        )));
    }
    let op = Operator::new(g.clone(), c.lambda)?;
    let prof = RadialProfile::new(*c)?;
    let mut pot = 0.0;
    for i in 1..g.nt - 1 {
        let v = prof.value(g.t(i)).powf(c.p - 2.0);
        for (j, x) in psi.row(i).iter().enumerate() {
            pot += s.weights[j] * v * x * x;
        }
    }
    Ok(op.quadratic(&psi.values) - (c.p - 1.0) * g.spacing() * pot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::fs_lambda;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn cyl(l: f64) -> CylParams {
        CylParams::new(3, l, 3.0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert!((mu1_closed_form(&cyl(1.0)) - 0.75).abs() < 1e-15);
        for n in 2..=6u32 {
            for &p in &[2.3, 3.0, 3.7] {
                if p >= crate::params::critical_exponent(n) {
                    continue;
                }
                let c = CylParams::new(n, fs_lambda(n, p).unwrap(), p).unwrap();
                assert!(mu1_closed_form(&c).abs() < 1e-14);
            }
        }
        let fs = 1.6;
        for k in 1..40 {
            let l = 0.1 * f64::from(k);
            if (l - fs).abs() < 1e-9 {
                continue;
            }
            assert_eq!(mu1_closed_form(&cyl(l)) > 0.0, l < fs);
        }
    }

    #[test]
    fn pt_oracle() {
        let mp = ModeProblem::new(cyl(1.0), 1).unwrap();
        assert_eq!((mp.beta, mp.alpha, mp.gamma_k), (3.0, 0.5, 3.0));
        assert!((mp.ground_exact() + 2.25).abs() < 1e-15);
        assert_eq!(mp.potential(0.0), 1.0);
        assert!(mp.potential(3.0) > 0.0 && mp.potential(3.0) < 1.0);
    }

    #[test]
    fn psi1_shape() {
        let c = cyl(1.7);
        assert_eq!(psi1(&c, 0.0), 1.0);
        let prof = RadialProfile::new(c).unwrap();
        let ratio = |t: f64| psi1(&c, t) / prof.value(t).powf(c.p / 2.0);
        let r0 = ratio(0.0);
        for &t in &[-7.0, -1.0, 0.3, 2.0, 11.0] {
            assert!((ratio(t) / r0 - 1.0).abs() < 1e-10);
        }
        assert!(psi1(&c, 1e4) >= 0.0);
        assert_eq!(psi1(&c, -2.5), psi1(&c, 2.5));
    }

    #[test]
    fn psi1_rayleigh_quotient_is_mu1() {
        for &(n, l, p) in &[(3, 1.0, 3.0), (3, 2.0, 3.0), (4, 0.7, 2.6), (2, 1.5, 5.0)] {
            let c = CylParams::new(n, l, p).unwrap();
            let mp = ModeProblem::new(c, 1).unwrap();
            let r = mode_rayleigh(&mp, |t| psi1(&c, t), |t| psi1_derivative(&c, t)).unwrap();
            assert!((r - mu1_closed_form(&c)).abs() < 1e-9, "{n},{l},{p}: {r}");
        }
    }

    #[test]
    fn ground_state_reference_case() {
        let mp = ModeProblem::new(cyl(1.0), 1).unwrap();
        let res = poschl_teller_ground(&mp, &LineGrid { half_width: 20.0, spacing: 0.01 }).unwrap();
        assert!((res.lambda0 + 2.25).abs() < 1e-3, "{}", res.lambda0);
        assert!((res.mu1 - 0.75).abs() < 1e-3);
        let h = res.grid.spacing;
        assert!((h * res.f.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(res.f.iter().all(|&v| v > 0.0));
        let n = res.f.len();
        let peak = res.f.iter().cloned().fold(0.0, f64::max);
        for i in 0..n / 2 {
            assert!((res.f[i] - res.f[n - 1 - i]).abs() < 1e-8 * peak);
        }
    }

    #[test]
    fn ground_state_second_order() {
        let mp = ModeProblem::new(cyl(1.0), 1).unwrap();
        let err = |h: f64| {
            let r = poschl_teller_ground(&mp, &LineGrid { half_width: 20.0, spacing: h }).unwrap();
            (r.lambda0 + 2.25).abs()
        };
        let ratio = err(0.01) / err(0.005);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn ground_state_grid_checks() {
        let mp = ModeProblem::new(cyl(1.0), 1).unwrap();
        assert!(poschl_teller_ground(&mp, &LineGrid { half_width: 10.0, spacing: 0.01 }).is_err());
        assert!(poschl_teller_ground(&mp, &LineGrid { half_width: 20.0, spacing: 0.1 }).is_err());
        assert!(ModeProblem::new(cyl(1.0), 0).is_err());
    }

    #[test]
    fn numerical_sign_change_brackets_threshold() {
        let mu = |l: f64| {
            let mp = ModeProblem::new(cyl(l), 1).unwrap();
            poschl_teller_ground(&mp, &LineGrid { half_width: 20.0, spacing: 0.01 }).unwrap().mu1
        };
        assert!(mu(1.55) > 0.0 && mu(1.65) < 0.0);
    }

    fn mode_field(c: &CylParams, k: usize) -> Field {
        let g = Arc::new(Grid::reference(c).unwrap());
        let gg = g.clone();
        // k-th polar harmonic, scaled so that k = 1 is cos φ
        let b1 = gg.sphere.basis(1, 0) / gg.sphere.k1_mode[0];
        Field::from_fn(g, *c, |t, j| psi1(c, t) * gg.sphere.basis(k, j) / b1).unwrap()
    }

    #[test]
    fn q_form_on_psi1() {
        let c = cyl(1.0);
        let f = mode_field(&c, 1);
        let q = q_form(&f, &c).unwrap();
        let norm = f.l2_norm_sq();
        assert!(((q / norm) - 0.75).abs() / 0.75 < 1e-3, "{}", q / norm);
        assert!(q_form(&f, &cyl(2.0)).unwrap() < 0.0);
        let q2 = q_form(&mode_field(&c, 2), &c).unwrap();
        let n2 = mode_field(&c, 2).l2_norm_sq();
        assert!(q2 / n2 >= q / norm);
    }

    #[test]
    fn q_form_rejects_nonzero_mean() {
        let c = cyl(1.0);
        let g = Arc::new(Grid::new(3, 25.0, 201, 8).unwrap());
        let f = Field::radial_extremal(g, c).unwrap();
        assert!(matches!(q_form(&f, &c), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn gamma_one(n in 2u32..8, l in 0.05..10.0f64, frac in 0.05..0.95f64) {
            let pc = crate::params::critical_exponent(n);
            let p = if pc.is_finite() { 2.0 + frac * (pc - 2.0) } else { 2.0 + 10.0 * frac };
            let mp = ModeProblem::new(CylParams::new(n, l, p).unwrap(), 1).unwrap();
            prop_assert!((mp.gamma_k - (l + f64::from(n) - 1.0)).abs() < 1e-12);
        }

        #[test]
        fn oracle_matches_ground_state_formula(l in 0.1..5.0f64, p in 2.2..5.5f64) {
            // ground state of the linearization is always -p²Λ/4
            let mp = ModeProblem::new(CylParams::new(3, l, p.min(5.9)).unwrap(), 1).unwrap();
            let expect = -p * p * l / 4.0;
            prop_assert!((mp.ground_exact() - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }
}
