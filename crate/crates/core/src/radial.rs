//! Closed-form θ-independent extremals and the optimal constant among
//! radial functions.
//!
//! On the cylinder the radial extremal is
//!
//! ```text
//! w*(t) = (Λp/2)^{1/(p-2)} cosh(½√Λ(p-2) t)^{-2/(p-2)},
//! ```
//!
//! the even positive solution of `-w'' + Λw = w^{p-1}`. Every power with a
//! large exponent is taken in log-domain so that `p` may approach 2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ckn_from_cyl, critical_a, CknParams, CylParams, Region};
use crate::quad::{self, QuadOptions};
use crate::special::{ln_cosh, ln_gamma_ratio_half};

pub use crate::special::sphere_area;

/// Below this distance to 2 the linear-domain quadrature for `c_p` is refused.
pub const CP_QUADRATURE_MIN_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub cyl: CylParams,
    /// `w*(0) = (Λp/2)^{1/(p-2)}`.
    pub amplitude: f64,
    /// `√Λ`: `w*(t) ~ e^{-√Λ|t|}`.
    pub decay_rate: f64,
}

impl RadialProfile {
    pub fn new(cyl: CylParams) -> Result<Self> {
        cyl.require_open()?;
        let amplitude = ((0.5 * cyl.lambda * cyl.p).ln() / (cyl.p - 2.0)).exp();
        Ok(RadialProfile { cyl, amplitude, decay_rate: cyl.lambda.sqrt() })
    }

    /// `½√Λ(p-2)`, the rate inside the hyperbolic cosine.
    pub fn width(&self) -> f64 {
        0.5 * self.decay_rate * (self.cyl.p - 2.0)
    }

    pub fn ln_value(&self, t: f64) -> f64 {
        let p = self.cyl.p;
        (0.5 * self.cyl.lambda * p).ln() / (p - 2.0) - 2.0 / (p - 2.0) * ln_cosh(self.width() * t)
    }

    /// `w*(t)`; underflows gracefully to 0 for large `|t|`.
    pub fn value(&self, t: f64) -> f64 {
        self.ln_value(t).exp()
    }

    /// `w*'(t) = -√Λ tanh(½√Λ(p-2)t) w*(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        -self.decay_rate * (self.width() * t).tanh() * self.value(t)
    }

    /// `Λ w(0)²/2 - w(0)^p/p`, zero for the extremal.
    pub fn pinning_defect(&self) -> f64 {
        let w0 = self.amplitude;
        let p = self.cyl.p;
        0.5 * self.cyl.lambda * w0 * w0 - w0.powf(p) / p
    }
}

/// `w*_{Λ,p}(t)`.
pub fn w_star(c: &CylParams, t: f64) -> Result<f64> {
    Ok(RadialProfile::new(*c)?.value(t))
}

/// `κ* = (N(N-2-2a)²/(N-2(1+a-b)))^{(N-2(1+a-b))/(4(1+a-b))}`.
pub fn kappa_star(q: &CknParams) -> Result<f64> {
    check_interior(q)?;
    let n = f64::from(q.n);
    let s = n - 2.0 - 2.0 * q.a;
    let delta = 1.0 + q.a - q.b;
    let sigma = n - 2.0 * delta;
    Ok(((n * s * s / sigma).ln() * sigma / (4.0 * delta)).exp())
}

fn check_interior(q: &CknParams) -> Result<()> {
    let q = CknParams::new(q.n, q.a, q.b)?;
    if q.region() != Region::Interior {
        return Err(Error::domain(format!("({}, {}) is not an interior point", q.a, q.b)));
    }
    if q.a >= critical_a(q.n) {
        return Err(Error::domain(format!("u* is charted for a < a_c, got a = {}", q.a)));
    }
    Ok(())
}

/// Radial extremal of the weighted inequality,
/// `u*(r) = κ* (1 + r^{2(N-2-2a)(1+a-b)/(N-2(1+a-b))})^{-(N-2(1+a-b))/(2(1+a-b))}`.
pub fn u_star(q: &CknParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("u* needs r > 0, got {r}")));
    }
    let kappa = kappa_star(q)?;
    let n = f64::from(q.n);
    let s = n - 2.0 - 2.0 * q.a;
    let delta = 1.0 + q.a - q.b;
    let sigma = n - 2.0 * delta;
    let inner = 2.0 * s * delta / sigma;
    let outer = -sigma / (2.0 * delta);
    // ln(1 + r^inner) without overflow for large r
    let x = inner * r.ln();
    let ln1p = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    Ok((kappa.ln() + outer * ln1p).exp())
}

/// `r^{(N-2-2a)/2} u*(r)` at `r = e^t`; equals `w*(t)` for the matching `(Λ, p)`.
pub fn emden_fowler_pullback(q: &CknParams, t: f64) -> Result<f64> {
    let s = f64::from(q.n) - 2.0 - 2.0 * q.a;
    Ok((0.5 * s * t).exp() * u_star(q, t.exp())?)
}

fn check_cp(p: f64) -> Result<()> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::domain(format!("c_p needs finite p > 2, got {p}")));
    }
    Ok(())
}

/// `ln c_p` by adaptive quadrature of `∫₀¹ (1 + s^{(p-2)/p})^{-2p/(p-2)} ds`.
///
/// The substitution `s = u^m`, `m = p/(p-2)` turns the integrand into
/// `m u^{m-1} (1+u)^{-2m}`, which is integrated after dividing out its peak.
pub fn ln_c_p_quadrature(p: f64) -> Result<f64> {
    check_cp(p)?;
    if p - 2.0 < CP_QUADRATURE_MIN_GAP {
        return Err(Error::domain(format!(
            "p - 2 = {:e} is below {CP_QUADRATURE_MIN_GAP:e}; use the Gamma-function form",
            p - 2.0
        )));
    }
    let m = p / (p - 2.0);
    let g = |u: f64| {
        if u <= 0.0 {
            if m > 1.0 {
                f64::NEG_INFINITY
            } else {
                m.ln()
            }
        } else {
            m.ln() + (m - 1.0) * u.ln() - 2.0 * m * u.ln_1p()
        }
    };
    let peak = g(((m - 1.0) / (m + 1.0)).max(f64::MIN_POSITIVE));
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 20_000 };
    let r = quad::integrate(|u| (g(u) - peak).exp(), 0.0, 1.0, opts)?;
    Ok(r.value.ln() + peak)
}

/// `c_p` by quadrature; fails for `p - 2 < 1e-3`.
pub fn c_p_quadrature(p: f64) -> Result<f64> {
    Ok(ln_c_p_quadrature(p)?.exp())
}

/// `ln c_p = -(2p/(p-2)) ln 2 + ½ ln π + ln(Γ(x+½)/Γ(x))`, `x = ½ + p/(p-2)`.
///
/// Finite for `p` arbitrarily close to 2; below `p - 2 ≈ 1e-12` the relative
/// precision degrades with the rounding of `p - 2` itself.
pub fn ln_c_p_gamma(p: f64) -> Result<f64> {
    check_cp(p)?;
    let m = p / (p - 2.0);
    Ok(-2.0 * m * std::f64::consts::LN_2 + 0.5 * PI.ln() + ln_gamma_ratio_half(0.5 + m))
}

/// `c_p` from the Gamma form; underflows to 0 once `p - 2 ≲ 4e-3`.
pub fn c_p_gamma(p: f64) -> Result<f64> {
    Ok(ln_c_p_gamma(p)?.exp())
}

/// `2^{2p/(p-2)} √(p-2) c_p`, which tends to `√(2π)` as `p → 2⁺`.
pub fn c_p_normalized(p: f64) -> Result<f64> {
    check_cp(p)?;
    let m = p / (p - 2.0);
    Ok((0.5 * (p - 2.0).ln() + 0.5 * PI.ln() + ln_gamma_ratio_half(0.5 + m)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialConstants {
    /// `(C^{N,*}_{Λ,p})^{-1} = |S^{N-1}|^{1-2/p} ‖w*‖_{L^p(ℝ)}^{p-2}`.
    pub inv_c_star: f64,
    pub lp_norm_1d: f64,
    /// `‖w*‖^p_{L^p(𝒞)}` by quadrature.
    pub lp_mass_cyl: f64,
    /// `4|S^{N-1}|(2Λp)^{p/(p-2)} c_p/(2p√Λ)`.
    pub lp_mass_cyl_closed: f64,
    pub c_p: f64,
    pub kappa_star: f64,
}

impl RadialConstants {
    pub fn lemma_rel_gap(&self) -> f64 {
        (self.lp_mass_cyl - self.lp_mass_cyl_closed).abs() / self.lp_mass_cyl_closed
    }
}

/// `ln ‖w*‖^p_{L^p(𝒞)}` from the Gamma form of `c_p`.
pub fn ln_lp_mass_closed(c: &CylParams) -> Result<f64> {
    c.require_open()?;
    let p = c.p;
    let m = p / (p - 2.0);
    Ok(4f64.ln() + sphere_area(c.n).ln() + m * (2.0 * c.lambda * p).ln() + ln_c_p_gamma(p)?
        - (2.0 * p * c.lambda.sqrt()).ln())
}

/// `(C^{N,*}_{Λ,p})^{-1}` without quadrature: `(‖w*‖^p_{L^p(𝒞)})^{(p-2)/p}`.
pub fn inv_c_star_closed(c: &CylParams) -> Result<f64> {
    Ok((ln_lp_mass_closed(c)? * (c.p - 2.0) / c.p).exp())
}

pub fn radial_constants(c: &CylParams) -> Result<RadialConstants> {
    let prof = RadialProfile::new(*c)?;
    let p = c.p;
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 20_000 };
    let integral = quad::integrate_line(|t| prof.value(t).powf(p), 0.0, 1.0 / prof.decay_rate, opts)?.value;
    let area = sphere_area(c.n);
    let lp_norm_1d = integral.powf(1.0 / p);
    let inv_c_star = area.powf(1.0 - 2.0 / p) * lp_norm_1d.powf(p - 2.0);
    let c_p = if p - 2.0 >= CP_QUADRATURE_MIN_GAP { c_p_quadrature(p)? } else { c_p_gamma(p)? };
    let q = ckn_from_cyl(c)?;
    let consts = RadialConstants {
        inv_c_star,
        lp_norm_1d,
        lp_mass_cyl: area * integral,
        lp_mass_cyl_closed: ln_lp_mass_closed(c)?.exp(),
        c_p,
        kappa_star: kappa_star(&q)?,
    };
    if consts.lemma_rel_gap() > 1e-8 {
        return Err(Error::Numerical(format!(
            "L^p mass by quadrature and by the c_p closed form differ by {:e}",
            consts.lemma_rel_gap()
        )));
    }
    Ok(consts)
}
