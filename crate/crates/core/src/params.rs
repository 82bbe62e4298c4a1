//! The two charts of parameter space, Kelvin duality, and the
//! Felli–Schneider curve.
//!
//! A point of the weighted inequality is `(N, a, b)`. After the Emden-Fowler
//! change of variables the same point is described by `(N, Λ, p)` with
//!
//! ```text
//! Λ = (N - 2 - 2a)² / 4,      p = 2N / (N - 2 + 2(b - a)),
//! a = (N - 2)/2 - √Λ,         b = N/p - √Λ.
//! ```
//!
//! Only the half-plane `a < a_c = (N-2)/2` is charted; points with `a > a_c`
//! are brought there by [`kelvin_dual`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for deciding equalities between closed-form parameters.
pub const PARAM_TOL: f64 = 1e-12;

/// Where a point `(a, b)` sits relative to the admissible strip `a ≤ b ≤ a + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    /// `b = a + 1`, equivalently `p = 2`.
    HardyEdge,
    /// `b = a` with `N ≥ 3`, equivalently `p = 2*`.
    SobolevEdge,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub lambda: f64,
    pub p: f64,
}

/// `a_c = (N - 2)/2`.
pub fn critical_a(n: u32) -> f64 {
    (f64::from(n) - 2.0) / 2.0
}

/// Critical Sobolev exponent `2N/(N-2)`; infinite for `N = 2`.
pub fn critical_exponent(n: u32) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        2.0 * f64::from(n) / (f64::from(n) - 2.0)
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("dimension N = {n} must be at least 2")));
    }
    Ok(())
}

impl CknParams {
    pub fn new(n: u32, a: f64, b: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain("a and b must be finite"));
        }
        if (a - critical_a(n)).abs() <= PARAM_TOL {
            return Err(Error::domain(format!("a = {a} equals a_c = {}", critical_a(n))));
        }
        Ok(CknParams { n, a, b })
    }

    pub fn region(&self) -> Region {
        let d = self.b - self.a;
        if (d - 1.0).abs() <= PARAM_TOL {
            Region::HardyEdge
        } else if d.abs() <= PARAM_TOL {
            if self.n >= 3 {
                Region::SobolevEdge
            } else {
                Region::Invalid
            }
        } else if d > 0.0 && d < 1.0 {
            Region::Interior
        } else {
            Region::Invalid
        }
    }

    /// `Λ = (N - 2 - 2a)²/4`, the same on both sides of `a_c`.
    pub fn lambda(&self) -> f64 {
        let s = f64::from(self.n) - 2.0 - 2.0 * self.a;
        0.25 * s * s
    }

    /// `p = 2N / (N - 2 + 2(b - a))`.
    pub fn exponent(&self) -> f64 {
        let n = f64::from(self.n);
        2.0 * n / (n - 2.0 + 2.0 * (self.b - self.a))
    }
}

impl CylParams {
    /// Accepts `Λ > 0` and `2 ≤ p ≤ 2*`; the endpoints are representable but
    /// see [`CylParams::region`] and [`CylParams::require_open`].
    pub fn new(n: u32, lambda: f64, p: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("Λ = {lambda} must be positive and finite")));
        }
        let pc = critical_exponent(n);
        if !p.is_finite() || p < 2.0 - PARAM_TOL || p > pc + PARAM_TOL {
            return Err(Error::domain(format!("p = {p} outside [2, {pc}] for N = {n}")));
        }
        Ok(CylParams { n, lambda, p })
    }

    pub fn region(&self) -> Region {
        if (self.p - 2.0).abs() <= PARAM_TOL {
            Region::HardyEdge
        } else if self.n >= 3 && (self.p - critical_exponent(self.n)).abs() <= PARAM_TOL {
            Region::SobolevEdge
        } else {
            Region::Interior
        }
    }

    /// Rejects the tagged endpoints `p = 2` and `p = 2*`.
    pub fn require_open(&self) -> Result<()> {
        match self.region() {
            Region::Interior => Ok(()),
            r => Err(Error::domain(format!(
                "p = {} is on the {r:?} edge; the extremal problem needs 2 < p < 2*",
                self.p
            ))),
        }
    }

    pub fn dim(&self) -> f64 {
        f64::from(self.n)
    }
}

/// `(N, a, b) ↦ (N, Λ, p)` on the chart `a < a_c`.
pub fn cyl_from_ckn(q: &CknParams) -> Result<CylParams> {
    let q = CknParams::new(q.n, q.a, q.b)?;
    if q.a > critical_a(q.n) {
        return Err(Error::domain(format!(
            "a = {} > a_c = {}; apply kelvin_dual first or request auto-dualization",
            q.a,
            critical_a(q.n)
        )));
    }
    if q.region() == Region::Invalid {
        return Err(Error::domain(format!(
            "b = {} outside the admissible range for a = {}, N = {}",
            q.b, q.a, q.n
        )));
    }
    let mut c = CylParams { n: q.n, lambda: q.lambda(), p: q.exponent() };
    // snap the tagged edges so they classify identically in both charts
    match q.region() {
        Region::HardyEdge => c.p = 2.0,
        Region::SobolevEdge => c.p = critical_exponent(q.n),
        _ => {}
    }
    CylParams::new(c.n, c.lambda, c.p)
}

/// Like [`cyl_from_ckn`], mapping `a > a_c` through Kelvin duality first.
pub fn cyl_from_ckn_dualizing(q: &CknParams) -> Result<CylParams> {
    let q = CknParams::new(q.n, q.a, q.b)?;
    if q.a > critical_a(q.n) {
        cyl_from_ckn(&kelvin_dual(&q))
    } else {
        cyl_from_ckn(&q)
    }
}

/// `(N, Λ, p) ↦ (N, a, b)` with `a = (N-2)/2 - √Λ`, `b = N/p - √Λ`.
pub fn ckn_from_cyl(c: &CylParams) -> Result<CknParams> {
    let c = CylParams::new(c.n, c.lambda, c.p)?;
    let s = c.lambda.sqrt();
    let a = critical_a(c.n) - s;
    let b = c.dim() / c.p - s;
    Ok(CknParams { n: c.n, a, b })
}

/// `a' = N - 2 - a`, `b' = b + N - 2 - 2a`. An involution preserving `Λ`.
pub fn kelvin_dual(q: &CknParams) -> CknParams {
    let shift = f64::from(q.n) - 2.0;
    CknParams { n: q.n, a: shift - q.a, b: q.b + shift - 2.0 * q.a }
}

/// `b^FS(a)` together with a flag telling whether `a < 0`, the range where
/// the curve is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsValue {
    pub b: f64,
    pub in_stated_domain: bool,
}

/// Felli–Schneider curve
/// `b^FS(a) = N s / (2√(s² + 4(N-1))) - s/2` with `s = N - 2 - 2a`.
///
/// Evaluated for every `a < a_c`; `in_stated_domain` is false for `a ≥ 0`.
pub fn fs_b(n: u32, a: f64) -> Result<FsValue> {
    check_dimension(n)?;
    if !(a < critical_a(n)) {
        return Err(Error::domain(format!("b^FS needs a < a_c = {}, got {a}", critical_a(n))));
    }
    let nf = f64::from(n);
    let s = nf - 2.0 - 2.0 * a;
    let b = nf * s / (2.0 * (s * s + 4.0 * (nf - 1.0)).sqrt()) - 0.5 * s;
    if a >= 0.0 {
        log::warn!("b^FS evaluated at a = {a} >= 0, outside the range where the curve is stated");
    }
    Ok(FsValue { b, in_stated_domain: a < 0.0 })
}

/// `Λ^FS(p) = 4(N - 1)/(p² - 4)`.
pub fn fs_lambda(n: u32, p: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(p > 2.0) {
        return Err(Error::domain(format!("Λ^FS(p) needs p > 2, got {p}")));
    }
    Ok(4.0 * (f64::from(n) - 1.0) / (p * p - 4.0))
}

/// `b - a - 1 - N(1/p - 1/2)`, which vanishes on the image of [`ckn_from_cyl`].
pub fn star_defect(q: &CknParams, p: f64) -> f64 {
    q.b - q.a - 1.0 - f64::from(q.n) * (1.0 / p - 0.5)
}
