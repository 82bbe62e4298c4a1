//! Discretization of the truncated cylinder `[-T, T] × S^{N-1}`.
//!
//! Fields are restricted to functions of `(t, φ)` where `φ` is the polar
//! angle. For `N ≥ 3` the sphere factor is sampled at Gauss–Jacobi nodes in
//! `x = cos φ` for the weight `(1 - x²)^{(N-3)/2}`, so the zonal measure
//! `|S^{N-2}| sin^{N-2}φ dφ` is integrated exactly for polynomials of degree
//! `< 2·nphi`. For `N = 2` the whole circle is sampled uniformly.
//!
//! Each rule carries an orthonormal basis of spherical harmonics evaluated at
//! the nodes; `Σ_j ω_j B_k(θ_j) B_l(θ_j) = δ_kl` holds to rounding, so the
//! Laplace–Beltrami operator is diagonal with entries `k(k + N - 2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CylParams;
use crate::radial::RadialProfile;
use crate::special::{ln_gamma, sphere_area};
use crate::tridiag::SymTridiag;

/// Decay margin `√Λ·T` demanded of solver grids.
pub const DECAY_MARGIN: f64 = 25.0;
pub const REFERENCE_NT: usize = 2001;
pub const REFERENCE_NPHI: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereKind {
    /// Gauss–Jacobi nodes in `cos φ`, `φ ∈ (0, π)`.
    GaussJacobi,
    /// Uniform nodes `φ_j = 2πj/n` on the full circle.
    UniformCircle,
}

#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n_dim: u32,
    pub kind: SphereKind,
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
    /// `basis[k * len + j] = B_k(θ_j)`.
    basis: Vec<f64>,
    /// `weighted[k * len + j] = ω_j B_k(θ_j)`.
    weighted: Vec<f64>,
    /// Laplace–Beltrami eigenvalue of each basis function.
    pub degrees: Vec<f64>,
    /// Degree-one zonal harmonic `cos φ` at the nodes.
    pub k1_mode: Vec<f64>,
    area: f64,
}

impl SphereRule {
    pub fn new(n_dim: u32, nphi: usize) -> Result<Self> {
        if n_dim < 2 {
            return Err(Error::domain(format!("dimension N = {n_dim} must be at least 2")));
        }
        if nphi == 0 {
            return Err(Error::domain("nphi must be positive"));
        }
        if n_dim == 2 {
            Ok(Self::circle(nphi))
        } else {
            Self::gauss_jacobi(n_dim, nphi)
        }
    }

    fn circle(n: usize) -> Self {
        let angles: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let weights = vec![2.0 * PI / n as f64; n];
        let mut basis = vec![0.0; n * n];
        let mut degrees = vec![0.0; n];
        let norm0 = 1.0 / (2.0 * PI).sqrt();
        let norm = 1.0 / PI.sqrt();
        for j in 0..n {
            basis[j] = norm0;
        }
        let mut k = 1;
        let mut m = 1;
        while k < n {
            let mf = m as f64;
            if 2 * m == n {
                for j in 0..n {
                    basis[k * n + j] = norm0 * (mf * angles[j]).cos();
                }
                degrees[k] = mf * mf;
                k += 1;
            } else {
                for j in 0..n {
                    basis[k * n + j] = norm * (mf * angles[j]).cos();
                }
                degrees[k] = mf * mf;
                k += 1;
                if k < n {
                    for j in 0..n {
                        basis[k * n + j] = norm * (mf * angles[j]).sin();
                    }
                    degrees[k] = mf * mf;
                    k += 1;
                }
            }
            m += 1;
        }
        let k1_mode = angles.iter().map(|a| a.cos()).collect();
        Self::assemble(2, SphereKind::UniformCircle, angles, weights, basis, degrees, k1_mode)
    }

    fn gauss_jacobi(n_dim: u32, n: usize) -> Result<Self> {
        let nd = f64::from(n_dim);
        let alpha = (nd - 3.0) / 2.0;
        // Jacobi matrix of the orthonormal polynomials for (1 - x²)^alpha
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                (k * (k + 2.0 * alpha) / ((2.0 * k + 2.0 * alpha - 1.0) * (2.0 * k + 2.0 * alpha + 1.0))).sqrt()
            })
            .collect();
        let jacobi = SymTridiag::new(vec![0.0; n], off.clone())?;
        let mut xs = jacobi.eigenvalues()?;
        // ascending φ
        xs.reverse();
        let mu0 = (0.5 * PI.ln() + ln_gamma(alpha + 1.0) - ln_gamma(alpha + 1.5)).exp();
        let ring = sphere_area(n_dim - 1);
        let mut poly = vec![0.0; n * n];
        let mut weights = Vec::with_capacity(n);
        for (j, &x) in xs.iter().enumerate() {
            let mut prev = 0.0;
            let mut cur = 1.0 / mu0.sqrt();
            let mut sumsq = cur * cur;
            poly[j] = cur;
            for k in 0..n - 1 {
                let back = if k > 0 { off[k - 1] } else { 0.0 };
                let next = (x * cur - back * prev) / off[k];
                prev = cur;
                cur = next;
                poly[(k + 1) * n + j] = cur;
                sumsq += cur * cur;
            }
            weights.push(ring / sumsq);
        }
        let scale = 1.0 / ring.sqrt();
        let basis: Vec<f64> = poly.iter().map(|q| q * scale).collect();
        let degrees = (0..n).map(|k| (k as f64) * (k as f64 + nd - 2.0)).collect();
        let angles: Vec<f64> = xs.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
        Ok(Self::assemble(n_dim, SphereKind::GaussJacobi, angles, weights, basis, degrees, xs))
    }

    fn assemble(
        n_dim: u32,
        kind: SphereKind,
        angles: Vec<f64>,
        weights: Vec<f64>,
        basis: Vec<f64>,
        degrees: Vec<f64>,
        k1_mode: Vec<f64>,
    ) -> Self {
        let n = angles.len();
        let mut weighted = basis.clone();
        for k in 0..n {
            for j in 0..n {
                weighted[k * n + j] *= weights[j];
            }
        }
        SphereRule { n_dim, kind, angles, weights, basis, weighted, degrees, k1_mode, area: sphere_area(n_dim) }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// `|S^{N-1}|`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn basis(&self, k: usize, j: usize) -> f64 {
        self.basis[k * self.len() + j]
    }

    /// Harmonic coefficients of one angular row.
    ///
    /// The constant part is split off against `row[0]`, so an exactly
    /// constant row yields exactly zero coefficients for every `k ≥ 1`.
    pub fn analyze(&self, row: &[f64], out: &mut [f64]) {
        let n = self.len();
        let base = row[0];
        for k in 0..n {
            let w = &self.weighted[k * n..(k + 1) * n];
            let mut acc = 0.0;
            for j in 1..n {
                acc += w[j] * (row[j] - base);
            }
            out[k] = acc;
        }
        out[0] += base * self.area.sqrt();
    }

    /// Inverse of [`SphereRule::analyze`].
    pub fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.len();
        let c0 = coeffs[0] / self.area.sqrt();
        out.iter_mut().for_each(|o| *o = c0);
        for k in 1..n {
            let c = coeffs[k];
            if c == 0.0 {
                continue;
            }
            let b = &self.basis[k * n..(k + 1) * n];
            for j in 0..n {
                out[j] += c * b[j];
            }
        }
    }

    /// Spherical mean of a row, exact for constant rows.
    pub fn mean(&self, row: &[f64]) -> f64 {
        let base = row[0];
        let dev: f64 = row.iter().zip(&self.weights).map(|(v, w)| w * (v - base)).sum();
        base + dev / self.area
    }
}

/// Uniform grid in `t` with Dirichlet ends, times a [`SphereRule`].
#[derive(Debug, Clone)]
pub struct Grid {
    pub half_length: f64,
    pub nt: usize,
    pub sphere: SphereRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n_dim: u32,
    pub half_length: f64,
    pub nt: usize,
    pub nphi: usize,
}

impl Grid {
    pub fn new(n_dim: u32, half_length: f64, nt: usize, nphi: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::domain(format!("half-length T = {half_length} must be positive")));
        }
        if nt < 7 {
            return Err(Error::domain(format!("nt = {nt} too small (need at least 7)")));
        }
        Ok(Grid { half_length, nt, sphere: SphereRule::new(n_dim, nphi)? })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(spec.n_dim, spec.half_length, spec.nt, spec.nphi)
    }

    /// `T = 25/√Λ`, `nt = 2001`, `nphi = 32`.
    pub fn reference(c: &CylParams) -> Result<Self> {
        Self::new(c.n, DECAY_MARGIN / c.lambda.sqrt(), REFERENCE_NT, REFERENCE_NPHI)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n_dim: self.sphere.n_dim, half_length: self.half_length, nt: self.nt, nphi: self.nphi() }
    }

    pub fn nphi(&self) -> usize {
        self.sphere.len()
    }

    pub fn n_dim(&self) -> u32 {
        self.sphere.n_dim
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.nt - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.nt * self.nphi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_decay_margin(&self, c: &CylParams) -> Result<()> {
        let margin = c.lambda.sqrt() * self.half_length;
        if margin < DECAY_MARGIN * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "decay margin √Λ·T = {margin:.3} below {DECAY_MARGIN}; enlarge the half-length"
            )));
        }
        Ok(())
    }

    /// Same box with `nt → 2nt - 1` and `nphi → 2nphi`.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.n_dim(), self.half_length, 2 * self.nt - 1, 2 * self.nphi())
    }
}

/// Values on the nodes of a [`Grid`], row-major in `t`, with the parameters
/// they are meant for. Boundary rows `t = ±T` are held at zero.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub cyl: CylParams,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, cyl: CylParams, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if cyl.n != grid.n_dim() {
            return Err(Error::domain(format!("field for N = {} on a grid for N = {}", cyl.n, grid.n_dim())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("field has non-finite entries".into()));
        }
        let mut f = Field { grid, cyl, values };
        f.enforce_dirichlet();
        Ok(f)
    }

    pub fn from_fn<F: Fn(f64, usize) -> f64>(grid: Arc<Grid>, cyl: CylParams, f: F) -> Result<Self> {
        let nphi = grid.nphi();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nt {
            let t = grid.t(i);
            for j in 0..nphi {
                values.push(f(t, j));
            }
        }
        Self::new(grid, cyl, values)
    }

    /// Samples `w*_{Λ,p}`.
    pub fn radial_extremal(grid: Arc<Grid>, cyl: CylParams) -> Result<Self> {
        let prof = RadialProfile::new(cyl)?;
        Self::from_fn(grid, cyl, |t, _| prof.value(t))
    }

    /// `f(t) cos φ`, a zero-mean degree-one mode with radial profile `f`.
    pub fn k1_mode<F: Fn(f64) -> f64>(grid: Arc<Grid>, cyl: CylParams, f: F) -> Result<Self> {
        let g = grid.clone();
        Self::from_fn(grid, cyl, |t, j| f(t) * g.sphere.k1_mode[j])
    }

    pub fn enforce_dirichlet(&mut self) {
        let nphi = self.grid.nphi();
        let last = (self.grid.nt - 1) * nphi;
        self.values[..nphi].iter_mut().for_each(|v| *v = 0.0);
        self.values[last..].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.nphi();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { grid: self.grid.clone(), cyl: self.cyl, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `self + s·other` on the same grid.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.spec() != other.grid.spec() {
            return Err(Error::domain("fields live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Field::new(self.grid.clone(), self.cyl, values)
    }

    /// Same values, reinterpreted for other parameters with the same `N`.
    pub fn with_params(&self, cyl: CylParams) -> Result<Field> {
        Field::new(self.grid.clone(), cyl, self.values.clone())
    }

    /// `h Σ ω |w|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 1..g.nt - 1 {
            for (v, w) in self.row(i).iter().zip(&g.sphere.weights) {
                acc += w * v * v;
            }
        }
        acc * g.spacing()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `h Σ ω |w|^p`.
    pub fn lp_mass(&self, p: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 1..g.nt - 1 {
            for (v, w) in self.row(i).iter().zip(&g.sphere.weights) {
                acc += w * v.abs().powf(p);
            }
        }
        acc * g.spacing()
    }
}
