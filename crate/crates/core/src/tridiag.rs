//! Symmetric tridiagonal matrices: Sturm-sequence bisection, inverse
//! iteration, and factored solves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::domain(format!(
                "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (count of negative LDLᵀ pivots).
    pub fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let prev = if q == 0.0 { tiny } else { q };
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / prev;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to machine precision.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::domain(format!("eigenvalue index {k} out of range")));
        }
        let (lo, hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
        let (mut a, mut b) = (lo - pad, hi + pad);
        for _ in 0..256 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.sturm_count(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        (0..self.len()).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves `(T - shift·I) x = rhs` by Gaussian elimination with partial
    /// pivoting. Exactly singular pivots are nudged, which is what inverse
    /// iteration wants.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let nudge = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        // rows hold (sub, main, sup, sup2) after pivoting
        let mut main: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut sup: Vec<f64> = self.off.clone();
        sup.push(0.0);
        let mut sub: Vec<f64> = self.off.clone();
        let mut sup2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if sub[i].abs() > main[i].abs() {
                // swap rows i and i+1
                let (m0, s0, t0) = (main[i], sup[i], sup2[i]);
                main[i] = sub[i];
                sup[i] = main[i + 1];
                sup2[i] = sup[i + 1];
                sub[i] = m0;
                main[i + 1] = s0;
                sup[i + 1] = t0;
                b.swap(i, i + 1);
            }
            if main[i] == 0.0 {
                main[i] = nudge;
            }
            let l = sub[i] / main[i];
            main[i + 1] -= l * sup[i];
            sup[i + 1] -= l * sup2[i];
            b[i + 1] -= l * b[i];
        }
        if main[n - 1] == 0.0 {
            main[n - 1] = nudge;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= sup[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= sup2[i] * x[i + 2];
            }
            x[i] = s / main[i];
        }
        x
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration, normalized
    /// to unit Euclidean length.
    pub fn eigenvector(&self, eigenvalue: f64, sweeps: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..sweeps.max(1) {
            let y = self.solve_shifted(eigenvalue, &x);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Numerical("inverse iteration broke down".into()));
            }
            x = y.into_iter().map(|v| v / norm).collect();
        }
        Ok(x)
    }
}

/// Cholesky-style `LDLᵀ` factorization of a symmetric positive definite
/// tridiagonal matrix, reused across many right-hand sides.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    pivots: Vec<f64>,
    mults: Vec<f64>,
}

impl SpdFactor {
    pub fn new(m: &SymTridiag) -> Result<Self> {
        let n = m.len();
        let mut pivots = Vec::with_capacity(n);
        let mut mults = Vec::with_capacity(n.saturating_sub(1));
        pivots.push(m.diag[0]);
        for i in 1..n {
            let l = m.off[i - 1] / pivots[i - 1];
            mults.push(l);
            pivots.push(m.diag[i] - l * m.off[i - 1]);
        }
        if pivots.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Numerical("matrix is not positive definite".into()));
        }
        Ok(SpdFactor { pivots, mults })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            x[i] -= self.mults[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.pivots[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.mults[i] * x[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 40;
        let m = laplacian(n);
        let ev = m.eigenvalues().unwrap();
        for (k, &e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn sturm_count_brackets() {
        let m = laplacian(10);
        assert_eq!(m.sturm_count(-0.1), 0);
        assert_eq!(m.sturm_count(4.1), 10);
        assert_eq!(m.sturm_count(2.0 + 1e-9), 5);
    }

    #[test]
    fn inverse_iteration_ground_vector() {
        let n = 30;
        let m = laplacian(n);
        let lam = m.eigenvalue(0).unwrap();
        let v = m.eigenvector(lam, 2).unwrap();
        let sign = v[0].signum();
        for (i, &x) in v.iter().enumerate() {
            let exact = ((i + 1) as f64 * PI / (n + 1) as f64).sin() * (2.0 / (n + 1) as f64).sqrt();
            assert!((sign * x - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoted_solve_matches_product() {
        let m = SymTridiag::new(vec![0.0, 1.0, -3.0, 2.0, 0.5], vec![4.0, -1.0, 2.0, 1.5]).unwrap();
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.0];
        let b = m.mul_vec(&x);
        let y = m.solve_shifted(0.0, &b);
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).abs() < 1e-13);
        }
    }

    #[test]
    fn spd_factor_solves() {
        let m = SymTridiag::new(vec![4.0, 5.0, 3.0, 6.0], vec![1.0, -2.0, 0.5]).unwrap();
        let f = SpdFactor::new(&m).unwrap();
        let x = vec![0.3, -1.0, 2.0, 0.25];
        let mut b = m.mul_vec(&x);
        f.solve_in_place(&mut b);
        for (a, c) in x.iter().zip(&b) {
            assert!((a - c).abs() < 1e-14);
        }
        assert!(SpdFactor::new(&laplacian(3).clone_shifted(3.0)).is_err());
    }

    impl SymTridiag {
        fn clone_shifted(&self, s: f64) -> SymTridiag {
            SymTridiag { diag: self.diag.iter().map(|d| d - s).collect(), off: self.off.clone() }
        }
    }
}
