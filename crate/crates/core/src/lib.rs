//! Numerical laboratory for the symmetry of extremals of the
//! Caffarelli-Kohn-Nirenberg inequalities.
//!
//! The crate works in two charts of parameter space: the original
//! `(N, a, b)` weights and the cylinder description `(N, Λ, p)` obtained
//! through the Emden-Fowler change of variables. On the cylinder
//! `ℝ × S^{N-1}` it provides
//!
//! * closed forms for the θ-independent extremal `w*`, its norms and the
//!   optimal constant among radial functions ([`radial`]);
//! * the linearization around `w*` restricted to zero-mean perturbations and
//!   a Pöschl–Teller eigensolver ([`spectral`]);
//! * a discretized Rayleigh-quotient minimizer ([`solver`]) on a truncated
//!   cylinder grid ([`grid`]);
//! * bisection for the symmetry-breaking threshold `Λ*(p)` and comparison
//!   with the Felli–Schneider curve ([`boundary`]).

pub mod boundary;
pub mod cli;
pub mod error;
pub mod grid;
pub mod io;
pub mod params;
pub mod quad;
pub mod radial;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use params::{CknParams, CylParams};
