//! Quantum mechanics of a free particle on the 3-sphere.
//!
//! The sphere of radius `R` is covered by two charts (upper and lower
//! hemisphere), each parametrized by the flat 3-ball of radius `R`.  A state
//! is either a pair of chart wave functions (position representation, module
//! [`config_space`]) or a pair of Cauchy data for the 4-dimensional Helmholtz
//! equation (momentum representation, module [`momentum_space`]).  The two
//! pictures are connected by a unitary band-limited Fourier transform
//! ([`fourier_bridge`]), and both scalar products reduce to convolution
//! against Bochner-Riesz kernels ([`kernels`]).  Free dynamics is diagonal in
//! the shared discrete basis ([`dynamics`]).
//!
//! Everything numerical sits on two in-crate foundations: special functions
//! ([`specfun`]) and 1-d adaptive plus oscillatory quadrature
//! ([`quadrature`]).  No external math library is used.

pub mod ball;
pub mod config_space;
pub mod dynamics;
pub mod fourier_bridge;
pub mod kernels;
pub mod momentum_space;
pub mod quadrature;
pub mod report;
pub mod specfun;

use serde::{Deserialize, Serialize};

pub use config_space::PhysicalParams;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the supported domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration failed to converge.  `best` carries the last estimate so
    /// callers can decide whether it is still usable.
    #[error("no convergence: {what} (best estimate {best:e})")]
    Convergence { what: String, best: f64 },

    /// Singular matrix in a linear solve.
    #[error("singular system: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Complex double, the scalar type of every state in this crate.
pub type C64 = num_complex::Complex64;

/// Quantum numbers of one mode of the discrete basis: principal `n >= 0`,
/// orbital `l <= n`, magnetic `|m| <= l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: u32,
    pub m: i32,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if l > n {
            return Err(Error::Domain(format!("l = {l} exceeds n = {n}")));
        }
        if m.unsigned_abs() > l {
            return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { n, l, m })
    }

    /// All modes with principal number up to and including `n_max`,
    /// in lexicographic (n, l, m) order.
    pub fn modes_up_to(n_max: u32) -> Vec<Self> {
        let mut v = Vec::new();
        for n in 0..=n_max {
            for l in 0..=n {
                for m in -(l as i32)..=(l as i32) {
                    v.push(Self { n, l, m });
                }
            }
        }
        v
    }
}

impl std::fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n, self.l, self.m)
    }
}
