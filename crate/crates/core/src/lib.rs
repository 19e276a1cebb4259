//! Numerical laboratory for norm inflation with infinite loss of regularity in
//! the quadratic derivative fractional NLS
//!
//! ```text
//!     ∂t u + i D^α u = u D^β u,      D^α = F⁻¹ |ξ|^α F,
//! ```
//!
//! on the line and on the torus. The crate computes Picard iterates of the
//! Duhamel formulation at desk scale, tracks their Fourier supports, majorises
//! the iterate coefficients by an explicit combinatorial recurrence, and
//! measures band-restricted Sobolev norms against the predicted growth rates.
//! Half-line gauge norms (the total-variation functionals behind the
//! well-posedness side of the phase diagram) are audited on sampled measures.
//!
//! Everything here is pure computation over `alloc`; file formats and the
//! command-line driver live in the companion crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod line;
pub mod params;
pub mod piecewise;
pub mod quad;
pub mod recurrence;
pub mod solver;
pub mod torus;
pub mod xspace;

use alloc::string::String;
use alloc::vec::Vec;

pub use num_complex::Complex64;

/// Errors shared by the computational modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(String),
    /// Parameters violate the regime inequalities required by the operation.
    Regime(Vec<Violation>),
    /// The request exceeds the desk-scale resource budget. `suggestion`
    /// names the knob to turn.
    Resource { what: String, suggestion: String },
    /// Spectral energy reached the truncation band of a solver run.
    Truncation { t: f64 },
}

/// A single violated parameter inequality, named by what it constrains.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub name: &'static str,
    pub detail: String,
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Regime(violations) => {
                write!(f, "regime violation:")?;
                for v in violations {
                    write!(f, " [{}: {}]", v.name, v.detail)?;
                }
                Ok(())
            }
            Error::Resource { what, suggestion } => {
                write!(f, "resource limit: {what} ({suggestion})")
            }
            Error::Truncation { t } => {
                write!(f, "truncation tail overflow at t = {t}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain_err<T>(msg: impl core::fmt::Display) -> Result<T> {
    Err(Error::Domain(alloc::format!("{msg}")))
}

/// Japanese bracket ⟨x⟩ = (1 + x²)^{1/2}.
#[inline]
pub fn jbracket(x: f64) -> f64 {
    libm::sqrt(1.0 + x * x)
}
