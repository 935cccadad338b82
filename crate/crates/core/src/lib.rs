//! Certification toolkit for multidimensional real and complex moment problems.
//!
//! A multisequence is a moment sequence exactly when, for every finitely
//! supported coefficient vector ξ, the localized sequence `a^ξ` admits a
//! positive representing measure on the tiny index set `{0, e_i, 2e_i}` and
//! the resulting family of measures obeys the parallelogram positivity
//! constraint. This crate builds and audits such families on concrete atomic
//! data:
//!
//! * [`multiindex`]: multi-index arithmetic and the truncation index sets.
//! * [`sequences`]: truncated sequences, atomic measures, localization.
//! * [`rkhs`]: Gram matrices, positivity tests, seminorm, null space, shifts.
//! * [`families`]: measure families, certificates, polarization, audits.
//! * [`solver`]: per-ξ solvers for the order-two truncations.
//! * [`dilation`]: semispectral measures and their finite Naimark dilation.
//! * [`weaklimits`]: a numerical harness for moment functionals under weak limits.
//! * [`json`]: the on-disk formats.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod dilation;
mod error;
pub mod families;
pub mod json;
pub mod linalg;
pub mod multiindex;
pub mod rkhs;
pub mod sequences;
pub mod solver;
pub mod weaklimits;

pub use error::{Error, Result};
pub use multiindex::{MultiIndex, TruncationKind};
pub use num_complex::Complex64;
pub use sequences::{AtomicMeasure, CoefficientVector, Measure, SignedAtomicMeasure, TruncatedSequence};

/// Default numerical tolerance used across the toolkit.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A point of `R^d` or `C^d`. Real points carry zero imaginary parts.
pub type Point = Vec<Complex64>;

/// Whether data lives on `R^d` (monomials `x^n`) or `C^d` (monomials `z^m z̄^n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Complex,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Real => f.write_str("real"),
            Kind::Complex => f.write_str("complex"),
        }
    }
}

/// Converts a real coordinate tuple into a [`Point`].
pub fn real_point(coords: &[f64]) -> Point {
    coords.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}
