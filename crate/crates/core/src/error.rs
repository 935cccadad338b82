use thiserror::Error;

use crate::solver::Witness;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {index} out of range 1..={dim}")]
    CoordinateRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kind mismatch: expected {expected}, got {found}")]
    KindMismatch {
        expected: crate::Kind,
        found: crate::Kind,
    },

    #[error("multi-index overflow")]
    Overflow,

    #[error("truncation depth exhausted: need degree {needed}, sequence has {available}")]
    TruncationDepth { needed: u32, available: u32 },

    #[error("imaginary residue {residue:e} in a real-valued computation")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid weight {0}: weights must be finite and nonnegative")]
    InvalidWeight(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("sequence is not dense: missing entry {0}")]
    MissingEntry(String),

    #[error("sequence is not Hermitian: defect {defect:e} at {at}")]
    NotHermitian { defect: f64, at: String },

    #[error("positivity violated: eigenvalue {eigenvalue:e}")]
    Positivity { eigenvalue: f64 },

    #[error("family is incomplete; missing members: {}", .missing.join(", "))]
    Incomplete { missing: Vec<String> },

    #[error("member for xi = 0 is not the zero measure (mass {mass:e})")]
    NonzeroAtOrigin { mass: f64 },

    #[error("infeasible targets: {0}")]
    Infeasible(Witness),

    #[error("infeasible truncations for {} coefficient vector(s): {}", .0.len(), .0.iter().map(|(xi, w)| format!("{xi}: {w}")).collect::<Vec<_>>().join("; "))]
    InfeasibleFamily(Vec<(String, Witness)>),

    #[error("inconsistent targets: zero mass with nonzero moments")]
    Inconsistent,

    #[error("block at atom {atom} is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    PsdDefect { atom: usize, eigenvalue: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),
}
