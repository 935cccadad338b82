use indexmap::IndexSet;
use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::multiindex::{truncation_set, MultiIndex, TruncationKind};
use crate::{Error, Kind, Result};

/// Hermitian-symmetry tolerance for user-supplied complex data (relative).
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Values {
    /// `a_n` listed against the index set.
    Real(Vec<f64>),
    /// `c_{m,n}` with `m` indexing rows.
    Complex(CMatrix),
}

/// Moment data truncated at degree `D`, dense within the truncation.
///
/// Real kind stores `a_n` for `|n| ≤ D`; complex kind stores `c_{m,n}` for
/// `|m|, |n| ≤ D` and is Hermitian, `c_{m,n} = conj(c_{n,m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    dim: usize,
    max_degree: u32,
    index: IndexSet<MultiIndex>,
    values: Values,
}

fn index_set(dim: usize, max_degree: u32) -> IndexSet<MultiIndex> {
    truncation_set(dim, TruncationKind::AllUpTo(max_degree)).into_iter().collect()
}

impl TruncatedSequence {
    pub fn from_real_fn(dim: usize, max_degree: u32, mut f: impl FnMut(&MultiIndex) -> f64) -> Self {
        let index = index_set(dim, max_degree);
        let values = index.iter().map(&mut f).collect();
        TruncatedSequence {
            dim,
            max_degree,
            index,
            values: Values::Real(values),
        }
    }

    /// Builds a complex sequence from `f(m, n)`. The upper triangle is
    /// evaluated and mirrored, so the result is exactly Hermitian.
    pub fn from_complex_fn(
        dim: usize,
        max_degree: u32,
        mut f: impl FnMut(&MultiIndex, &MultiIndex) -> Complex64,
    ) -> Self {
        let index = index_set(dim, max_degree);
        let n = index.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            let v = f(&index[i], &index[i]);
            m[(i, i)] = Complex64::new(v.re, 0.0);
            for j in (i + 1)..n {
                let v = f(&index[i], &index[j]);
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        TruncatedSequence {
            dim,
            max_degree,
            index,
            values: Values::Complex(m),
        }
    }

    pub fn zero(dim: usize, kind: Kind, max_degree: u32) -> Self {
        match kind {
            Kind::Real => Self::from_real_fn(dim, max_degree, |_| 0.0),
            Kind::Complex => Self::from_complex_fn(dim, max_degree, |_, _| Complex64::new(0.0, 0.0)),
        }
    }

    /// Validating constructor for user data: every index up to `max_degree` must appear once.
    pub fn from_real_entries(
        dim: usize,
        max_degree: u32,
        entries: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let index = index_set(dim, max_degree);
        let mut values = vec![None; index.len()];
        for (idx, v) in entries {
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: idx.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sequence entry"));
            }
            let pos = index.get_index_of(&idx).ok_or(Error::TruncationDepth {
                needed: idx.degree(),
                available: max_degree,
            })?;
            values[pos] = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MissingEntry(index[i].to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedSequence {
            dim,
            max_degree,
            index,
            values: Values::Real(values),
        })
    }

    pub fn from_complex_entries(
        dim: usize,
        max_degree: u32,
        entries: impl IntoIterator<Item = (MultiIndex, MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let index = index_set(dim, max_degree);
        let n = index.len();
        let mut seen = vec![false; n * n];
        let mut m = CMatrix::zeros(n, n);
        for (a, b, v) in entries {
            for idx in [&a, &b] {
                if idx.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: idx.dim(),
                    });
                }
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite("sequence entry"));
            }
            let depth = |idx: &MultiIndex| Error::TruncationDepth {
                needed: idx.degree(),
                available: max_degree,
            };
            let i = index.get_index_of(&a).ok_or_else(|| depth(&a))?;
            let j = index.get_index_of(&b).ok_or_else(|| depth(&b))?;
            m[(i, j)] = v;
            seen[i * n + j] = true;
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::MissingEntry(format!("({}, {})", index[p / n], index[p % n])));
        }
        let scale = crate::linalg::max_abs(&m).max(1.0);
        for i in 0..n {
            for j in i..n {
                let defect = (m[(i, j)] - m[(j, i)].conj()).norm();
                if defect > HERMITIAN_TOL * scale {
                    return Err(Error::NotHermitian {
                        defect,
                        at: format!("({}, {})", index[i], index[j]),
                    });
                }
            }
        }
        // remove the admissible round-off
        let m = (&m + m.adjoint()).scale(0.5);
        Ok(TruncatedSequence {
            dim,
            max_degree,
            index,
            values: Values::Complex(m),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Kind {
        match self.values {
            Values::Real(_) => Kind::Real,
            Values::Complex(_) => Kind::Complex,
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// All indices up to the degree bound, graded-lex ordered.
    pub fn indices(&self) -> &IndexSet<MultiIndex> {
        &self.index
    }

    /// `a_n` (real kind only).
    pub fn real(&self, n: &MultiIndex) -> Option<f64> {
        match &self.values {
            Values::Real(v) => self.index.get_index_of(n).map(|i| v[i]),
            Values::Complex(_) => None,
        }
    }

    /// `c_{m,n}` (complex kind only).
    pub fn complex(&self, m: &MultiIndex, n: &MultiIndex) -> Option<Complex64> {
        match &self.values {
            Values::Complex(c) => {
                let i = self.index.get_index_of(m)?;
                let j = self.index.get_index_of(n)?;
                Some(c[(i, j)])
            }
            Values::Real(_) => None,
        }
    }

    pub(crate) fn real_or_depth(&self, n: &MultiIndex) -> Result<f64> {
        self.real(n).ok_or(Error::TruncationDepth {
            needed: n.degree(),
            available: self.max_degree,
        })
    }

    pub(crate) fn complex_or_depth(&self, m: &MultiIndex, n: &MultiIndex) -> Result<Complex64> {
        self.complex(m, n).ok_or(Error::TruncationDepth {
            needed: m.degree().max(n.degree()),
            available: self.max_degree,
        })
    }

    /// Real entries in index order (empty for complex kind).
    pub fn real_values(&self) -> &[f64] {
        match &self.values {
            Values::Real(v) => v,
            Values::Complex(_) => &[],
        }
    }

    /// Complex entries as a matrix over the index set (complex kind only).
    pub fn complex_matrix(&self) -> Option<&CMatrix> {
        match &self.values {
            Values::Complex(c) => Some(c),
            Values::Real(_) => None,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        match &self.values {
            Values::Real(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Values::Complex(c) => crate::linalg::max_abs(c),
        }
    }

    /// Largest entrywise difference against `other` over the common truncation.
    pub fn max_difference(&self, other: &TruncatedSequence) -> Result<f64> {
        if self.kind() != other.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                found: other.kind(),
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let common: Vec<&MultiIndex> = self.index.iter().filter(|n| other.index.contains(*n)).collect();
        let mut worst = 0.0_f64;
        match self.kind() {
            Kind::Real => {
                for n in &common {
                    worst = worst.max((self.real(n).unwrap() - other.real(n).unwrap()).abs());
                }
            }
            Kind::Complex => {
                for m in &common {
                    for n in &common {
                        let d = self.complex(m, n).unwrap() - other.complex(m, n).unwrap();
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub(crate) fn require_degree(&self, needed: u32) -> Result<()> {
        if needed > self.max_degree {
            Err(Error::TruncationDepth {
                needed,
                available: self.max_degree,
            })
        } else {
            Ok(())
        }
    }
}
