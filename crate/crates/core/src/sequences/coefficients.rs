use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::multiindex::{monomial_eval, MultiIndex};
use crate::{Error, Result};

/// A finitely supported coefficient vector `ξ = (ξ_k)`, i.e. the polynomial
/// `p_ξ(x) = Σ_k ξ_k x^k`.
///
/// The canonical form stores no zero coefficients and no negative zeros, so
/// equality, hashing and ordering are exact and bitwise. Families are keyed on
/// this form.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

fn canonical(z: Complex64) -> Complex64 {
    // -0.0 + 0.0 == +0.0
    Complex64::new(z.re + 0.0, z.im + 0.0)
}

impl CoefficientVector {
    pub fn zero(dim: usize) -> Self {
        CoefficientVector {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a vector from `(index, coefficient)` pairs; repeated indices are summed.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (idx, z) in entries {
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: idx.dim(),
                });
            }
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("coefficient vector"));
            }
            *coeffs.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += z;
        }
        Ok(Self::from_map(dim, coeffs))
    }

    pub fn from_real(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        Self::new(dim, entries.into_iter().map(|(i, x)| (i, Complex64::new(x, 0.0))))
    }

    /// The monomial `x^idx` as a coefficient vector.
    pub fn unit(idx: MultiIndex) -> Self {
        let dim = idx.dim();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(idx, Complex64::new(1.0, 0.0));
        CoefficientVector { dim, coeffs }
    }

    /// The constant polynomial `1`.
    pub fn one(dim: usize) -> Self {
        Self::unit(MultiIndex::zero(dim))
    }

    /// Coefficients listed against `index` (dense), zeros dropped.
    pub fn from_dense(dim: usize, index: &[MultiIndex], values: &[Complex64]) -> Result<Self> {
        if index.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: index.len(),
                found: values.len(),
            });
        }
        Self::new(dim, index.iter().cloned().zip(values.iter().copied()))
    }

    fn from_map(dim: usize, coeffs: BTreeMap<MultiIndex, Complex64>) -> Self {
        let coeffs = coeffs
            .into_iter()
            .map(|(k, z)| (k, canonical(z)))
            .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
            .collect();
        CoefficientVector { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximal degree of the support; 0 for the zero vector.
    pub fn deg(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, idx: &MultiIndex) -> Complex64 {
        self.coeffs.get(idx).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm()).sum()
    }

    /// Dense coefficient list against `index`. Errors if the support leaves `index`.
    pub fn to_dense(&self, index: &[MultiIndex]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); index.len()];
        for (k, z) in &self.coeffs {
            let pos = index
                .iter()
                .position(|i| i == k)
                .ok_or_else(|| Error::Precondition(format!("coefficient index {k} outside the basis range")))?;
            out[pos] = *z;
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "coefficient vectors of different dimension");
        let mut map = BTreeMap::new();
        for k in self.coeffs.keys().chain(other.coeffs.keys()) {
            map.entry(k.clone()).or_insert_with(|| f(self.get(k), other.get(k)));
        }
        Self::from_map(self.dim, map)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::from_map(self.dim, self.coeffs.iter().map(|(k, c)| (k.clone(), c * z)).collect())
    }

    /// `i·ξ`, computed exactly as `(re, im) ↦ (-im, re)`.
    pub fn mul_i(&self) -> Self {
        Self::from_map(
            self.dim,
            self.coeffs
                .iter()
                .map(|(k, c)| (k.clone(), Complex64::new(-c.im, c.re)))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::from_map(self.dim, self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect())
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then_with(|| {
            let a = self.coeffs.iter();
            let b = other.coeffs.iter();
            for ((ka, za), (kb, zb)) in a.zip(b) {
                let o = ka
                    .cmp(kb)
                    .then_with(|| za.re.total_cmp(&zb.re))
                    .then_with(|| za.im.total_cmp(&zb.im));
                if o != Ordering::Equal {
                    return o;
                }
            }
            self.coeffs.len().cmp(&other.coeffs.len())
        })
    }
}

/// `p_ξ(x) = Σ_k ξ_k x^k`.
pub fn poly_eval(xi: &CoefficientVector, x: &[Complex64]) -> Result<Complex64> {
    if x.len() != xi.dim {
        return Err(Error::DimensionMismatch {
            expected: xi.dim,
            found: x.len(),
        });
    }
    xi.coeffs
        .iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, (k, c)| Ok(acc + c * monomial_eval(x, k, None)?))
}

impl PartialEq for CoefficientVector {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for CoefficientVector {}

impl PartialOrd for CoefficientVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CoefficientVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

impl Hash for CoefficientVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        for (k, z) in &self.coeffs {
            k.hash(state);
            z.re.to_bits().hash(state);
            z.im.to_bits().hash(state);
        }
    }
}

impl fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{{")?;
        for (i, (k, z)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if z.im == 0.0 {
                write!(f, "{k}:{}", z.re)?;
            } else {
                write!(f, "{k}:{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "}}")
    }
}
