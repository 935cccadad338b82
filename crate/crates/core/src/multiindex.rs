//! Multi-indices `n = (n_1, …, n_d)` and the truncation index sets built from them.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A `d`-tuple of natural exponents.
///
/// Ordering is graded lexicographic: first by dimension, then by degree, then
/// so that `(1,0)` precedes `(0,1)` within the same degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Precondition("multi-index dimension must be at least 1".into()));
        }
        Ok(MultiIndex(entries))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim.max(1)])
    }

    /// `e_i` in dimension `dim`, with `i` counted from 1.
    pub fn unit(i: usize, dim: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return Err(Error::CoordinateRange { index: i, dim });
        }
        let mut v = vec![0; dim];
        v[i - 1] = 1;
        Ok(MultiIndex(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Entrywise sum with overflow checking.
    pub fn checked_add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `self + e_i` (1-based `i`).
    pub fn shifted(&self, i: usize) -> Result<MultiIndex> {
        self.checked_add(&MultiIndex::unit(i, self.dim())?)
    }

    /// `k · self`.
    pub fn scaled(&self, k: u32) -> Result<MultiIndex> {
        self.0
            .iter()
            .map(|a| a.checked_mul(k).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim()
            .cmp(&other.dim())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn degree(n: &MultiIndex) -> u32 {
    n.degree()
}

pub fn unit_index(i: usize, dim: usize) -> Result<MultiIndex> {
    MultiIndex::unit(i, dim)
}

/// Which index set [`truncation_set`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationKind {
    /// `{0, e_1, …, e_d}`
    N1,
    /// `{0, 2e_1, …, 2e_d}`
    TwoN1,
    /// `{0, e_i, 2e_i}`; mixed second-order indices are excluded.
    N1Union2N1,
    /// Every index of degree at most `D`.
    AllUpTo(u32),
}

/// Index set of the requested kind in graded-lexicographic order.
pub fn truncation_set(dim: usize, kind: TruncationKind) -> Vec<MultiIndex> {
    let dim = dim.max(1);
    let units = |k: u32| (1..=dim).map(move |i| {
        let mut v = vec![0; dim];
        v[i - 1] = k;
        MultiIndex(v)
    });
    let mut out: Vec<MultiIndex> = match kind {
        TruncationKind::N1 => std::iter::once(MultiIndex::zero(dim)).chain(units(1)).collect(),
        TruncationKind::TwoN1 => std::iter::once(MultiIndex::zero(dim)).chain(units(2)).collect(),
        TruncationKind::N1Union2N1 => std::iter::once(MultiIndex::zero(dim))
            .chain(units(1))
            .chain(units(2))
            .collect(),
        TruncationKind::AllUpTo(max) => {
            let mut acc = Vec::new();
            let mut cur = vec![0; dim];
            enumerate(&mut cur, 0, max, &mut acc);
            acc
        }
    };
    out.sort();
    out
}

fn enumerate(cur: &mut Vec<u32>, slot: usize, budget: u32, acc: &mut Vec<MultiIndex>) {
    if slot == cur.len() {
        acc.push(MultiIndex(cur.clone()));
        return;
    }
    for e in 0..=budget {
        cur[slot] = e;
        enumerate(cur, slot + 1, budget - e, acc);
    }
    cur[slot] = 0;
}

/// `x^n`, or `z^m z̄^n` when `conj_n` is given.
pub fn monomial_eval(x: &[Complex64], n: &MultiIndex, conj_n: Option<&MultiIndex>) -> Result<Complex64> {
    if x.len() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: n.dim(),
            found: x.len(),
        });
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (xi, &e) in x.iter().zip(n.entries()) {
        if e > 0 {
            acc *= xi.powu(e);
        }
    }
    if let Some(cn) = conj_n {
        if cn.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: cn.dim(),
            });
        }
        for (xi, &e) in x.iter().zip(cn.entries()) {
            if e > 0 {
                acc *= xi.conj().powu(e);
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real_point;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(&mi(&[0, 0, 0])), 0);
        assert_eq!(degree(&mi(&[2, 0, 1])), 3);
        assert_eq!(degree(&unit_index(2, 3).unwrap()), 1);
        assert_eq!(unit_index(2, 3).unwrap(), mi(&[0, 1, 0]));
    }

    #[test]
    fn unit_index_examples() {
        assert_eq!(unit_index(1, 2).unwrap(), mi(&[1, 0]));
        assert_eq!(unit_index(2, 2).unwrap(), mi(&[0, 1]));
        assert!(matches!(unit_index(3, 2), Err(Error::CoordinateRange { index: 3, dim: 2 })));
        assert!(unit_index(0, 2).is_err());
    }

    #[test]
    fn truncation_sets() {
        assert_eq!(
            truncation_set(2, TruncationKind::N1),
            vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]
        );
        assert_eq!(
            truncation_set(2, TruncationKind::N1Union2N1),
            vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[2, 0]), mi(&[0, 2])]
        );
        assert!(!truncation_set(2, TruncationKind::N1Union2N1).contains(&mi(&[1, 1])));
        assert_eq!(
            truncation_set(2, TruncationKind::TwoN1),
            vec![mi(&[0, 0]), mi(&[2, 0]), mi(&[0, 2])]
        );
        assert_eq!(
            truncation_set(1, TruncationKind::AllUpTo(2)),
            vec![mi(&[0]), mi(&[1]), mi(&[2])]
        );
        assert_eq!(
            truncation_set(2, TruncationKind::AllUpTo(2)),
            vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]
        );
        // binomial(d + D, D)
        assert_eq!(truncation_set(3, TruncationKind::AllUpTo(4)).len(), 35);
    }

    #[test]
    fn monomial_examples() {
        let v = monomial_eval(&real_point(&[2.0, 3.0]), &mi(&[1, 2]), None).unwrap();
        assert_eq!(v, Complex64::new(18.0, 0.0));
        let z = [Complex64::new(0.0, 1.0)];
        let v = monomial_eval(&z, &mi(&[2]), Some(&mi(&[1]))).unwrap();
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let v = monomial_eval(&real_point(&[7.5, -3.0]), &mi(&[0, 0]), None).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        assert!(monomial_eval(&real_point(&[1.0]), &mi(&[1, 1]), None).is_err());
    }

    #[test]
    fn addition_overflow_is_checked() {
        let big = mi(&[u32::MAX, 0]);
        assert!(matches!(big.checked_add(&mi(&[1, 0])), Err(Error::Overflow)));
        assert!(mi(&[1]).checked_add(&mi(&[1, 2])).is_err());
    }

    #[test]
    fn json_is_plain_array() {
        assert_eq!(serde_json::to_string(&mi(&[2, 0, 1])).unwrap(), "[2,0,1]");
        let back: MultiIndex = serde_json::from_str("[2,0,1]").unwrap();
        assert_eq!(back, mi(&[2, 0, 1]));
    }

    proptest! {
        #[test]
        fn degree_is_additive(a in prop::collection::vec(0u32..20, 3), b in prop::collection::vec(0u32..20, 3)) {
            let (a, b) = (mi(&a), mi(&b));
            prop_assert_eq!(a.checked_add(&b).unwrap().degree(), a.degree() + b.degree());
        }

        #[test]
        fn truncation_sizes(d in 1usize..8) {
            prop_assert_eq!(truncation_set(d, TruncationKind::N1).len(), d + 1);
            prop_assert_eq!(truncation_set(d, TruncationKind::N1Union2N1).len(), 2 * d + 1);
        }

        #[test]
        fn monomials_multiply(
            x in prop::collection::vec(-2.0f64..2.0, 2),
            m in prop::collection::vec(0u32..4, 2),
            n in prop::collection::vec(0u32..4, 2),
        ) {
            let p = real_point(&x);
            let (m, n) = (mi(&m), mi(&n));
            let lhs = monomial_eval(&p, &m.checked_add(&n).unwrap(), None).unwrap();
            let rhs = monomial_eval(&p, &m, None).unwrap() * monomial_eval(&p, &n, None).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
