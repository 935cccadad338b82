//! Gram construction for a truncated sequence.
//!
//! The reproducing-kernel space is spanned by `a_(n) = (a_{n+k})_k` with
//! `⟨a_(m), a_(n)⟩ = a_{m+n}` (real kind) or `⟨z^m, z^n⟩ = c_{m,n}` (complex
//! kind). Everything here is evaluated through those inner products; shift
//! operators `A_i a_(m) = a_(m+e_i)` are index maps, never matrices on a
//! fixed truncated space, because truncation is not invariant under them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, CVector, HermitianEigen};
use crate::multiindex::{truncation_set, MultiIndex, TruncationKind};
use crate::sequences::{CoefficientVector, TruncatedSequence};
use crate::{Error, Kind, Result};

/// A Hermitian matrix of inner products.
///
/// Rows and columns are labelled by `labels`: single multi-indices for the
/// kernel form, ordered pairs `(m, n)` for the complex positivity test.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub kind: Kind,
    pub order: u32,
    pub index_list: Vec<MultiIndex>,
    pub paired: bool,
    pub entries: CMatrix,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Row labels as `(m, n)`; `n` is `None` unless pair-indexed.
    pub fn labels(&self) -> Vec<(MultiIndex, Option<MultiIndex>)> {
        if self.paired {
            let mut out = Vec::new();
            for m in &self.index_list {
                for n in &self.index_list {
                    out.push((m.clone(), Some(n.clone())));
                }
            }
            out
        } else {
            self.index_list.iter().map(|m| (m.clone(), None)).collect()
        }
    }
}

/// `⟨x^p, x^q⟩`: `a_{p+q}` (real) or `c_{p,q}` (complex).
pub fn inner(seq: &TruncatedSequence, p: &MultiIndex, q: &MultiIndex) -> Result<Complex64> {
    match seq.kind() {
        Kind::Real => Ok(Complex64::new(seq.real_or_depth(&p.checked_add(q)?)?, 0.0)),
        Kind::Complex => seq.complex_or_depth(p, q),
    }
}

/// Matrix of the positivity test at order `k`.
///
/// Real kind: `G[m][n] = a_{m+n}` for `|m|, |n| ≤ k`. Complex kind: indexed by
/// pairs, `G[(m,n)][(k,l)] = c_{m+l, n+k}`. Both need `2k ≤ max_degree`.
pub fn gram_matrix(seq: &TruncatedSequence, k: u32) -> Result<GramMatrix> {
    seq.require_degree(2 * k)?;
    let index_list = truncation_set(seq.dim(), TruncationKind::AllUpTo(k));
    let n = index_list.len();
    match seq.kind() {
        Kind::Real => {
            let mut g = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] = inner(seq, &index_list[i], &index_list[j])?;
                }
            }
            Ok(GramMatrix {
                kind: Kind::Real,
                order: k,
                index_list,
                paired: false,
                entries: g,
            })
        }
        Kind::Complex => {
            let mut g = CMatrix::zeros(n * n, n * n);
            for (a, m) in index_list.iter().enumerate() {
                for (b, nn) in index_list.iter().enumerate() {
                    for (c, kk) in index_list.iter().enumerate() {
                        for (d, l) in index_list.iter().enumerate() {
                            g[(a * n + b, c * n + d)] = seq.complex_or_depth(&m.checked_add(l)?, &nn.checked_add(kk)?)?;
                        }
                    }
                }
            }
            Ok(GramMatrix {
                kind: Kind::Complex,
                order: k,
                index_list,
                paired: true,
                entries: g,
            })
        }
    }
}

/// Inner-product matrix of the monomials `|n| ≤ k`, oriented so that
/// `⟨f_ξ, f_η⟩ = η* G ξ` for dense coefficient vectors.
///
/// Real kind coincides with [`gram_matrix`]; complex kind is `G[l][k] = c_{k,l}`
/// and only needs `k ≤ max_degree`.
pub fn kernel_gram(seq: &TruncatedSequence, k: u32) -> Result<GramMatrix> {
    if seq.kind() == Kind::Real {
        return gram_matrix(seq, k);
    }
    seq.require_degree(k)?;
    let index_list = truncation_set(seq.dim(), TruncationKind::AllUpTo(k));
    let n = index_list.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inner(seq, &index_list[j], &index_list[i])?;
        }
    }
    Ok(GramMatrix {
        kind: Kind::Complex,
        order: k,
        index_list,
        paired: false,
        entries: g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
    pub order: u32,
}

/// Positive-definiteness test of order `k`: passes iff the smallest
/// eigenvalue is at least `−tol · max(1, ‖G‖)`.
pub fn check_positive_definite(seq: &TruncatedSequence, k: u32, tol: f64) -> Result<PsdReport> {
    let g = gram_matrix(seq, k)?;
    let eig = HermitianEigen::new(&g.entries);
    let min = eig.min();
    Ok(PsdReport {
        min_eigenvalue: min,
        verdict: Verdict::from_bool(min >= -tol * eig.spectral_norm().max(1.0)),
        order: k,
    })
}

fn dense(xi: &CoefficientVector, index: &[MultiIndex]) -> Result<CVector> {
    Ok(CVector::from_vec(xi.to_dense(index)?))
}

/// `⟨f_ξ, f_η⟩ = Σ_{k,l} ξ_k conj(η_l) ⟨x^k, x^l⟩`.
pub fn gram_form(seq: &TruncatedSequence, xi: &CoefficientVector, eta: &CoefficientVector) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, xk) in xi.iter() {
        for (l, yl) in eta.iter() {
            acc += xk * yl.conj() * inner(seq, k, l)?;
        }
    }
    Ok(acc)
}

/// `⟨A_i f_ξ, f_η⟩ = Σ_{k,l} ξ_k conj(η_l) ⟨x^{k+e_i}, x^l⟩` (1-based `i`).
pub fn shift_form(seq: &TruncatedSequence, xi: &CoefficientVector, eta: &CoefficientVector, i: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, xk) in xi.iter() {
        let ki = k.shifted(i)?;
        for (l, yl) in eta.iter() {
            acc += xk * yl.conj() * inner(seq, &ki, l)?;
        }
    }
    Ok(acc)
}

/// The localized entry computed through the Gram form,
/// `⟨Σ_k ξ_k a_(m+k), Σ_l ξ_l a_(n+l)⟩`. Equals `a^ξ_{m+n}` (real) or `c^ξ_{m,n}` (complex).
pub fn localized_via_gram(
    seq: &TruncatedSequence,
    xi: &CoefficientVector,
    m: &MultiIndex,
    n: &MultiIndex,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, xk) in xi.iter() {
        let mk = m.checked_add(k)?;
        for (l, xl) in xi.iter() {
            acc += xk * xl.conj() * inner(seq, &mk, &n.checked_add(l)?)?;
        }
    }
    Ok(acc)
}

/// `p(ξ) = ‖Σ_k ξ_k a_(k)‖`.
///
/// The kernel Gram matrix of order `deg ξ` must be positive semidefinite at
/// `tol`; otherwise a positivity error is returned.
pub fn seminorm(seq: &TruncatedSequence, xi: &CoefficientVector, tol: f64) -> Result<f64> {
    if xi.dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: seq.dim(),
            found: xi.dim(),
        });
    }
    let g = kernel_gram(seq, xi.deg())?;
    let eig = HermitianEigen::new(&g.entries);
    let scale = eig.spectral_norm().max(1.0);
    if eig.min() < -tol * scale {
        return Err(Error::Positivity { eigenvalue: eig.min() });
    }
    let v = dense(xi, &g.index_list)?;
    let q = (v.adjoint() * &g.entries * &v)[(0, 0)].re;
    if q < -tol * scale * xi.l1_norm().powi(2).max(1.0) {
        return Err(Error::Positivity { eigenvalue: q });
    }
    Ok(q.max(0.0).sqrt())
}

/// `|p(ξ+η)² + p(ξ−η)² − 2p(ξ)² − 2p(η)²|`.
pub fn parallelogram_defect(seq: &TruncatedSequence, xi: &CoefficientVector, eta: &CoefficientVector, tol: f64) -> Result<f64> {
    let p = |v: &CoefficientVector| seminorm(seq, v, tol).map(|x| x * x);
    Ok((p(&xi.add(eta))? + p(&xi.sub(eta))? - 2.0 * p(xi)? - 2.0 * p(eta)?).abs())
}

/// The quotient of coefficient space by the null space `Δ = {ξ : p(ξ) = 0}`,
/// restricted to degree `k`.
#[derive(Debug, Clone)]
pub struct QuotientBasis {
    pub gram: GramMatrix,
    /// Spans `Δ` at degree `k` (eigenvectors of cut eigenvalues).
    pub null_basis: Vec<CoefficientVector>,
    /// `r × N` matrix `Λ_r^{1/2} U_r*`: column `n` holds the coordinates of
    /// `a_(n)` in an orthonormal basis of the quotient.
    pub coordinate_map: CMatrix,
    pub eigenvalues: Vec<f64>,
    /// Absolute eigenvalue cut, `tol · max(1, λ_max)`.
    pub cut: f64,
    pub tol: f64,
}

impl QuotientBasis {
    /// Dimension of the quotient, i.e. the numerical rank of the Gram matrix.
    pub fn dimension(&self) -> usize {
        self.coordinate_map.nrows()
    }

    /// Quotient coordinates of `h(ξ)`.
    pub fn coordinates(&self, xi: &CoefficientVector) -> Result<CVector> {
        Ok(&self.coordinate_map * dense(xi, &self.gram.index_list)?)
    }

    /// `p(ξ)²` through the Gram matrix.
    pub fn norm_sqr(&self, xi: &CoefficientVector) -> Result<f64> {
        let v = dense(xi, &self.gram.index_list)?;
        Ok((v.adjoint() * &self.gram.entries * &v)[(0, 0)].re)
    }

    /// Whether `ξ ∈ Δ` at the rank cut: `p(ξ)² ≤ cut · ‖ξ‖²`.
    pub fn is_null(&self, xi: &CoefficientVector) -> Result<bool> {
        let n2: f64 = xi.iter().map(|(_, z)| z.norm_sqr()).sum();
        Ok(self.norm_sqr(xi)? <= self.cut * n2.max(f64::MIN_POSITIVE))
    }

    /// Orthogonal projector, in coordinates of `basis`, onto the complement
    /// of the basis combinations that fall into `Δ`.
    pub fn projector_for(&self, basis: &[CoefficientVector]) -> Result<CMatrix> {
        let nb = basis.len();
        let mut c = CMatrix::zeros(self.dimension(), nb);
        for (j, xi) in basis.iter().enumerate() {
            c.set_column(j, &self.coordinates(xi)?);
        }
        // the Gram of the basis; its range is the quotient image
        Ok(crate::linalg::range_projector(&(c.adjoint() * &c), self.tol))
    }
}

/// Null space and quotient basis of the order-`k` kernel Gram matrix.
///
/// Eigenvalues at or below `tol · max(1, λ_max)` are treated as zero.
pub fn null_space(seq: &TruncatedSequence, k: u32, tol: f64) -> Result<QuotientBasis> {
    let gram = kernel_gram(seq, k)?;
    let eig = HermitianEigen::new(&gram.entries);
    let cut = tol * eig.max().max(1.0);
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] > cut).collect();
    let n = gram.size();
    let mut coordinate_map = CMatrix::zeros(kept.len(), n);
    for (row, &j) in kept.iter().enumerate() {
        let s = eig.values[j].sqrt();
        let u = eig.vectors.column(j);
        for col in 0..n {
            coordinate_map[(row, col)] = u[col].conj() * s;
        }
    }
    let null_basis = (0..eig.values.len())
        .filter(|&j| eig.values[j] <= cut)
        .map(|j| {
            let col: Vec<Complex64> = eig.vectors.column(j).iter().copied().collect();
            CoefficientVector::from_dense(seq.dim(), &gram.index_list, &col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuotientBasis {
        gram,
        null_basis,
        coordinate_map,
        eigenvalues: eig.values,
        cut,
        tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftReport {
    pub coordinate: usize,
    pub order: u32,
    /// `max |⟨A_i a_(m), a_(n)⟩ − ⟨a_(m), A_i a_(n)⟩|` over `|m|, |n| ≤ k`.
    pub symmetry_defect: f64,
    /// `(j, max_m ‖(A_iA_j − A_jA_i) a_(m)‖)` for every `j ≠ i`.
    pub commutator_defects: Vec<(usize, f64)>,
}

impl ShiftReport {
    pub fn max_defect(&self) -> f64 {
        self.commutator_defects
            .iter()
            .fold(self.symmetry_defect, |m, (_, d)| m.max(*d))
    }
}

/// Symmetry and commutation audit of the shift `A_i` on `a_(m)`, `|m| ≤ k`.
///
/// Needs `2k + 2 ≤ max_degree`. Commutators are measured in the Gram norm,
/// over those `m` with `2|m| + 4 ≤ max_degree`. Real kind only.
pub fn shift_forms(seq: &TruncatedSequence, k: u32, i: usize) -> Result<ShiftReport> {
    if seq.kind() != Kind::Real {
        return Err(Error::KindMismatch {
            expected: Kind::Real,
            found: seq.kind(),
        });
    }
    let d = seq.dim();
    if i == 0 || i > d {
        return Err(Error::CoordinateRange { index: i, dim: d });
    }
    seq.require_degree(2 * k + 2)?;
    let idx = truncation_set(d, TruncationKind::AllUpTo(k));
    let mut symmetry_defect = 0.0_f64;
    for m in &idx {
        for n in &idx {
            let lhs = inner(seq, &m.shifted(i)?, n)?;
            let rhs = inner(seq, m, &n.shifted(i)?)?;
            symmetry_defect = symmetry_defect.max((lhs - rhs).norm());
        }
    }
    let comm_deg = (seq.max_degree() / 2).checked_sub(2).map(|b| b.min(k));
    let comm_idx = comm_deg.map(|b| truncation_set(d, TruncationKind::AllUpTo(b))).unwrap_or_default();
    let mut commutator_defects = Vec::new();
    for j in (1..=d).filter(|&j| j != i) {
        let mut worst = 0.0_f64;
        for m in &comm_idx {
            // (A_i A_j − A_j A_i) a_(m) = a_(p) − a_(q)
            let p = m.shifted(j)?.shifted(i)?;
            let q = m.shifted(i)?.shifted(j)?;
            let norm2 = inner(seq, &p, &p)? - inner(seq, &p, &q)? * 2.0 + inner(seq, &q, &q)?;
            worst = worst.max(norm2.re.max(0.0).sqrt());
        }
        commutator_defects.push((j, worst));
    }
    Ok(ShiftReport {
        coordinate: i,
        order: k,
        symmetry_defect,
        commutator_defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use crate::real_point;
    use crate::sequences::{localize, moments_of, AtomicMeasure};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn xi1(c: &[f64]) -> CoefficientVector {
        CoefficientVector::from_real(1, c.iter().enumerate().map(|(k, &v)| (mi(&[k as u32]), v))).unwrap()
    }

    fn ones(d: u32) -> TruncatedSequence {
        TruncatedSequence::from_real_fn(1, d, |_| 1.0)
    }

    fn sym_pm1(d: u32) -> TruncatedSequence {
        let mu = AtomicMeasure::new(
            1,
            Kind::Real,
            vec![(real_point(&[-1.0]), 0.5), (real_point(&[1.0]), 0.5)],
        )
        .unwrap();
        moments_of(&mu, d)
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&ones(2), 1).unwrap();
        assert_eq!(g.entries, real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let g = gram_matrix(&sym_pm1(2), 1).unwrap();
        assert_eq!(g.entries, real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let g = gram_matrix(&sym_pm1(2), 0).unwrap();
        assert_eq!(g.entries, real_matrix(1, 1, &[1.0]));
        assert!(matches!(gram_matrix(&ones(3), 2), Err(Error::TruncationDepth { .. })));
    }

    #[test]
    fn complex_gram_is_pair_indexed() {
        let mu = AtomicMeasure::new(1, Kind::Complex, vec![(vec![Complex64::new(0.5, 1.0)], 1.0)]).unwrap();
        let seq = moments_of(&mu, 2);
        let g = gram_matrix(&seq, 1).unwrap();
        assert_eq!(g.size(), 4);
        assert_eq!(g.labels().len(), 4);
        assert!(crate::linalg::hermitian_defect(&g.entries) < 1e-15);
        // rows (m,n) = (1,0), cols (k,l) = (0,1): c_{m+l, n+k} = c_{2,0}
        let c20 = seq.complex(&mi(&[2]), &mi(&[0])).unwrap();
        assert_eq!(g.entries[(2, 1)], c20);
        assert!(check_positive_definite(&seq, 1, 1e-9).unwrap().verdict.passed());
    }

    #[test]
    fn psd_examples() {
        let r = check_positive_definite(&ones(4), 2, 1e-9).unwrap();
        assert!(r.verdict.passed());
        assert!(r.min_eigenvalue.abs() < 1e-14);
        let bad = TruncatedSequence::from_real_entries(1, 2, vec![(mi(&[0]), 1.0), (mi(&[1]), 0.0), (mi(&[2]), -1.0)]).unwrap();
        let r = check_positive_definite(&bad, 1, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);
        let zero = TruncatedSequence::zero(2, Kind::Real, 4);
        assert!(check_positive_definite(&zero, 2, 1e-9).unwrap().verdict.passed());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdict"], "fail");
        assert_eq!(json["order"], 1);
    }

    #[test]
    fn seminorm_examples() {
        assert!((seminorm(&ones(2), &xi1(&[1.0, 1.0]), 1e-9).unwrap() - 2.0).abs() < 1e-14);
        assert!(seminorm(&ones(2), &xi1(&[1.0, -1.0]), 1e-9).unwrap() < 1e-7);
        assert_eq!(seminorm(&ones(2), &CoefficientVector::zero(1), 1e-9).unwrap(), 0.0);
        let bad = TruncatedSequence::from_real_entries(1, 2, vec![(mi(&[0]), 1.0), (mi(&[1]), 0.0), (mi(&[2]), -1.0)]).unwrap();
        assert!(matches!(seminorm(&bad, &xi1(&[0.0, 1.0]), 1e-9), Err(Error::Positivity { .. })));
    }

    #[test]
    fn seminorm_squared_is_localized_mass() {
        let seq = sym_pm1(6);
        let xi = xi1(&[0.3, -1.2, 0.7]);
        let p = seminorm(&seq, &xi, 1e-9).unwrap();
        let l = localize(&seq, &xi).unwrap();
        assert!((p * p - l.real(&mi(&[0])).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn null_space_examples() {
        let q = null_space(&ones(4), 2, 1e-9).unwrap();
        assert_eq!(q.dimension(), 1);
        assert_eq!(q.null_basis.len(), 2);
        assert!(q.is_null(&xi1(&[1.0, -1.0, 0.0])).unwrap());
        assert!(!q.is_null(&xi1(&[1.0, 1.0, 0.0])).unwrap());
        for d in &q.null_basis {
            assert!(q.norm_sqr(d).unwrap() <= 1e-9);
        }
        let q = null_space(&sym_pm1(2), 1, 1e-9).unwrap();
        assert_eq!(q.dimension(), 2);
        assert!(q.null_basis.is_empty());
        let q = null_space(&TruncatedSequence::zero(1, Kind::Real, 4), 2, 1e-9).unwrap();
        assert_eq!(q.dimension(), 0);
        assert_eq!(q.null_basis.len(), 3);
    }

    #[test]
    fn quotient_coordinates_are_isometric() {
        let seq = sym_pm1(4);
        let q = null_space(&seq, 2, 1e-9).unwrap();
        // two atoms, so the quotient is two-dimensional
        assert_eq!(q.dimension(), 2);
        let xi = xi1(&[0.5, 1.0, -2.0]);
        let eta = xi1(&[1.0, 0.0, 1.0]);
        let (cx, ce) = (q.coordinates(&xi).unwrap(), q.coordinates(&eta).unwrap());
        let via_coords = (ce.adjoint() * cx)[(0, 0)];
        let via_gram = gram_form(&seq, &xi, &eta).unwrap();
        assert!((via_coords - via_gram).norm() < 1e-12);
        // x^2 - 1 vanishes on {±1}
        assert!(q.is_null(&xi1(&[-1.0, 0.0, 1.0])).unwrap());
    }

    #[test]
    fn shift_examples() {
        let r = shift_forms(&ones(4), 1, 1).unwrap();
        assert_eq!(r.symmetry_defect, 0.0);
        assert!(r.commutator_defects.is_empty());
        let mu = AtomicMeasure::new(2, Kind::Real, vec![(real_point(&[1.0, 2.0]), 1.0)]).unwrap();
        let r = shift_forms(&moments_of(&mu, 4), 1, 1).unwrap();
        assert_eq!(r.commutator_defects, vec![(2, 0.0)]);
        let r = shift_forms(&TruncatedSequence::zero(2, Kind::Real, 6), 2, 2).unwrap();
        assert_eq!(r.max_defect(), 0.0);
        assert!(shift_forms(&ones(3), 1, 1).is_err());
        assert!(shift_forms(&ones(4), 1, 2).is_err());
    }

    #[test]
    fn shift_form_matches_moment() {
        let seq = sym_pm1(4);
        // ⟨A_1 1, 1⟩ = a_1 = 0, ⟨A_1 x, 1⟩ = a_2 = 1
        let one = CoefficientVector::one(1);
        let x = xi1(&[0.0, 1.0]);
        assert_eq!(shift_form(&seq, &one, &one, 1).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(shift_form(&seq, &x, &one, 1).unwrap(), Complex64::new(1.0, 0.0));
    }
}
