//! Operator-valued measures from families, and their dilations.
//!
//! Over a finite basis `ξ^(1), …, ξ^(r)` the polarized forms give, at every
//! atom `x_j`, an `r × r` block `F_j` with `⟨F_j f, g⟩ = μ_{f,g}({x_j})`. The
//! blocks are positive semidefinite and sum to the Gram matrix of the basis.
//! Stacking `F_j^{1/2}` yields an operator `V` into a direct sum on which the
//! coordinate projections `E_j` form a spectral measure with `V* E_j V = F_j`.

use std::ops::Range;

use num_complex::Complex64;

use crate::families::{generate_certificate, monomial_basis, polarization_closure, polarize, MeasureFamily};
use crate::linalg::{hermitian_defect, max_abs, spectral_norm, CMatrix, CVector, HermitianEigen};
use crate::rkhs::{null_space, QuotientBasis};
use crate::sequences::{moments_of, AtomicMeasure, CoefficientVector, TruncatedSequence};
use crate::{Error, Kind, Point, Result};

/// Positive operator-valued measure on finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SemispectralMeasure {
    kind: Kind,
    dim: usize,
    points: Vec<Point>,
    blocks: Vec<CMatrix>,
    total: CMatrix,
}

impl SemispectralMeasure {
    /// Checks shapes and Hermitian symmetry; positivity is checked on dilation.
    pub fn new(kind: Kind, dim: usize, points: Vec<Point>, blocks: Vec<CMatrix>) -> Result<Self> {
        if points.len() != blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: blocks.len(),
            });
        }
        let r = blocks.first().map_or(0, |b| b.nrows());
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        let mut total = CMatrix::zeros(r, r);
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() != r || b.ncols() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    found: b.nrows(),
                });
            }
            let defect = hermitian_defect(b);
            if defect > crate::sequences::HERMITIAN_TOL * max_abs(b).max(1.0) {
                return Err(Error::NotHermitian {
                    defect,
                    at: format!("block {j}"),
                });
            }
            total += b;
        }
        Ok(SemispectralMeasure {
            kind,
            dim,
            points,
            blocks,
            total,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// `Σ_j F_j`.
    pub fn total(&self) -> &CMatrix {
        &self.total
    }

    /// Size `r` of the blocks.
    pub fn rank(&self) -> usize {
        self.total.nrows()
    }
}

/// Blocks `F_j[b][a] = μ_{ξ^(a), ξ^(b)}({x_j})`, compressed to the quotient.
///
/// The blocks are conjugated by the projector onto the part of `span(basis)`
/// that survives in the quotient by `Δ`, so a basis vector in `Δ` contributes
/// a (numerically) zero row and column. A block with an eigenvalue below
/// `−tol · max(1, ‖total‖)` is a defect of the family and is reported with
/// its atom index.
pub fn semispectral_from_family(
    family: &MeasureFamily,
    basis: &[CoefficientVector],
    quotient: &QuotientBasis,
    tol: f64,
) -> Result<SemispectralMeasure> {
    let missing: Vec<String> = polarization_closure(basis)
        .iter()
        .filter(|xi| !family.contains(xi))
        .map(|xi| xi.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Incomplete { missing });
    }
    let nb = basis.len();
    let mut forms = Vec::with_capacity(nb * nb);
    for a in basis {
        for b in basis {
            forms.push(polarize(family, a, b)?.measure);
        }
    }
    let probe = crate::sequences::SignedAtomicMeasure::combination(
        family.dim(),
        family.kind(),
        &forms.iter().map(|m| (Complex64::new(1.0, 0.0), m)).collect::<Vec<_>>(),
    )?;
    // the union of supports; cancellation in the probe could hide atoms, so
    // collect directly from the forms
    let mut points: Vec<Point> = Vec::new();
    for m in forms.iter().chain(std::iter::once(&probe)) {
        for a in m.atoms() {
            if !points.iter().any(|p| crate::sequences::same_point(p, &a.point)) {
                points.push(a.point.clone());
            }
        }
    }
    let projector = quotient.projector_for(basis)?;
    let blocks: Vec<CMatrix> = points
        .iter()
        .map(|x| {
            let region = [x.clone()];
            let raw = CMatrix::from_fn(nb, nb, |b, a| forms[a * nb + b].mass_of(&region));
            let p = &projector * raw * &projector;
            (&p + p.adjoint()).scale(0.5)
        })
        .collect();
    let measure = SemispectralMeasure::new(family.kind(), family.dim(), points, blocks)?;
    let scale = spectral_norm(measure.total()).max(1.0);
    for (j, b) in measure.blocks.iter().enumerate() {
        if nb == 0 {
            break;
        }
        let min = HermitianEigen::new(b).min();
        if min < -tol * scale {
            return Err(Error::PsdDefect { atom: j, eigenvalue: min });
        }
    }
    Ok(measure)
}

/// Spectral measure `E` on `K = ⊕_j ran F_j^{1/2}` together with `V: C^r → K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDilation {
    kind: Kind,
    dim: usize,
    points: Vec<Point>,
    v: CMatrix,
    ranges: Vec<Range<usize>>,
}

impl SpectralDilation {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// The `K × r` matrix `V`.
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Dimension of the dilation space `K`.
    pub fn space_dim(&self) -> usize {
        self.v.nrows()
    }

    /// Rows of `K` belonging to atom `j`.
    pub fn range(&self, j: usize) -> Range<usize> {
        self.ranges[j].clone()
    }

    /// The coordinate projection `E_j`.
    pub fn projection(&self, j: usize) -> CMatrix {
        let k = self.space_dim();
        let r = &self.ranges[j];
        CMatrix::from_fn(k, k, |a, b| {
            if a == b && r.contains(&a) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `V* X V`.
    pub fn compress(&self, x: &CMatrix) -> CMatrix {
        self.v.adjoint() * x * &self.v
    }

    /// `V e_a` where `basis[a]` is the constant polynomial.
    pub fn vacuum(&self, basis: &[CoefficientVector]) -> Result<CVector> {
        let one = CoefficientVector::one(self.dim);
        let a = basis
            .iter()
            .position(|xi| *xi == one)
            .ok_or_else(|| Error::Precondition("basis does not contain the constant polynomial".into()))?;
        Ok(self.v.column(a).into_owned())
    }
}

/// Minimal Naimark dilation of `F`.
///
/// Each block is factored as `F_j = R_j* R_j` with `R_j = Λ^{1/2} W*` over
/// the eigenvalues above `tol · λ_max(total)`; `V` stacks the `R_j`, so
/// `V*V = total` and `V* E_j V = F_j` up to the clipped directions.
pub fn naimark_dilate(f: &SemispectralMeasure, tol: f64) -> Result<SpectralDilation> {
    let r = f.rank();
    let lmax = if r == 0 { 0.0 } else { HermitianEigen::new(&f.total).max().max(0.0) };
    let cut = tol * lmax;
    let mut rows: Vec<CVector> = Vec::new();
    let mut ranges = Vec::with_capacity(f.blocks.len());
    for b in &f.blocks {
        let start = rows.len();
        if r > 0 {
            let eig = HermitianEigen::new(b);
            if eig.min() < -cut.max(f64::MIN_POSITIVE) {
                return Err(Error::Positivity { eigenvalue: eig.min() });
            }
            for (k, &lam) in eig.values.iter().enumerate() {
                if lam > cut {
                    let s = lam.sqrt();
                    rows.push(eig.vectors.column(k).map(|z| z.conj() * s));
                }
            }
        }
        ranges.push(start..rows.len());
    }
    let mut v = CMatrix::zeros(rows.len(), r);
    for (i, row) in rows.iter().enumerate() {
        for c in 0..r {
            v[(i, c)] = row[c];
        }
    }
    Ok(SpectralDilation {
        kind: f.kind,
        dim: f.dim,
        points: f.points.clone(),
        v,
        ranges,
    })
}

/// Either flavour of operator-valued measure on finitely many atoms.
pub trait OperatorMeasure {
    fn atoms(&self) -> &[Point];
    /// Dimension of the space the operators act on.
    fn operator_dim(&self) -> usize;
    /// The operator at atom `j`.
    fn operator(&self, j: usize) -> CMatrix;
}

impl OperatorMeasure for SemispectralMeasure {
    fn atoms(&self) -> &[Point] {
        &self.points
    }
    fn operator_dim(&self) -> usize {
        self.rank()
    }
    fn operator(&self, j: usize) -> CMatrix {
        self.blocks[j].clone()
    }
}

impl OperatorMeasure for SpectralDilation {
    fn atoms(&self) -> &[Point] {
        &self.points
    }
    fn operator_dim(&self) -> usize {
        self.space_dim()
    }
    fn operator(&self, j: usize) -> CMatrix {
        self.projection(j)
    }
}

/// `Σ_j φ(x_j) O_j`.
pub fn multiplication_operator<M: OperatorMeasure>(m: &M, phi: impl Fn(&[Complex64]) -> Complex64) -> CMatrix {
    let n = m.operator_dim();
    let mut out = CMatrix::zeros(n, n);
    for (j, x) in m.atoms().iter().enumerate() {
        out += m.operator(j) * phi(x);
    }
    out
}

/// `Σ_j φ(x_j) ⟨O_j f, g⟩`.
pub fn spectral_integral<M: OperatorMeasure>(
    m: &M,
    phi: impl Fn(&[Complex64]) -> Complex64,
    f: &CVector,
    g: &CVector,
) -> Result<Complex64> {
    let n = m.operator_dim();
    for len in [f.len(), g.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok((g.adjoint() * multiplication_operator(m, phi) * f)[(0, 0)])
}

/// `|∫ψ₁ψ₂ ⟨O f, g⟩ − ⟨T_{ψ₁} T_{ψ₂} f, g⟩|`; zero for spectral measures,
/// generally not for semispectral ones.
pub fn multiplicativity_defect<M: OperatorMeasure>(
    m: &M,
    psi1: impl Fn(&[Complex64]) -> Complex64,
    psi2: impl Fn(&[Complex64]) -> Complex64,
    f: &CVector,
    g: &CVector,
) -> Result<f64> {
    let joint = spectral_integral(m, |x| psi1(x) * psi2(x), f, g)?;
    let t = multiplication_operator(m, &psi1) * multiplication_operator(m, &psi2);
    Ok((joint - (g.adjoint() * t * f)[(0, 0)]).norm())
}

/// `B_i = Σ_j (x_j)_i E_j` (1-based `i`).
pub fn dilated_multiplication(d: &SpectralDilation, i: usize) -> Result<CMatrix> {
    if i == 0 || i > d.dim {
        return Err(Error::CoordinateRange { index: i, dim: d.dim });
    }
    Ok(multiplication_operator(d, |x| x[i - 1]))
}

/// The scalar measure `Σ_j ⟨E_j v, v⟩ δ_{x_j}`.
pub fn vacuum_measure(d: &SpectralDilation, vacuum: &CVector) -> Result<AtomicMeasure> {
    if vacuum.len() != d.space_dim() {
        return Err(Error::DimensionMismatch {
            expected: d.space_dim(),
            found: vacuum.len(),
        });
    }
    let atoms = d.points.iter().zip(&d.ranges).map(|(x, r)| {
        let w: f64 = r.clone().map(|k| vacuum[k].norm_sqr()).sum();
        (x.clone(), w)
    });
    AtomicMeasure::new(d.dim, d.kind, atoms)
}

/// `a_n = Σ_j x_j^n ⟨E_j v, v⟩` (or `c_{m,n}` with `z^m z̄^n`) up to `max_degree`.
pub fn reconstruct_moments(d: &SpectralDilation, vacuum: &CVector, max_degree: u32) -> Result<TruncatedSequence> {
    Ok(moments_of(&vacuum_measure(d, vacuum)?, max_degree))
}

/// Every stage of the measure → family → dilation chain.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub basis: Vec<CoefficientVector>,
    pub sequence: TruncatedSequence,
    pub family: MeasureFamily,
    pub quotient: QuotientBasis,
    pub semispectral: SemispectralMeasure,
    pub dilation: SpectralDilation,
    pub vacuum: CVector,
}

/// Runs the chain for `mu` over the monomial basis of degree `order`.
pub fn certificate_pipeline(mu: &AtomicMeasure, order: u32, tol: f64) -> Result<Pipeline> {
    let basis = monomial_basis(mu.dim(), order);
    let degree = match mu.kind() {
        Kind::Real => 2 * order,
        Kind::Complex => order,
    };
    let sequence = moments_of(mu, degree);
    let family = generate_certificate(mu, &polarization_closure(&basis))?;
    let quotient = null_space(&sequence, order, tol)?;
    let semispectral = semispectral_from_family(&family, &basis, &quotient, tol)?;
    let dilation = naimark_dilate(&semispectral, tol)?;
    let vacuum = dilation.vacuum(&basis)?;
    Ok(Pipeline {
        basis,
        sequence,
        family,
        quotient,
        semispectral,
        dilation,
        vacuum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};
    use crate::real_point;

    fn sym_pm1() -> AtomicMeasure {
        AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[-1.0]), 0.5), (real_point(&[1.0]), 0.5)]).unwrap()
    }

    #[test]
    fn blocks_of_symmetric_measure() {
        let p = certificate_pipeline(&sym_pm1(), 1, 1e-12).unwrap();
        let f = &p.semispectral;
        assert_eq!(f.points().len(), 2);
        let minus = real_matrix(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        let plus = real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        for (x, b) in f.points().iter().zip(f.blocks()) {
            let expected = if x[0].re > 0.0 { &plus } else { &minus };
            assert!(max_abs(&(b - expected)) < 1e-15);
        }
        assert!(max_abs(&(f.total() - CMatrix::identity(2, 2))) < 1e-15);
        let r = reconstruct_moments(&p.dilation, &p.vacuum, 4).unwrap();
        for (a, b) in r.real_values().iter().zip([1.0, 0.0, 1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_atom_and_scaling() {
        let mu = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[1.0]), 3.0)]).unwrap();
        let p = certificate_pipeline(&mu, 0, 1e-12).unwrap();
        assert_eq!(p.semispectral.blocks().len(), 1);
        assert!((p.semispectral.blocks()[0][(0, 0)] - c(3.0, 0.0)).norm() < 1e-15);
        let r = reconstruct_moments(&p.dilation, &p.vacuum, 5).unwrap();
        assert!(r.real_values().iter().all(|a| (a - 3.0).abs() < 1e-14));
    }

    #[test]
    fn null_basis_vector_is_projected_out() {
        // on δ_1 the polynomial x − 1 vanishes, so {1, x} has a one-dimensional quotient
        let mu = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[1.0]), 1.0)]).unwrap();
        let p = certificate_pipeline(&mu, 1, 1e-12).unwrap();
        assert_eq!(p.quotient.dimension(), 1);
        assert_eq!(p.dilation.space_dim(), 1);
        let diff = p.basis[1].sub(&p.basis[0]);
        let coords = p.quotient.projector_for(&p.basis).unwrap() * CVector::from_vec(diff.to_dense(&[crate::MultiIndex::zero(1), crate::MultiIndex::unit(1, 1).unwrap()]).unwrap());
        assert!(coords.norm() < 1e-12);
    }

    #[test]
    fn naimark_examples() {
        let half = CMatrix::from_element(1, 1, c(0.5, 0.0));
        let f = SemispectralMeasure::new(Kind::Real, 1, vec![real_point(&[1.0]), real_point(&[-1.0])], vec![half.clone(), half])
            .unwrap();
        let d = naimark_dilate(&f, 1e-12).unwrap();
        assert_eq!(d.space_dim(), 2);
        let s = 0.5f64.sqrt();
        assert!((d.v()[(0, 0)].re - s).abs() < 1e-15 && (d.v()[(1, 0)].re - s).abs() < 1e-15);
        for j in 0..2 {
            assert!((d.compress(&d.projection(j))[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        }

        let id = CMatrix::identity(3, 3);
        let f = SemispectralMeasure::new(Kind::Real, 1, vec![real_point(&[2.0])], vec![id.clone()]).unwrap();
        let d = naimark_dilate(&f, 1e-12).unwrap();
        assert!(max_abs(&(d.projection(0) - &id)) < 1e-15);
        assert!(max_abs(&(d.v().adjoint() * d.v() - &id)) < 1e-15);
        assert!(max_abs(&(dilated_multiplication(&d, 1).unwrap() - id.scale(2.0))) < 1e-15);

        let f = SemispectralMeasure::new(
            Kind::Real,
            1,
            vec![real_point(&[0.0]), real_point(&[1.0])],
            vec![real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]), real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        let d = naimark_dilate(&f, 1e-12).unwrap();
        assert_eq!(d.space_dim(), 2);
        assert_eq!(d.range(0), 0..1);
        assert_eq!(d.range(1), 1..2);

        let neg = SemispectralMeasure::new(Kind::Real, 1, vec![real_point(&[0.0])], vec![real_matrix(1, 1, &[-1.0])]).unwrap();
        assert!(matches!(naimark_dilate(&neg, 1e-12), Err(Error::Positivity { .. })));
    }

    #[test]
    fn spectral_integrals() {
        let p = certificate_pipeline(&sym_pm1(), 1, 1e-12).unwrap();
        let e0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let f = &p.semispectral;
        assert!((spectral_integral(f, |_| c(1.0, 0.0), &e0, &e0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(spectral_integral(f, |x| x[0], &e0, &e0).unwrap().norm() < 1e-15);
        assert_eq!(spectral_integral(f, |_| c(0.0, 0.0), &e0, &e0).unwrap(), c(0.0, 0.0));

        let b = dilated_multiplication(&p.dilation, 1).unwrap();
        let v0 = &p.vacuum;
        assert!((v0.adjoint() * &b * v0)[(0, 0)].norm() < 1e-15);
        assert!(hermitian_defect(&b) == 0.0);
    }

    #[test]
    fn semispectral_is_not_multiplicative() {
        // two atoms ±1 sharing the one-dimensional space equally
        let half = CMatrix::from_element(1, 1, c(0.5, 0.0));
        let f = SemispectralMeasure::new(Kind::Real, 1, vec![real_point(&[1.0]), real_point(&[-1.0])], vec![half.clone(), half])
            .unwrap();
        let e = CVector::from_element(1, c(1.0, 0.0));
        let x = |p: &[Complex64]| p[0];
        // ∫x² dF = 1 while (∫x dF)² = 0
        assert!((multiplicativity_defect(&f, x, x, &e, &e).unwrap() - 1.0).abs() < 1e-15);
        let d = naimark_dilate(&f, 1e-12).unwrap();
        let v = d.v().column(0).into_owned();
        assert!(multiplicativity_defect(&d, x, x, &v, &v).unwrap() < 1e-15);
    }
}
