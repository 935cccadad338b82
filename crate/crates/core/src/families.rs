//! Families of measures indexed by coefficient vectors.
//!
//! A family `{μ_ξ}` certifies a sequence when every member reproduces the
//! low-order part of the localized sequence `a^ξ` and the combinations
//! `μ_{ξ+η} + μ_{ξ−η} − 2μ_η` are positive. Verification here is finite: it
//! only sees the members that were supplied, and every missing combination is
//! reported by name.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_defect, CMatrix, HermitianEigen};
use crate::multiindex::{monomial_eval, truncation_set, MultiIndex, TruncationKind};
use crate::rkhs::{gram_form, seminorm, Verdict};
use crate::sequences::{
    localize_scale, localized_complex_entry, localized_real_entry, square_density, AtomicMeasure, CoefficientVector, SignedAtomicMeasure, TruncatedSequence,
};
use crate::{Error, Kind, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GeneratedFromMeasure,
    UserSupplied,
}

/// `{μ_ξ}` keyed by the canonical form of `ξ` (exact coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    dim: usize,
    kind: Kind,
    members: BTreeMap<CoefficientVector, AtomicMeasure>,
    pub provenance: Provenance,
}

impl MeasureFamily {
    pub fn new(dim: usize, kind: Kind, provenance: Provenance) -> Self {
        MeasureFamily {
            dim,
            kind,
            members: BTreeMap::new(),
            provenance,
        }
    }

    /// Adds or replaces the member for `xi`. Whether `μ_0` vanishes is left
    /// to [`verify_parallelogram_positivity`], which reports it.
    pub fn insert(&mut self, xi: CoefficientVector, mu: AtomicMeasure) -> Result<()> {
        for found in [xi.dim(), mu.dim()] {
            if found != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found,
                });
            }
        }
        if mu.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: mu.kind(),
            });
        }
        self.members.insert(xi, mu);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn get(&self, xi: &CoefficientVector) -> Option<&AtomicMeasure> {
        self.members.get(xi)
    }

    pub fn contains(&self, xi: &CoefficientVector) -> bool {
        self.members.contains_key(xi)
    }

    pub fn keys(&self) -> impl Iterator<Item = &CoefficientVector> {
        self.members.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CoefficientVector, &AtomicMeasure)> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members for `xis`, or an incompleteness error naming all that are absent.
    fn require_all<'a>(&'a self, xis: &[CoefficientVector]) -> Result<Vec<&'a AtomicMeasure>> {
        let missing = missing_members(self, xis);
        if !missing.is_empty() {
            return Err(Error::Incomplete { missing });
        }
        Ok(xis.iter().map(|x| &self.members[x]).collect())
    }
}

fn missing_members(family: &MeasureFamily, xis: &[CoefficientVector]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for xi in xis {
        let name = xi.to_string();
        if !family.contains(xi) && !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

/// The family `μ_ξ = |p_ξ|² dμ` over `xi_set`.
pub fn generate_certificate(mu: &AtomicMeasure, xi_set: &[CoefficientVector]) -> Result<MeasureFamily> {
    let mut family = MeasureFamily::new(mu.dim(), mu.kind(), Provenance::GeneratedFromMeasure);
    for xi in xi_set {
        family.insert(xi.clone(), square_density(mu, xi)?)?;
    }
    Ok(family)
}

fn push_unique(out: &mut Vec<CoefficientVector>, xi: CoefficientVector) {
    if !out.contains(&xi) {
        out.push(xi);
    }
}

/// `ξ+η`, `ξ−η` and `η` for every pair.
pub fn parallelogram_closure(pairs: &[(CoefficientVector, CoefficientVector)]) -> Vec<CoefficientVector> {
    let mut out = Vec::new();
    for (xi, eta) in pairs {
        push_unique(&mut out, xi.add(eta));
        push_unique(&mut out, xi.sub(eta));
        push_unique(&mut out, eta.clone());
    }
    out
}

/// The four combinations `ξ ± η`, `ξ ± iη` polarizing `(ξ, η)`.
pub fn polarization_terms(xi: &CoefficientVector, eta: &CoefficientVector) -> [CoefficientVector; 4] {
    let ieta = eta.mul_i();
    [xi.add(eta), xi.sub(eta), xi.add(&ieta), xi.sub(&ieta)]
}

/// Every member needed to polarize all ordered pairs of `basis` (including `a = b`).
pub fn polarization_closure(basis: &[CoefficientVector]) -> Vec<CoefficientVector> {
    let mut out = Vec::new();
    for a in basis {
        for b in basis {
            for xi in polarization_terms(a, b) {
                push_unique(&mut out, xi);
            }
        }
    }
    out
}

/// Scalars used by the homogeneity audit.
pub fn homogeneity_scalars() -> [Complex64; 3] {
    [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]
}

/// `ξ` and `zξ` for `z ∈ {−1, i, 2}`.
pub fn homogeneity_closure(basis: &[CoefficientVector]) -> Vec<CoefficientVector> {
    let mut out = Vec::new();
    for xi in basis {
        push_unique(&mut out, xi.clone());
        for z in homogeneity_scalars() {
            push_unique(&mut out, xi.scale(z));
        }
    }
    out
}

/// Monomials `x^k` with `|k| ≤ deg`, as unit coefficient vectors.
pub fn monomial_basis(dim: usize, deg: u32) -> Vec<CoefficientVector> {
    truncation_set(dim, TruncationKind::AllUpTo(deg))
        .into_iter()
        .map(CoefficientVector::unit)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub xi: String,
    /// `n` (real) or `(m, n)` (complex).
    pub index: String,
    pub expected: Complex64,
    pub measured: Complex64,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub checks: Vec<MomentCheck>,
    pub max_residual: f64,
    pub verdict: Verdict,
}

/// Checks every member against the localized sequence.
///
/// Real kind compares `a^ξ_n` with `∫ x^n dμ_ξ` for `n ∈ {0, e_i, 2e_i}`;
/// mixed second-order indices are not part of the criterion. Complex kind
/// compares `c^ξ_{m,n}` with `∫ z^m z̄^n dμ_ξ` for `m, n ∈ {0, e_i}`. A check
/// passes when the residual is at most `tol · max(1, ‖ξ‖₁² max|a|)`.
pub fn verify_moment_conditions(family: &MeasureFamily, seq: &TruncatedSequence, tol: f64) -> Result<MomentReport> {
    let xis: Vec<CoefficientVector> = family.keys().cloned().collect();
    verify_moment_conditions_for(family, seq, &xis, tol)
}

/// [`verify_moment_conditions`] restricted to `xis`, which must all be members.
pub fn verify_moment_conditions_for(
    family: &MeasureFamily,
    seq: &TruncatedSequence,
    xis: &[CoefficientVector],
    tol: f64,
) -> Result<MomentReport> {
    if seq.kind() != family.kind() {
        return Err(Error::KindMismatch {
            expected: family.kind(),
            found: seq.kind(),
        });
    }
    let members = family.require_all(xis)?;
    let dim = family.dim();
    let mut checks = Vec::new();
    for (xi, mu) in xis.iter().zip(members) {
        seq.require_degree(match seq.kind() {
            Kind::Real => 2 * xi.deg() + 2,
            Kind::Complex => xi.deg() + 1,
        })?;
        let scale = localize_scale(seq, xi);
        let mut record = |index: String, expected: Complex64, measured: Complex64| {
            let residual = (expected - measured).norm();
            checks.push(MomentCheck {
                xi: xi.to_string(),
                index,
                expected,
                measured,
                residual,
                scale,
                pass: residual <= tol * scale,
            });
        };
        match seq.kind() {
            Kind::Real => {
                for n in truncation_set(dim, TruncationKind::N1Union2N1) {
                    let expected = localized_real_entry(seq, xi, &n)?;
                    let measured = mu.integrate(|x| monomial_eval(x, &n, None).expect("dimension checked"));
                    record(n.to_string(), Complex64::new(expected, 0.0), measured);
                }
            }
            Kind::Complex => {
                let n1 = truncation_set(dim, TruncationKind::N1);
                for m in &n1 {
                    for n in &n1 {
                        let expected = localized_complex_entry(seq, xi, m, n)?;
                        let measured = mu.integrate(|z| monomial_eval(z, m, Some(n)).expect("dimension checked"));
                        record(format!("({m}, {n})"), expected, measured);
                    }
                }
            }
        }
    }
    let max_residual = checks.iter().fold(0.0_f64, |m, c| m.max(c.residual));
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.pass));
    Ok(MomentReport {
        checks,
        max_residual,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelogramCheck {
    pub xi: String,
    pub eta: String,
    /// Smallest merged weight of `μ_{ξ+η} + μ_{ξ−η} − 2μ_η` (0 when empty).
    pub min_weight: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelogramReport {
    pub checks: Vec<ParallelogramCheck>,
    /// Whether `μ_0` vanishes, when `0` is a member.
    pub origin_zero: Option<bool>,
    pub verdict: Verdict,
}

/// `μ_{ξ+η} + μ_{ξ−η} − 2μ_η` on the merged support.
pub fn parallelogram_residual(
    family: &MeasureFamily,
    xi: &CoefficientVector,
    eta: &CoefficientVector,
) -> Result<SignedAtomicMeasure> {
    let m = family.require_all(&[xi.add(eta), xi.sub(eta), eta.clone()])?;
    let one = Complex64::new(1.0, 0.0);
    SignedAtomicMeasure::combination(
        family.dim(),
        family.kind(),
        &[(one, m[0]), (one, m[1]), (Complex64::new(-2.0, 0.0), m[2])],
    )
}

/// Positivity of `μ_{ξ+η} + μ_{ξ−η} − 2μ_η` for every pair, atom by atom.
///
/// A pair passes when every merged weight is at least `−tol · max(1, M)`, with
/// `M` the total mass entering the combination. When `0` is a member its
/// measure must have mass at most `tol`.
pub fn verify_parallelogram_positivity(
    family: &MeasureFamily,
    pairs: &[(CoefficientVector, CoefficientVector)],
    tol: f64,
) -> Result<ParallelogramReport> {
    let missing = missing_members(family, &parallelogram_closure(pairs));
    if !missing.is_empty() {
        return Err(Error::Incomplete { missing });
    }
    let mut checks = Vec::with_capacity(pairs.len());
    for (xi, eta) in pairs {
        let residual = parallelogram_residual(family, xi, eta)?;
        let mass = family.get(&xi.add(eta)).unwrap().total_mass()
            + family.get(&xi.sub(eta)).unwrap().total_mass()
            + 2.0 * family.get(eta).unwrap().total_mass();
        let min_weight = residual.atoms().iter().fold(0.0_f64, |m, a| m.min(a.weight.re));
        let threshold = -tol * mass.max(1.0);
        checks.push(ParallelogramCheck {
            xi: xi.to_string(),
            eta: eta.to_string(),
            min_weight,
            threshold,
            pass: min_weight >= threshold,
        });
    }
    let origin_zero = family.get(&CoefficientVector::zero(family.dim())).map(|m| m.total_mass() <= tol);
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.pass) && origin_zero.unwrap_or(true));
    Ok(ParallelogramReport {
        checks,
        origin_zero,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedForm {
    pub xi: CoefficientVector,
    pub eta: CoefficientVector,
    pub measure: SignedAtomicMeasure,
}

/// `μ_{ξ,η} = ¼(μ_{ξ+η} − μ_{ξ−η} + iμ_{ξ+iη} − iμ_{ξ−iη})`.
pub fn polarize(family: &MeasureFamily, xi: &CoefficientVector, eta: &CoefficientVector) -> Result<PolarizedForm> {
    let terms = polarization_terms(xi, eta);
    let m = family.require_all(&terms)?;
    let q = 0.25;
    let measure = SignedAtomicMeasure::combination(
        family.dim(),
        family.kind(),
        &[
            (Complex64::new(q, 0.0), m[0]),
            (Complex64::new(-q, 0.0), m[1]),
            (Complex64::new(0.0, q), m[2]),
            (Complex64::new(0.0, -q), m[3]),
        ],
    )?;
    Ok(PolarizedForm {
        xi: xi.clone(),
        eta: eta.clone(),
        measure,
    })
}

/// A set of atoms on which the forms are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Full,
    Points(Vec<Point>),
}

impl Region {
    fn mass(&self, m: &SignedAtomicMeasure) -> Complex64 {
        match self {
            Region::Full => m.total_mass(),
            Region::Points(p) => m.mass_of(p),
        }
    }

    fn label(&self) -> String {
        match self {
            Region::Full => "full".to_string(),
            Region::Points(p) => {
                let pts: Vec<String> = p
                    .iter()
                    .map(|x| {
                        let c: Vec<String> = x
                            .iter()
                            .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{z}") })
                            .collect();
                        format!("({})", c.join(","))
                    })
                    .collect();
                format!("{{{}}}", pts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionCheck {
    pub region: String,
    /// `F[a][b] = μ_{ξ_b, ξ_a}(σ)`, so that `⟨F f, g⟩ = μ_{f,g}(σ)`.
    #[serde(skip)]
    pub form: CMatrix,
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
    /// Largest `|μ_{ξ,η}(σ)| − p(ξ)p(η)`.
    pub schwarz_excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SesquilinearReport {
    pub regions: Vec<RegionCheck>,
    /// `p(ξ_a)` for each basis vector.
    pub seminorms: Vec<f64>,
    /// Largest `|μ_{ξ,ξ}(X) − p(ξ)²|`.
    pub total_mass_defect: f64,
    /// Largest `|μ_{ξ,η}(X) − ⟨f_ξ, f_η⟩|` over basis pairs.
    pub gram_defect: f64,
    /// Largest atom-wise `|μ_{ξ,η} − conj μ_{η,ξ}|`.
    pub conjugate_defect: f64,
    /// Largest atom-wise `|μ_{zξ} − |z|²μ_ξ|`, when audited.
    pub homogeneity_defect: Option<f64>,
    pub verdict: Verdict,
}

/// Audits the polarized forms over `basis`.
///
/// For each region the matrix of `μ_{ξ_a,ξ_b}(σ)` must be Hermitian positive
/// semidefinite and obey `|μ_{ξ,η}(σ)| ≤ p(ξ)p(η)`; on the full space the
/// diagonal must equal `p(ξ)²` and the whole matrix must match the Gram form
/// of `seq`. With `homogeneity`, `μ_{zξ} = |z|²μ_ξ` is checked for
/// `z ∈ {−1, i, 2}`.
pub fn sesquilinear_audit(
    family: &MeasureFamily,
    basis: &[CoefficientVector],
    regions: &[Region],
    seq: &TruncatedSequence,
    tol: f64,
    homogeneity: bool,
) -> Result<SesquilinearReport> {
    let mut needed = polarization_closure(basis);
    if homogeneity {
        for xi in homogeneity_closure(basis) {
            push_unique(&mut needed, xi);
        }
    }
    let missing = missing_members(family, &needed);
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
    let form = |a: usize, b: usize| &forms[a * nb + b];
    let p: Vec<f64> = basis.iter().map(|xi| seminorm(seq, xi, tol)).collect::<Result<_>>()?;

    let mut region_checks = Vec::with_capacity(regions.len());
    for region in regions {
        let f = CMatrix::from_fn(nb, nb, |a, b| region.mass(form(b, a)));
        let scale = crate::linalg::max_abs(&f).max(1.0);
        let defect = hermitian_defect(&f);
        let min_eigenvalue = if nb == 0 { 0.0 } else { HermitianEigen::new(&f).min() };
        let mut schwarz_excess = f64::NEG_INFINITY;
        let mut schwarz_ok = true;
        for a in 0..nb {
            for b in 0..nb {
                let bound = p[a] * p[b];
                let excess = f[(a, b)].norm() - bound;
                schwarz_excess = schwarz_excess.max(excess);
                schwarz_ok &= excess <= tol * bound.max(1.0);
            }
        }
        if nb == 0 {
            schwarz_excess = 0.0;
        }
        let pass = defect <= tol * scale && min_eigenvalue >= -tol * scale && schwarz_ok;
        region_checks.push(RegionCheck {
            region: region.label(),
            form: f,
            hermitian_defect: defect,
            min_eigenvalue,
            schwarz_excess,
            pass,
        });
    }

    let mut total_mass_ok = true;
    let mut total_mass_defect = 0.0_f64;
    let mut gram_ok = true;
    let mut gram_defect = 0.0_f64;
    let mut conjugate_ok = true;
    let mut conjugate_defect = 0.0_f64;
    for a in 0..nb {
        let d = (form(a, a).total_mass() - Complex64::new(p[a] * p[a], 0.0)).norm();
        total_mass_defect = total_mass_defect.max(d);
        total_mass_ok &= d <= tol * (p[a] * p[a]).max(1.0);
        for b in 0..nb {
            let g = gram_form(seq, &basis[a], &basis[b])?;
            let d = (form(a, b).total_mass() - g).norm();
            gram_defect = gram_defect.max(d);
            gram_ok &= d <= tol * (p[a] * p[b]).max(1.0);
            let d = form(a, b).max_difference(&form(b, a).conj());
            conjugate_defect = conjugate_defect.max(d);
            conjugate_ok &= d <= tol * form(a, b).variation().max(1.0);
        }
    }

    let mut homogeneity_ok = true;
    let homogeneity_defect = if homogeneity {
        let mut worst = 0.0_f64;
        for xi in basis {
            let base = family.get(xi).unwrap();
            for z in homogeneity_scalars() {
                let scaled = family.get(&xi.scale(z)).unwrap();
                let d = scaled.to_signed().max_difference(&base.scaled(z.norm_sqr()).to_signed());
                worst = worst.max(d);
                homogeneity_ok &= d <= tol * (z.norm_sqr() * base.total_mass()).max(1.0);
            }
        }
        Some(worst)
    } else {
        None
    };

    let verdict = Verdict::from_bool(
        region_checks.iter().all(|r| r.pass) && total_mass_ok && gram_ok && conjugate_ok && homogeneity_ok,
    );
    Ok(SesquilinearReport {
        regions: region_checks,
        seminorms: p,
        total_mass_defect,
        gram_defect,
        conjugate_defect,
        homogeneity_defect,
        verdict,
    })
}

/// Unit coefficient vector `x^n` from raw exponents.
pub fn monomial(exponents: &[u32]) -> Result<CoefficientVector> {
    Ok(CoefficientVector::unit(MultiIndex::new(exponents.to_vec())?))
}
