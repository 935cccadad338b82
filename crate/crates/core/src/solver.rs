//! Solvers for the order-two truncations.
//!
//! For each ξ the data `a^ξ_n`, `n ∈ {0, e_i, 2e_i}` (real) or `c^ξ_{m,n}`,
//! `m, n ∈ {0, e_i}` (complex) only fixes mass, first moments and a handful
//! of second moments. Such targets are solvable in finitely supported
//! measures exactly when a Cauchy–Schwarz condition holds, and a solution is
//! written down in closed form.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::families::{verify_parallelogram_positivity, MeasureFamily, ParallelogramReport, Provenance};
use crate::linalg::{hermitian_defect, max_abs, CMatrix, HermitianEigen};
use crate::multiindex::MultiIndex;
use crate::sequences::{localized_complex_entry, localized_real_entry, AtomicMeasure, CoefficientVector, TruncatedSequence};
use crate::{Error, Kind, Point, Result};

/// Mass, first moments, and the second-order data a truncation prescribes.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationTargets {
    Real {
        mass: f64,
        /// `t_{e_i}`
        first: Vec<f64>,
        /// `t_{2e_i}`
        second_diag: Vec<f64>,
    },
    Complex {
        mass: f64,
        /// `c_{e_i,0}`
        means: Vec<Complex64>,
        /// `c_{e_i,e_j}`
        corr: CMatrix,
    },
}

impl TruncationTargets {
    pub fn real(mass: f64, first: Vec<f64>, second_diag: Vec<f64>) -> Result<Self> {
        if first.len() != second_diag.len() || first.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: second_diag.len(),
            });
        }
        if !mass.is_finite() || first.iter().chain(&second_diag).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        Ok(TruncationTargets::Real { mass, first, second_diag })
    }

    pub fn complex(mass: f64, means: Vec<Complex64>, corr: CMatrix) -> Result<Self> {
        let d = means.len();
        if d == 0 || corr.nrows() != d || corr.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: corr.nrows(),
            });
        }
        if !mass.is_finite() || means.iter().chain(corr.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        Ok(TruncationTargets::Complex { mass, means, corr })
    }

    pub fn dim(&self) -> usize {
        match self {
            TruncationTargets::Real { first, .. } => first.len(),
            TruncationTargets::Complex { means, .. } => means.len(),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            TruncationTargets::Real { .. } => Kind::Real,
            TruncationTargets::Complex { .. } => Kind::Complex,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            TruncationTargets::Real { mass, .. } | TruncationTargets::Complex { mass, .. } => *mass,
        }
    }

    /// `max(1, largest target modulus)`.
    pub fn scale(&self) -> f64 {
        let m = match self {
            TruncationTargets::Real { mass, first, second_diag } => first
                .iter()
                .chain(second_diag)
                .fold(mass.abs(), |acc, x| acc.max(x.abs())),
            TruncationTargets::Complex { mass, means, corr } => means
                .iter()
                .fold(mass.abs().max(max_abs(corr)), |acc, z| acc.max(z.norm())),
        };
        m.max(1.0)
    }

    /// Multiplies every target by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            TruncationTargets::Real { mass, first, second_diag } => TruncationTargets::Real {
                mass: mass * s,
                first: first.iter().map(|x| x * s).collect(),
                second_diag: second_diag.iter().map(|x| x * s).collect(),
            },
            TruncationTargets::Complex { mass, means, corr } => TruncationTargets::Complex {
                mass: mass * s,
                means: means.iter().map(|z| z * s).collect(),
                corr: corr * Complex64::new(s, 0.0),
            },
        }
    }

    /// Largest absolute difference from `other` (infinite on shape mismatch).
    pub fn max_difference(&self, other: &TruncationTargets) -> f64 {
        match (self, other) {
            (
                TruncationTargets::Real { mass: a, first: fa, second_diag: sa },
                TruncationTargets::Real { mass: b, first: fb, second_diag: sb },
            ) if fa.len() == fb.len() => fa
                .iter()
                .zip(fb)
                .chain(sa.iter().zip(sb))
                .fold((a - b).abs(), |m, (x, y)| m.max((x - y).abs())),
            (
                TruncationTargets::Complex { mass: a, means: ma, corr: ca },
                TruncationTargets::Complex { mass: b, means: mb, corr: cb },
            ) if ma.len() == mb.len() => ma
                .iter()
                .zip(mb)
                .fold((a - b).abs().max(max_abs(&(ca - cb))), |m, (x, y)| m.max((x - y).norm())),
            _ => f64::INFINITY,
        }
    }
}

/// Why a set of targets admits no positive representing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    NegativeMass { mass: f64 },
    /// Zero mass but some first or second moment does not vanish.
    ZeroMassNonzeroTargets { largest: f64 },
    /// `t_0 · t_{2e_i} < t_{e_i}²` at coordinate `i` (1-based).
    CauchySchwarz {
        coordinate: usize,
        mass_times_second: f64,
        first_squared: f64,
    },
    NotHermitian { defect: f64 },
    /// The centered correlation matrix has a negative direction.
    NotPsd { eigenvalue: f64, eigenvector: Vec<Complex64> },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::NegativeMass { mass } => write!(f, "negative mass {mass}"),
            Witness::ZeroMassNonzeroTargets { largest } => {
                write!(f, "zero mass with a nonzero moment of size {largest}")
            }
            Witness::CauchySchwarz {
                coordinate,
                mass_times_second,
                first_squared,
            } => write!(
                f,
                "Cauchy-Schwarz violated at coordinate {coordinate}: {mass_times_second} < {first_squared}"
            ),
            Witness::NotHermitian { defect } => write!(f, "correlation matrix not Hermitian (defect {defect:e})"),
            Witness::NotPsd { eigenvalue, .. } => {
                write!(f, "centered correlation matrix has eigenvalue {eigenvalue}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible,
    Infeasible(Witness),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Decides whether the targets have a positive representing measure.
pub fn feasibility(targets: &TruncationTargets, tol: f64) -> Feasibility {
    let mass = targets.mass();
    if mass < -tol {
        return Feasibility::Infeasible(Witness::NegativeMass { mass });
    }
    if mass <= tol {
        let largest = match targets {
            TruncationTargets::Real { first, second_diag, .. } => {
                first.iter().chain(second_diag).fold(0.0_f64, |m, x| m.max(x.abs()))
            }
            TruncationTargets::Complex { means, corr, .. } => {
                means.iter().fold(max_abs(corr), |m, z| m.max(z.norm()))
            }
        };
        return if largest <= tol {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible(Witness::ZeroMassNonzeroTargets { largest })
        };
    }
    match targets {
        TruncationTargets::Real { first, second_diag, .. } => {
            for (i, (t, s)) in first.iter().zip(second_diag).enumerate() {
                let lhs = mass * s;
                let rhs = t * t;
                let scale = lhs.abs().max(rhs).max(1.0);
                if lhs < rhs - tol * scale {
                    return Feasibility::Infeasible(Witness::CauchySchwarz {
                        coordinate: i + 1,
                        mass_times_second: lhs,
                        first_squared: rhs,
                    });
                }
            }
            Feasibility::Feasible
        }
        TruncationTargets::Complex { means, corr, .. } => {
            let scale = max_abs(corr).max(1.0);
            let defect = hermitian_defect(corr);
            if defect > tol * scale {
                return Feasibility::Infeasible(Witness::NotHermitian { defect });
            }
            let centered = centered_correlation(mass, means, corr);
            let eig = HermitianEigen::new(&centered);
            if eig.min() < -tol * eig.spectral_norm().max(scale) {
                return Feasibility::Infeasible(Witness::NotPsd {
                    eigenvalue: eig.min(),
                    eigenvector: eig.vectors.column(0).iter().copied().collect(),
                });
            }
            Feasibility::Feasible
        }
    }
}

/// `H − m m* / t`.
fn centered_correlation(mass: f64, means: &[Complex64], corr: &CMatrix) -> CMatrix {
    let d = means.len();
    CMatrix::from_fn(d, d, |i, j| corr[(i, j)] - means[i] * means[j].conj() / mass)
}

/// Targets realised by an atomic measure.
pub fn targets_of(mu: &AtomicMeasure) -> TruncationTargets {
    let d = mu.dim();
    let mass = mu.total_mass();
    match mu.kind() {
        Kind::Real => {
            let mut first = vec![0.0; d];
            let mut second = vec![0.0; d];
            for a in mu.atoms() {
                for i in 0..d {
                    let x = a.point[i].re;
                    first[i] += a.weight * x;
                    second[i] += a.weight * x * x;
                }
            }
            TruncationTargets::Real {
                mass,
                first,
                second_diag: second,
            }
        }
        Kind::Complex => {
            let mut means = vec![Complex64::new(0.0, 0.0); d];
            let mut corr = CMatrix::zeros(d, d);
            for a in mu.atoms() {
                for i in 0..d {
                    means[i] += a.point[i] * a.weight;
                    for j in 0..d {
                        corr[(i, j)] += a.point[i] * a.point[j].conj() * a.weight;
                    }
                }
            }
            TruncationTargets::Complex { mass, means, corr }
        }
    }
}

/// Reads the truncation targets off a sequence: `a_0, a_{e_i}, a_{2e_i}` or
/// `c_{0,0}, c_{e_i,0}, c_{e_i,e_j}`.
pub fn extract_targets(seq: &TruncatedSequence) -> Result<TruncationTargets> {
    let d = seq.dim();
    let zero = MultiIndex::zero(d);
    let units: Vec<MultiIndex> = (1..=d).map(|i| MultiIndex::unit(i, d)).collect::<Result<_>>()?;
    match seq.kind() {
        Kind::Real => {
            let mass = seq.real_or_depth(&zero)?;
            let first = units.iter().map(|e| seq.real_or_depth(e)).collect::<Result<Vec<_>>>()?;
            let second_diag = units
                .iter()
                .map(|e| seq.real_or_depth(&e.scaled(2)?))
                .collect::<Result<Vec<_>>>()?;
            TruncationTargets::real(mass, first, second_diag)
        }
        Kind::Complex => {
            let mass = seq.complex_or_depth(&zero, &zero)?.re;
            let means = units
                .iter()
                .map(|e| seq.complex_or_depth(e, &zero))
                .collect::<Result<Vec<_>>>()?;
            let mut corr = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    corr[(i, j)] = seq.complex_or_depth(&units[i], &units[j])?;
                }
            }
            TruncationTargets::complex(mass, means, corr)
        }
    }
}

/// The targets of `a^ξ` (or `c^ξ`), read entry by entry without forming the
/// whole localized sequence.
pub fn localized_targets(seq: &TruncatedSequence, xi: &CoefficientVector) -> Result<TruncationTargets> {
    let d = seq.dim();
    let zero = MultiIndex::zero(d);
    let units: Vec<MultiIndex> = (1..=d).map(|i| MultiIndex::unit(i, d)).collect::<Result<_>>()?;
    match seq.kind() {
        Kind::Real => {
            let entry = |n: &MultiIndex| localized_real_entry(seq, xi, n);
            let first = units.iter().map(entry).collect::<Result<Vec<_>>>()?;
            let second_diag = units
                .iter()
                .map(|e| entry(&e.scaled(2)?))
                .collect::<Result<Vec<_>>>()?;
            TruncationTargets::real(entry(&zero)?, first, second_diag)
        }
        Kind::Complex => {
            let entry = |m: &MultiIndex, n: &MultiIndex| localized_complex_entry(seq, xi, m, n);
            let means = units.iter().map(|e| entry(e, &zero)).collect::<Result<Vec<_>>>()?;
            let mut corr = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    corr[(i, j)] = entry(&units[i], &units[j])?;
                }
            }
            TruncationTargets::complex(entry(&zero, &zero)?.re, means, corr)
        }
    }
}

/// A finitely supported positive measure reproducing `targets`.
///
/// Real kind: with mean `μ_i = t_i/t_0` and variance `σ_i² = s_i/t_0 − μ_i²`,
/// atoms sit at `μ ± √d·σ_i·e_i` with weight `t_0/(2d)` each; a vanishing
/// variance collapses its pair. Complex kind: with `C = H − m m*/t = Σ λ_r u_r u_r*`
/// restricted to the `R` directions with `λ_r > tol·max(1, λ_max)`, atoms sit
/// at `m/t ± √(Rλ_r/t)·u_r` with weight `t/(2R)`; `R = 0` gives the single
/// atom `m/t`.
pub fn solve_initial_truncation(targets: &TruncationTargets, tol: f64) -> Result<AtomicMeasure> {
    match feasibility(targets, tol) {
        Feasibility::Feasible => {}
        Feasibility::Infeasible(Witness::ZeroMassNonzeroTargets { .. }) => return Err(Error::Inconsistent),
        Feasibility::Infeasible(w) => return Err(Error::Infeasible(w)),
    }
    let d = targets.dim();
    let mass = targets.mass();
    if mass <= tol {
        return Ok(AtomicMeasure::zero(d, targets.kind()));
    }
    let mu = match targets {
        TruncationTargets::Real { first, second_diag, .. } => {
            let mean: Vec<f64> = first.iter().map(|t| t / mass).collect();
            let spread = (d as f64).sqrt();
            let w = mass / (2.0 * d as f64);
            let mut atoms = Vec::with_capacity(2 * d);
            for i in 0..d {
                let raw = second_diag[i] / mass;
                let mut var = raw - mean[i] * mean[i];
                if var < tol * raw.abs().max(1.0) {
                    var = 0.0;
                }
                let sigma = var.sqrt();
                for sign in [-1.0, 1.0] {
                    let mut p = mean.clone();
                    p[i] += sign * spread * sigma;
                    atoms.push((crate::real_point(&p), w));
                }
            }
            AtomicMeasure::new(d, Kind::Real, atoms)?
        }
        TruncationTargets::Complex { means, corr, .. } => {
            let centered = centered_correlation(mass, means, corr);
            let eig = HermitianEigen::new(&centered);
            let cut = tol * eig.max().max(1.0);
            let kept: Vec<usize> = (0..d).filter(|&r| eig.values[r] > cut).collect();
            let center: Point = means.iter().map(|m| m / mass).collect();
            if kept.is_empty() {
                AtomicMeasure::new(d, Kind::Complex, vec![(center, mass)])?
            } else {
                let rank = kept.len() as f64;
                let w = mass / (2.0 * rank);
                let mut atoms = Vec::with_capacity(2 * kept.len());
                for &r in &kept {
                    let step = (rank * eig.values[r] / mass).sqrt();
                    let u = eig.vectors.column(r);
                    for sign in [-1.0, 1.0] {
                        let p: Point = (0..d).map(|i| center[i] + u[i] * (sign * step)).collect();
                        atoms.push((p, w));
                    }
                }
                AtomicMeasure::new(d, Kind::Complex, atoms)?
            }
        }
    };
    let residual = targets_of(&mu).max_difference(targets);
    if residual > tol * targets.scale() {
        return Err(Error::Verification(format!(
            "solution misses targets by {residual:e} (allowed {:e})",
            tol * targets.scale()
        )));
    }
    Ok(mu)
}

/// Per-ξ solutions together with the coupling audit.
#[derive(Debug, Clone)]
pub struct FamilySolution {
    pub family: MeasureFamily,
    /// Parallelogram positivity over every pair whose combinations were solved.
    /// Independent per-ξ solves need not satisfy it.
    pub constraint_report: ParallelogramReport,
}

/// Solves every truncation `a^ξ` on its own and audits parallelogram positivity
/// across the resulting family.
///
/// Any infeasible ξ is reported in an aggregated error; an infeasible
/// truncation certifies that `seq` is not a moment sequence.
pub fn solve_family(seq: &TruncatedSequence, xi_set: &[CoefficientVector], tol: f64) -> Result<FamilySolution> {
    let mut family = MeasureFamily::new(seq.dim(), seq.kind(), Provenance::UserSupplied);
    let mut infeasible = Vec::new();
    for xi in xi_set {
        seq.require_degree(match seq.kind() {
            Kind::Real => 2 * xi.deg() + 2,
            Kind::Complex => xi.deg() + 1,
        })?;
        let targets = localized_targets(seq, xi)?;
        match solve_initial_truncation(&targets, tol) {
            Ok(mu) => family.insert(xi.clone(), mu)?,
            Err(Error::Infeasible(w)) => infeasible.push((xi.to_string(), w)),
            Err(Error::Inconsistent) => {
                if let Feasibility::Infeasible(w) = feasibility(&targets, tol) {
                    infeasible.push((xi.to_string(), w));
                }
            }
            Err(e) => return Err(e),
        }
    }
    if !infeasible.is_empty() {
        return Err(Error::InfeasibleFamily(infeasible));
    }
    let keys: Vec<CoefficientVector> = family.keys().cloned().collect();
    let mut pairs = Vec::new();
    for xi in &keys {
        for eta in &keys {
            if family.contains(&xi.add(eta)) && family.contains(&xi.sub(eta)) {
                pairs.push((xi.clone(), eta.clone()));
            }
        }
    }
    let constraint_report = verify_parallelogram_positivity(&family, &pairs, tol)?;
    Ok(FamilySolution {
        family,
        constraint_report,
    })
}
