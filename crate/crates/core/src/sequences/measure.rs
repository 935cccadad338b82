use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

use crate::{Error, Kind, Point, Result};

/// Scalar weights an atomic measure may carry.
pub trait Weight: Copy + PartialEq + Add<Output = Self> + AddAssign + Mul<f64, Output = Self> + std::fmt::Debug {
    fn zero() -> Self;
    fn modulus(&self) -> f64;
    fn validate(&self) -> Result<()>;
    fn to_complex(self) -> Complex64;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn validate(&self) -> Result<()> {
        if self.is_finite() && *self >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidWeight(*self))
        }
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Weight for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn validate(&self) -> Result<()> {
        if self.re.is_finite() && self.im.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("signed measure weight"))
        }
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<W> {
    pub point: Point,
    pub weight: W,
}

/// A finitely supported measure on `R^d` or `C^d`.
///
/// Atoms closer than `1e-12 · max(1, |coordinate|)` are merged with their
/// weights summed; exactly zero weights are dropped. Atoms are kept sorted by
/// point so that two measures with the same support list atoms identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<W> {
    dim: usize,
    kind: Kind,
    atoms: Vec<Atom<W>>,
}

/// Positive atomic measure.
pub type AtomicMeasure = Measure<f64>;
/// Complex-weighted atomic measure.
pub type SignedAtomicMeasure = Measure<Complex64>;

pub const MERGE_TOL: f64 = 1e-12;

/// Whether two points are identified under the merge rule.
pub fn same_point(p: &[Complex64], q: &[Complex64]) -> bool {
    let mag = p.iter().chain(q).fold(1.0_f64, |m, z| m.max(z.norm()));
    let dist2: f64 = p.iter().zip(q).map(|(a, b)| (a - b).norm_sqr()).sum();
    dist2.sqrt() <= MERGE_TOL * mag
}

fn point_cmp(p: &[Complex64], q: &[Complex64]) -> std::cmp::Ordering {
    for (a, b) in p.iter().zip(q) {
        let o = a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

impl<W: Weight> Measure<W> {
    pub fn new(dim: usize, kind: Kind, atoms: impl IntoIterator<Item = (Point, W)>) -> Result<Self> {
        let mut list = Vec::new();
        for (point, weight) in atoms {
            if point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: point.len(),
                });
            }
            if point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("atom coordinate"));
            }
            if kind == Kind::Real && point.iter().any(|z| z.im != 0.0) {
                return Err(Error::KindMismatch {
                    expected: Kind::Real,
                    found: Kind::Complex,
                });
            }
            weight.validate()?;
            list.push(Atom { point, weight });
        }
        Ok(Self::canonicalize(dim, kind, list))
    }

    pub fn zero(dim: usize, kind: Kind) -> Self {
        Measure {
            dim,
            kind,
            atoms: Vec::new(),
        }
    }

    fn canonicalize(dim: usize, kind: Kind, atoms: Vec<Atom<W>>) -> Self {
        let mut merged: Vec<Atom<W>> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.iter_mut().find(|m| same_point(&m.point, &atom.point)) {
                Some(m) => m.weight += atom.weight,
                None => merged.push(atom),
            }
        }
        merged.retain(|a| a.weight != W::zero());
        merged.sort_by(|a, b| point_cmp(&a.point, &b.point));
        Measure {
            dim,
            kind,
            atoms: merged,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom<W>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> W {
        self.atoms.iter().fold(W::zero(), |acc, a| acc + a.weight)
    }

    /// Sum of `|w|` over atoms.
    pub fn variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.modulus()).sum()
    }

    /// Weight carried at `point` (zero if no atom is there).
    pub fn weight_at(&self, point: &[Complex64]) -> W {
        self.atoms
            .iter()
            .find(|a| same_point(&a.point, point))
            .map(|a| a.weight)
            .unwrap_or_else(W::zero)
    }

    /// Measure of a finite set of points.
    pub fn mass_of(&self, region: &[Point]) -> W {
        self.atoms
            .iter()
            .filter(|a| region.iter().any(|p| same_point(&a.point, p)))
            .fold(W::zero(), |acc, a| acc + a.weight)
    }

    /// `Σ_j w_j φ(x_j)`.
    pub fn integrate(&self, phi: impl Fn(&[Complex64]) -> Complex64) -> Complex64 {
        self.atoms
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc + a.weight.to_complex() * phi(&a.point))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                point: a.point.clone(),
                weight: a.weight * s,
            })
            .collect();
        Self::canonicalize(self.dim, self.kind, atoms)
    }

    pub fn to_signed(&self) -> SignedAtomicMeasure {
        Measure {
            dim: self.dim,
            kind: self.kind,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: a.weight.to_complex(),
                })
                .collect(),
        }
    }

    /// Same support, new weights `f(x, w)`. Weights are validated for the target type.
    pub fn reweighted<V: Weight>(&self, f: impl Fn(&[Complex64], W) -> V) -> Result<Measure<V>> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let weight = f(&a.point, a.weight);
            weight.validate()?;
            atoms.push(Atom {
                point: a.point.clone(),
                weight,
            });
        }
        Ok(Measure::<V>::canonicalize(self.dim, self.kind, atoms))
    }
}

impl SignedAtomicMeasure {
    /// `Σ_r c_r μ_r` on the merged support.
    pub fn combination<W: Weight>(dim: usize, kind: Kind, terms: &[(Complex64, &Measure<W>)]) -> Result<Self> {
        let mut atoms = Vec::new();
        for (c, m) in terms {
            if m.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim,
                });
            }
            if m.kind != kind {
                return Err(Error::KindMismatch {
                    expected: kind,
                    found: m.kind,
                });
            }
            for a in &m.atoms {
                atoms.push(Atom {
                    point: a.point.clone(),
                    weight: c * a.weight.to_complex(),
                });
            }
        }
        Ok(Self::canonicalize(dim, kind, atoms))
    }

    /// Atom-wise complex conjugate of the weights.
    pub fn conj(&self) -> Self {
        Measure {
            dim: self.dim,
            kind: self.kind,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: a.weight.conj(),
                })
                .collect(),
        }
    }

    /// Largest atom-wise weight difference against `other` on the union of supports.
    pub fn max_difference(&self, other: &SignedAtomicMeasure) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        match Self::combination(self.dim, self.kind, &[(one, self), (-one, other)]) {
            Ok(d) => d.atoms.iter().fold(0.0, |m, a| m.max(a.weight.norm())),
            Err(_) => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real_point;

    #[test]
    fn merges_nearby_points() {
        let m = AtomicMeasure::new(
            1,
            Kind::Real,
            vec![
                (real_point(&[1.0]), 0.25),
                (real_point(&[1.0 + 1e-14]), 0.25),
                (real_point(&[-1.0]), 0.5),
            ],
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].point, real_point(&[-1.0]));
        assert!((m.weight_at(&real_point(&[1.0])) - 0.5).abs() < 1e-15);
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn rejects_negative_weight_and_bad_dims() {
        assert!(matches!(
            AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[0.0]), -1.0)]),
            Err(Error::InvalidWeight(_))
        ));
        assert!(AtomicMeasure::new(2, Kind::Real, vec![(real_point(&[0.0]), 1.0)]).is_err());
        let z = vec![Complex64::new(0.0, 1.0)];
        assert!(AtomicMeasure::new(1, Kind::Real, vec![(z.clone(), 1.0)]).is_err());
        assert!(AtomicMeasure::new(1, Kind::Complex, vec![(z, 1.0)]).is_ok());
    }

    #[test]
    fn combination_cancels() {
        let a = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[2.0]), 1.0)]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let d = SignedAtomicMeasure::combination(1, Kind::Real, &[(one, &a), (-one, &a)]).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn region_mass() {
        let m = AtomicMeasure::new(
            1,
            Kind::Real,
            vec![(real_point(&[-1.0]), 0.5), (real_point(&[1.0]), 0.5)],
        )
        .unwrap();
        assert_eq!(m.mass_of(&[real_point(&[1.0])]), 0.5);
        assert_eq!(m.mass_of(&[real_point(&[3.0])]), 0.0);
    }
}
