//! Truncated moment data, atomic measures, and localized sequences.
//!
//! For a coefficient vector `ξ` the localized sequence is
//!
//! ```text
//! a^ξ_n     = Σ_{k,l} a_{n+k+l}   ξ_k conj(ξ_l)      (real)
//! c^ξ_{m,n} = Σ_{k,l} c_{m+k,n+l} ξ_k conj(ξ_l)      (complex)
//! ```
//!
//! which, for a moment sequence of `μ`, is the moment sequence of `|p_ξ|² dμ`.

mod coefficients;
mod measure;
mod truncated;

pub use coefficients::{poly_eval, CoefficientVector};
pub use measure::{same_point, Atom, AtomicMeasure, Measure, SignedAtomicMeasure, Weight, MERGE_TOL};
pub use truncated::{TruncatedSequence, HERMITIAN_TOL};

use num_complex::Complex64;

use crate::multiindex::{monomial_eval, MultiIndex};
use crate::{Error, Kind, Result};

/// Imaginary residue tolerated (relative) where a value must be real.
pub const IMAG_TOL: f64 = 1e-10;

/// Moments of an atomic measure up to degree `max_degree`.
pub fn moments_of(mu: &AtomicMeasure, max_degree: u32) -> TruncatedSequence {
    let dim = mu.dim();
    match mu.kind() {
        // real points, so every monomial is real
        Kind::Real => TruncatedSequence::from_real_fn(dim, max_degree, |n| {
            mu.atoms()
                .iter()
                .map(|a| a.weight * monomial_eval(&a.point, n, None).expect("dimension checked").re)
                .sum()
        }),
        Kind::Complex => TruncatedSequence::from_complex_fn(dim, max_degree, |m, n| {
            mu.atoms().iter().fold(Complex64::new(0.0, 0.0), |acc, a| {
                acc + monomial_eval(&a.point, m, Some(n)).expect("dimension checked") * a.weight
            })
        }),
    }
}

/// The measure `|p_ξ|² dμ`.
pub fn square_density(mu: &AtomicMeasure, xi: &CoefficientVector) -> Result<AtomicMeasure> {
    check_dims(mu.dim(), xi.dim())?;
    mu.reweighted(|x, w| {
        let p = poly_eval(xi, x).expect("dimension checked");
        p.norm_sqr() * w
    })
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Scale against which localized values are compared: `max(1, ‖ξ‖₁² · max|a|)`.
pub fn localize_scale(seq: &TruncatedSequence, xi: &CoefficientVector) -> f64 {
    (xi.l1_norm().powi(2) * seq.max_abs()).max(1.0)
}

/// The single localized entry `a^ξ_n` (real kind).
pub fn localized_real_entry(seq: &TruncatedSequence, xi: &CoefficientVector, n: &MultiIndex) -> Result<f64> {
    check_dims(seq.dim(), xi.dim())?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (k, xk) in xi.iter() {
        let nk = n.checked_add(k)?;
        for (l, xl) in xi.iter() {
            let a = seq.real_or_depth(&nk.checked_add(l)?)?;
            acc += *xk * xl.conj() * a;
            abs += a.abs() * xk.norm() * xl.norm();
        }
    }
    if acc.im.abs() > IMAG_TOL * abs.max(1.0) {
        return Err(Error::ImaginaryResidue { residue: acc.im.abs() });
    }
    Ok(acc.re)
}

/// The single localized entry `c^ξ_{m,n}` (complex kind).
pub fn localized_complex_entry(
    seq: &TruncatedSequence,
    xi: &CoefficientVector,
    m: &MultiIndex,
    n: &MultiIndex,
) -> Result<Complex64> {
    check_dims(seq.dim(), xi.dim())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, xk) in xi.iter() {
        let mk = m.checked_add(k)?;
        for (l, xl) in xi.iter() {
            acc += seq.complex_or_depth(&mk, &n.checked_add(l)?)? * *xk * xl.conj();
        }
    }
    Ok(acc)
}

/// The localized sequence `a^ξ` (or `c^ξ`).
///
/// Real kind needs `max_degree ≥ 2·deg ξ` and returns a sequence of degree
/// `max_degree − 2·deg ξ`; complex kind needs `max_degree ≥ deg ξ` and
/// returns degree `max_degree − deg ξ`.
pub fn localize(seq: &TruncatedSequence, xi: &CoefficientVector) -> Result<TruncatedSequence> {
    check_dims(seq.dim(), xi.dim())?;
    let mut err = None;
    let mut keep = |r: Result<_>, zero| match r {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            zero
        }
    };
    let out = match seq.kind() {
        Kind::Real => {
            let need = 2 * xi.deg();
            seq.require_degree(need)?;
            TruncatedSequence::from_real_fn(seq.dim(), seq.max_degree() - need, |n| {
                keep(localized_real_entry(seq, xi, n).map(|a| Complex64::new(a, 0.0)), Complex64::new(0.0, 0.0)).re
            })
        }
        Kind::Complex => {
            let need = xi.deg();
            seq.require_degree(need)?;
            TruncatedSequence::from_complex_fn(seq.dim(), seq.max_degree() - need, |m, n| {
                keep(localized_complex_entry(seq, xi, m, n), Complex64::new(0.0, 0.0))
            })
        }
    };
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real_point;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn xi1(c: &[f64]) -> CoefficientVector {
        CoefficientVector::from_real(1, c.iter().enumerate().map(|(k, &v)| (mi(&[k as u32]), v))).unwrap()
    }

    fn sym_pm1() -> AtomicMeasure {
        AtomicMeasure::new(
            1,
            Kind::Real,
            vec![(real_point(&[-1.0]), 0.5), (real_point(&[1.0]), 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn moments_examples() {
        let delta1 = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[1.0]), 1.0)]).unwrap();
        let s = moments_of(&delta1, 4);
        assert!(s.real_values().iter().all(|&a| a == 1.0));
        assert_eq!(moments_of(&sym_pm1(), 4).real_values(), &[1.0, 0.0, 1.0, 0.0, 1.0]);
        let origin = AtomicMeasure::new(2, Kind::Real, vec![(real_point(&[0.0, 0.0]), 1.0)]).unwrap();
        let s = moments_of(&origin, 3);
        for n in s.indices() {
            let expected = if n.is_zero() { 1.0 } else { 0.0 };
            assert_eq!(s.real(n), Some(expected));
        }
    }

    #[test]
    fn complex_moments_are_hermitian() {
        let mu = AtomicMeasure::new(
            1,
            Kind::Complex,
            vec![(vec![Complex64::new(0.0, 1.0)], 2.0), (vec![Complex64::new(1.0, 1.0)], 0.5)],
        )
        .unwrap();
        let s = moments_of(&mu, 2);
        let c = s.complex_matrix().unwrap();
        assert_eq!(c, &c.adjoint());
        // c_{1,0} = Σ w z
        let expected = Complex64::new(0.0, 2.0) + Complex64::new(0.5, 0.5);
        assert!((s.complex(&mi(&[1]), &mi(&[0])).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn localize_examples() {
        let ones = TruncatedSequence::from_real_fn(1, 6, |_| 1.0);
        let l = localize(&ones, &xi1(&[1.0, 1.0])).unwrap();
        assert_eq!(l.max_degree(), 4);
        assert!(l.real_values().iter().all(|&a| a == 4.0));
        let l = localize(&ones, &xi1(&[1.0, -1.0])).unwrap();
        assert!(l.real_values().iter().all(|&a| a == 0.0));
        let s = moments_of(&sym_pm1(), 4);
        assert_eq!(localize(&s, &CoefficientVector::one(1)).unwrap(), s);
    }

    #[test]
    fn localize_budget() {
        let ones = TruncatedSequence::from_real_fn(1, 3, |_| 1.0);
        assert!(matches!(
            localize(&ones, &xi1(&[0.0, 0.0, 1.0])),
            Err(Error::TruncationDepth { needed: 4, available: 3 })
        ));
        let c = TruncatedSequence::zero(1, Kind::Complex, 2);
        assert!(localize(&c, &xi1(&[0.0, 0.0, 1.0])).is_ok());
        assert!(localize(&c, &xi1(&[0.0, 0.0, 0.0, 1.0])).is_err());
    }

    fn arb_measure(dim: usize, kind: Kind) -> impl Strategy<Value = AtomicMeasure> {
        prop::collection::vec((prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim), 0.01f64..1.0), 1..5)
            .prop_map(move |atoms| {
                AtomicMeasure::new(
                    dim,
                    kind,
                    atoms.into_iter().map(|(p, w)| {
                        let point = p
                            .into_iter()
                            .map(|(re, im)| Complex64::new(re, if kind == Kind::Real { 0.0 } else { im }))
                            .collect();
                        (point, w)
                    }),
                )
                .unwrap()
            })
    }

    fn arb_xi(dim: usize, deg: u32) -> impl Strategy<Value = CoefficientVector> {
        let idx = crate::multiindex::truncation_set(dim, crate::TruncationKind::AllUpTo(deg));
        let n = idx.len();
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |c| {
            CoefficientVector::new(dim, idx.iter().cloned().zip(c.into_iter().map(|(a, b)| Complex64::new(a, b))))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn localization_matches_density_real(mu in arb_measure(2, Kind::Real), xi in arb_xi(2, 1)) {
            let lhs = localize(&moments_of(&mu, 5), &xi).unwrap();
            let rhs = moments_of(&square_density(&mu, &xi).unwrap(), 3);
            let scale = localize_scale(&moments_of(&mu, 5), &xi);
            prop_assert!(lhs.max_difference(&rhs).unwrap() <= 1e-12 * scale);
        }

        #[test]
        fn localization_matches_density_complex(mu in arb_measure(1, Kind::Complex), xi in arb_xi(1, 2)) {
            let seq = moments_of(&mu, 4);
            let lhs = localize(&seq, &xi).unwrap();
            let rhs = moments_of(&square_density(&mu, &xi).unwrap(), 2);
            prop_assert!(lhs.max_difference(&rhs).unwrap() <= 1e-12 * localize_scale(&seq, &xi));
            let c = lhs.complex_matrix().unwrap();
            prop_assert!(crate::linalg::hermitian_defect(c) == 0.0);
        }

        #[test]
        fn localization_is_quadratic(mu in arb_measure(1, Kind::Real), xi in arb_xi(1, 1), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let seq = moments_of(&mu, 4);
            let z = Complex64::new(re, im);
            let a = localize(&seq, &xi.scale(z)).unwrap();
            let b = localize(&seq, &xi).unwrap();
            for (x, y) in a.real_values().iter().zip(b.real_values()) {
                prop_assert!((x - z.norm_sqr() * y).abs() <= 1e-12 * localize_scale(&seq, &xi) * (1.0 + z.norm_sqr()));
            }
        }

        #[test]
        fn moments_are_linear(mu in arb_measure(2, Kind::Real), nu in arb_measure(2, Kind::Real), alpha in 0.0f64..3.0, beta in 0.0f64..3.0) {
            let combo = AtomicMeasure::new(
                2,
                Kind::Real,
                mu.atoms().iter().map(|a| (a.point.clone(), alpha * a.weight))
                    .chain(nu.atoms().iter().map(|a| (a.point.clone(), beta * a.weight))),
            ).unwrap();
            let lhs = moments_of(&combo, 4);
            let (sm, sn) = (moments_of(&mu, 4), moments_of(&nu, 4));
            for (i, n) in lhs.indices().iter().enumerate() {
                let rhs = alpha * sm.real(n).unwrap() + beta * sn.real(n).unwrap();
                prop_assert!((lhs.real_values()[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * 64.0);
            }
        }
    }
}
