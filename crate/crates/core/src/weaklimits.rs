//! A numerical harness for moment functionals under weak limits.
//!
//! Two statements are audited on finite prefixes of sequences of probability
//! measures `μ_k → μ`:
//!
//! 1. for `φ ≥ 0`, `∫φ dμ_k ≤ c` for all `k` implies `∫φ dμ ≤ c`;
//! 2. if `∫φ dμ_k → a` and `∫|φ|² dμ_k ≤ c` uniformly, then `∫φ dμ = a`.
//!
//! Weak convergence itself is only checked against the supplied test
//! functions, on the terms that were supplied. A run in which every
//! hypothesis holds but the conclusion fails is flagged as a falsification.

use num_complex::Complex64;
use serde::Serialize;

use crate::sequences::AtomicMeasure;
use crate::{real_point, Error, Kind, Result};

/// Allowed deviation of each term's mass from 1.
pub const MASS_TOL: f64 = 1e-12;

pub type ScalarFn = Box<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Terms `μ_1, …, μ_K` of a sequence of probability measures.
#[derive(Debug, Clone)]
pub struct MeasureSequence {
    terms: Vec<AtomicMeasure>,
}

impl MeasureSequence {
    pub fn new(terms: Vec<AtomicMeasure>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Precondition("a measure sequence needs at least one term".into()));
        }
        for (k, mu) in terms.iter().enumerate() {
            if (mu.total_mass() - 1.0).abs() > MASS_TOL {
                return Err(Error::Precondition(format!(
                    "term {k} has mass {} instead of 1",
                    mu.total_mass()
                )));
            }
        }
        Ok(MeasureSequence { terms })
    }

    pub fn terms(&self) -> &[AtomicMeasure] {
        &self.terms
    }
}

/// `Σ_j w_j φ(x_j)`.
pub fn integrate(mu: &AtomicMeasure, phi: impl Fn(&[Complex64]) -> Complex64) -> Complex64 {
    mu.integrate(phi)
}

/// A side-effect free test function. `support_radius` is `Some(R)` when the
/// function vanishes outside the ball of radius `R`.
pub struct TestFunction {
    pub name: String,
    pub support_radius: Option<f64>,
    pub f: ScalarFn,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, support_radius: Option<f64>, f: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static) -> Self {
        TestFunction {
            name: name.into(),
            support_radius,
            f: Box::new(f),
        }
    }

    /// `max(0, 1 − |x − center| / radius)`, supported in the ball of radius `|center| + radius`.
    pub fn tent(center: f64, radius: f64) -> Self {
        Self::new(
            format!("tent({center},{radius})"),
            Some(center.abs() + radius),
            move |x| {
                let d: f64 = x.iter().map(|z| (z - center).norm_sqr()).sum::<f64>().sqrt();
                Complex64::new((1.0 - d / radius).max(0.0), 0.0)
            },
        )
    }

    /// `1 / (1 + |x|²)`.
    pub fn lorentzian() -> Self {
        Self::new("1/(1+|x|^2)", None, |x| {
            let r2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            Complex64::new(1.0 / (1.0 + r2), 0.0)
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakConvergence {
    /// `(name, |∫ψ dμ_K − ∫ψ dμ|)` for the last term.
    pub final_residuals: Vec<(String, f64)>,
    pub holds: bool,
}

/// Residuals against every test function; the proxy holds when the last
/// residual is below `tol` and the last three are non-increasing.
fn weak_convergence(seq: &MeasureSequence, limit: &AtomicMeasure, tests: &[TestFunction], tol: f64) -> WeakConvergence {
    let mut holds = true;
    let mut final_residuals = Vec::with_capacity(tests.len());
    for t in tests {
        let target = limit.integrate(&t.f);
        let residuals: Vec<f64> = seq.terms.iter().map(|mu| (mu.integrate(&t.f) - target).norm()).collect();
        let last = *residuals.last().expect("nonempty sequence");
        let tail = &residuals[residuals.len().saturating_sub(3)..];
        let monotone = tail.windows(2).all(|w| w[1] <= w[0] + tol);
        holds &= last <= tol && monotone;
        final_residuals.push((t.name.clone(), last));
    }
    WeakConvergence { final_residuals, holds }
}

#[derive(Debug, Clone, Serialize)]
pub struct Part1Report {
    pub weak_convergence: WeakConvergence,
    /// `sup_k ∫φ dμ_k`.
    pub sup_integral: f64,
    /// `∫φ dμ_k ≤ c` for every term.
    pub hypothesis_bound: bool,
    pub limit_integral: f64,
    /// `∫φ dμ ≤ c + tol`.
    pub conclusion: bool,
    pub falsification: bool,
}

/// Audits the first statement for `φ ≥ 0`.
pub fn audit_part1(
    seq: &MeasureSequence,
    limit: &AtomicMeasure,
    phi: &dyn Fn(&[Complex64]) -> Complex64,
    c: f64,
    tests: &[TestFunction],
    tol: f64,
) -> Result<Part1Report> {
    for mu in seq.terms.iter().chain(std::iter::once(limit)) {
        for a in mu.atoms() {
            let v = phi(&a.point);
            if v.re < 0.0 || v.im != 0.0 {
                return Err(Error::Precondition(format!("phi is not nonnegative at an atom: {v}")));
            }
        }
    }
    let weak = weak_convergence(seq, limit, tests, tol);
    let sup_integral = seq.terms.iter().map(|mu| mu.integrate(phi).re).fold(f64::NEG_INFINITY, f64::max);
    let hypothesis_bound = sup_integral <= c;
    let limit_integral = limit.integrate(phi).re;
    let conclusion = limit_integral <= c + tol;
    let falsification = weak.holds && hypothesis_bound && !conclusion;
    Ok(Part1Report {
        weak_convergence: weak,
        sup_integral,
        hypothesis_bound,
        limit_integral,
        conclusion,
        falsification,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Part2Report {
    pub weak_convergence: WeakConvergence,
    /// `∫φ dμ_K` for the last term.
    pub last_integral: Complex64,
    /// `|∫φ dμ_K − a| ≤ tol`.
    pub convergence_to_a: bool,
    /// `sup_k ∫|φ|² dμ_k`.
    pub sup_square_integral: f64,
    pub uniform_square_bound: bool,
    pub limit_integral: Complex64,
    /// `|∫φ dμ − a| ≤ tol`.
    pub conclusion: bool,
    pub falsification: bool,
}

/// Audits the second statement.
pub fn audit_part2(
    seq: &MeasureSequence,
    limit: &AtomicMeasure,
    phi: &dyn Fn(&[Complex64]) -> Complex64,
    a: Complex64,
    c: f64,
    tests: &[TestFunction],
    tol: f64,
) -> Result<Part2Report> {
    let weak = weak_convergence(seq, limit, tests, tol);
    let last_integral = seq.terms.last().expect("nonempty sequence").integrate(phi);
    let convergence_to_a = (last_integral - a).norm() <= tol;
    let sup_square_integral = seq
        .terms
        .iter()
        .map(|mu| mu.integrate(|x| Complex64::new(phi(x).norm_sqr(), 0.0)).re)
        .fold(f64::NEG_INFINITY, f64::max);
    let uniform_square_bound = sup_square_integral <= c + tol * c.abs().max(1.0);
    let limit_integral = limit.integrate(phi);
    let conclusion = (limit_integral - a).norm() <= tol;
    let falsification = weak.holds && convergence_to_a && uniform_square_bound && !conclusion;
    Ok(Part2Report {
        weak_convergence: weak,
        last_integral,
        convergence_to_a,
        sup_square_integral,
        uniform_square_bound,
        limit_integral,
        conclusion,
        falsification,
    })
}

/// Verdicts a bundled suite is documented to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub weak_convergence: bool,
    pub hypothesis: bool,
    pub conclusion: bool,
}

pub struct Part1Suite {
    pub name: &'static str,
    pub sequence: MeasureSequence,
    pub limit: AtomicMeasure,
    pub phi: ScalarFn,
    pub c: f64,
    pub tests: Vec<TestFunction>,
    pub expected: Expected,
}

pub struct Part2Suite {
    pub name: &'static str,
    pub sequence: MeasureSequence,
    pub limit: AtomicMeasure,
    pub phi: ScalarFn,
    pub a: Complex64,
    pub c: f64,
    pub tests: Vec<TestFunction>,
    pub expected: Expected,
}

impl Part1Suite {
    pub fn run(&self, tol: f64) -> Result<Part1Report> {
        audit_part1(&self.sequence, &self.limit, &*self.phi, self.c, &self.tests, tol)
    }
}

impl Part2Suite {
    pub fn run(&self, tol: f64) -> Result<Part2Report> {
        audit_part2(&self.sequence, &self.limit, &*self.phi, self.a, self.c, &self.tests, tol)
    }
}

impl Part1Report {
    pub fn verdicts(&self) -> Expected {
        Expected {
            weak_convergence: self.weak_convergence.holds,
            hypothesis: self.hypothesis_bound,
            conclusion: self.conclusion,
        }
    }
}

impl Part2Report {
    /// The hypothesis counts as holding when both convergence to `a` and the
    /// uniform square bound hold.
    pub fn verdicts(&self) -> Expected {
        Expected {
            weak_convergence: self.weak_convergence.holds,
            hypothesis: self.convergence_to_a && self.uniform_square_bound,
            conclusion: self.conclusion,
        }
    }
}

/// Largest exponent in the bundled sequences, `k = 2^j` for `j = 0..=TERMS`.
/// Powers of two keep every weight and atom exact.
pub const TERMS: i32 = 64;

fn on_line(atoms: &[(f64, f64)]) -> AtomicMeasure {
    AtomicMeasure::new(1, Kind::Real, atoms.iter().map(|&(x, w)| (real_point(&[x]), w))).expect("valid bundled measure")
}

fn sequence(term: impl Fn(f64) -> AtomicMeasure) -> MeasureSequence {
    MeasureSequence::new((0..=TERMS).map(|j| term(2f64.powi(j))).collect()).expect("bundled terms are probability measures")
}

/// `(1 − 1/k) δ_0 + (1/k) δ_{x}`
fn escaping(k: f64, x: f64) -> AtomicMeasure {
    on_line(&[(0.0, 1.0 - 1.0 / k), (x, 1.0 / k)])
}

fn power(p: i32) -> ScalarFn {
    Box::new(move |x| x[0].powi(p))
}

fn compact_tests() -> Vec<TestFunction> {
    vec![TestFunction::tent(0.0, 1.0), TestFunction::tent(0.0, 5.0), TestFunction::tent(2.0, 1.0)]
}

fn bounded_tests() -> Vec<TestFunction> {
    let mut t = compact_tests();
    t.push(TestFunction::lorentzian());
    t
}

pub fn part1_suites() -> Vec<Part1Suite> {
    vec![
        Part1Suite {
            name: "shrinking point mass",
            sequence: sequence(|k| on_line(&[(1.0 / k, 1.0)])),
            limit: on_line(&[(0.0, 1.0)]),
            phi: power(2),
            c: 1.0,
            tests: compact_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: true,
                conclusion: true,
            },
        },
        Part1Suite {
            name: "mass escaping to infinity",
            sequence: sequence(|k| escaping(k, k)),
            limit: on_line(&[(0.0, 1.0)]),
            phi: power(2),
            c: 1.0,
            tests: compact_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: false,
                conclusion: true,
            },
        },
        Part1Suite {
            name: "stationary sequence",
            sequence: sequence(|_| on_line(&[(-1.0, 0.5), (1.0, 0.5)])),
            limit: on_line(&[(-1.0, 0.5), (1.0, 0.5)]),
            phi: power(2),
            c: 1.0,
            tests: compact_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: true,
                conclusion: true,
            },
        },
    ]
}

pub fn part2_suites() -> Vec<Part2Suite> {
    vec![
        Part2Suite {
            name: "escape at square-root distance",
            sequence: sequence(|k| escaping(k, k.sqrt())),
            limit: on_line(&[(0.0, 1.0)]),
            phi: power(1),
            a: Complex64::new(0.0, 0.0),
            c: 1.0,
            tests: bounded_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: true,
                conclusion: true,
            },
        },
        Part2Suite {
            name: "escape at linear distance",
            sequence: sequence(|k| escaping(k, k)),
            limit: on_line(&[(0.0, 1.0)]),
            phi: power(1),
            a: Complex64::new(1.0, 0.0),
            c: 1.0,
            tests: bounded_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: false,
                conclusion: false,
            },
        },
        Part2Suite {
            name: "constant function",
            sequence: sequence(|k| on_line(&[(1.0 / k, 1.0)])),
            limit: on_line(&[(0.0, 1.0)]),
            phi: Box::new(|_| Complex64::new(3.0, 0.0)),
            a: Complex64::new(3.0, 0.0),
            c: 9.0,
            tests: bounded_tests(),
            expected: Expected {
                weak_convergence: true,
                hypothesis: true,
                conclusion: true,
            },
        },
    ]
}
