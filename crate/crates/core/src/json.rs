//! JSON file formats.
//!
//! ```text
//! sequence  {"dim": d, "kind": "real", "max_degree": D, "entries": [{"idx": [..], "value": v}]}
//!           {"dim": d, "kind": "complex", "max_degree": D,
//!            "entries": [{"idx_m": [..], "idx_n": [..], "re": x, "im": y}]}
//! measure   {"dim": d, "kind": .., "atoms": [{"point": [..], "weight": w}]}
//!           complex points list one [re, im] pair per coordinate
//! xi        [{"idx": [..], "re": x, "im": y}]      ("im" may be omitted)
//! family    {"dim": d, "kind": .., "members": [{"xi": <xi>, "measure": <measure>}]}
//! targets   {"mass": t, "first": [..], "second_diag": [..]}
//!           {"mass": t, "means": [{"re","im"}], "corr": [[{"re","im"}]]}
//! matrix    row-major [[{"re": x, "im": y}]]
//! ```

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::families::{MeasureFamily, Provenance};
use crate::linalg::CMatrix;
use crate::multiindex::MultiIndex;
use crate::sequences::{AtomicMeasure, CoefficientVector, TruncatedSequence};
use crate::solver::TruncationTargets;
use crate::{Error, Kind, Point, Result};

fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<ComplexJson>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<ComplexJson>]) -> Result<CMatrix> {
    let n = rows.len();
    let c = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != c) {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, c, |i, j| rows[i][j].into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RealEntry {
    idx: MultiIndex,
    value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComplexEntry {
    idx_m: MultiIndex,
    idx_n: MultiIndex,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SequenceJson {
    dim: usize,
    kind: Kind,
    max_degree: u32,
    entries: serde_json::Value,
}

pub fn sequence_to_json(seq: &TruncatedSequence) -> serde_json::Value {
    let entries = match seq.kind() {
        Kind::Real => serde_json::to_value(
            seq.indices()
                .iter()
                .zip(seq.real_values())
                .map(|(n, &value)| RealEntry { idx: n.clone(), value })
                .collect::<Vec<_>>(),
        ),
        Kind::Complex => {
            let mut out = Vec::new();
            for m in seq.indices() {
                for n in seq.indices() {
                    let z = seq.complex(m, n).expect("index from the sequence");
                    out.push(ComplexEntry {
                        idx_m: m.clone(),
                        idx_n: n.clone(),
                        re: z.re,
                        im: z.im,
                    });
                }
            }
            serde_json::to_value(out)
        }
    }
    .expect("plain data serializes");
    serde_json::to_value(SequenceJson {
        dim: seq.dim(),
        kind: seq.kind(),
        max_degree: seq.max_degree(),
        entries,
    })
    .expect("plain data serializes")
}

pub fn sequence_from_str(text: &str) -> Result<TruncatedSequence> {
    let raw: SequenceJson = parse(text, "sequence")?;
    match raw.kind {
        Kind::Real => {
            let entries: Vec<RealEntry> =
                serde_json::from_value(raw.entries).map_err(|e| Error::Parse(format!("sequence entries: {e}")))?;
            TruncatedSequence::from_real_entries(
                raw.dim,
                raw.max_degree,
                entries.into_iter().map(|e| (e.idx, e.value)),
            )
        }
        Kind::Complex => {
            let entries: Vec<ComplexEntry> =
                serde_json::from_value(raw.entries).map_err(|e| Error::Parse(format!("sequence entries: {e}")))?;
            TruncatedSequence::from_complex_entries(
                raw.dim,
                raw.max_degree,
                entries
                    .into_iter()
                    .map(|e| (e.idx_m, e.idx_n, Complex64::new(e.re, e.im))),
            )
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CoordJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AtomJson {
    point: Vec<CoordJson>,
    weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    kind: Kind,
    atoms: Vec<AtomJson>,
}

fn point_to_json(kind: Kind, p: &Point) -> Vec<CoordJson> {
    p.iter()
        .map(|z| match kind {
            Kind::Real => CoordJson::Real(z.re),
            Kind::Complex => CoordJson::Complex([z.re, z.im]),
        })
        .collect()
}

fn point_from_json(p: &[CoordJson]) -> Point {
    p.iter()
        .map(|c| match *c {
            CoordJson::Real(x) => Complex64::new(x, 0.0),
            CoordJson::Complex([re, im]) => Complex64::new(re, im),
        })
        .collect()
}

fn measure_to_dto(mu: &AtomicMeasure) -> MeasureJson {
    MeasureJson {
        dim: mu.dim(),
        kind: mu.kind(),
        atoms: mu
            .atoms()
            .iter()
            .map(|a| AtomJson {
                point: point_to_json(mu.kind(), &a.point),
                weight: a.weight,
            })
            .collect(),
    }
}

fn measure_from_dto(raw: MeasureJson) -> Result<AtomicMeasure> {
    AtomicMeasure::new(
        raw.dim,
        raw.kind,
        raw.atoms.iter().map(|a| (point_from_json(&a.point), a.weight)),
    )
}

pub fn measure_to_json(mu: &AtomicMeasure) -> serde_json::Value {
    serde_json::to_value(measure_to_dto(mu)).expect("plain data serializes")
}

pub fn measure_from_str(text: &str) -> Result<AtomicMeasure> {
    measure_from_dto(parse(text, "measure")?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    idx: MultiIndex,
    re: f64,
    #[serde(default)]
    im: f64,
}

fn xi_to_dto(xi: &CoefficientVector) -> Vec<TermJson> {
    xi.iter()
        .map(|(k, z)| TermJson {
            idx: k.clone(),
            re: z.re,
            im: z.im,
        })
        .collect()
}

fn xi_from_dto(terms: Vec<TermJson>, dim: Option<usize>) -> Result<CoefficientVector> {
    let dim = match (dim, terms.first()) {
        (Some(d), _) => d,
        (None, Some(t)) => t.idx.dim(),
        (None, None) => return Err(Error::Parse("empty coefficient vector without a known dimension".into())),
    };
    CoefficientVector::new(dim, terms.into_iter().map(|t| (t.idx, Complex64::new(t.re, t.im))))
}

pub fn xi_to_json(xi: &CoefficientVector) -> serde_json::Value {
    serde_json::to_value(xi_to_dto(xi)).expect("plain data serializes")
}

/// A JSON array of coefficient vectors. `dim` is needed only to read `[]` as the zero vector.
pub fn xi_list_from_str(text: &str, dim: Option<usize>) -> Result<Vec<CoefficientVector>> {
    let raw: Vec<Vec<TermJson>> = parse(text, "coefficient vectors")?;
    raw.into_iter().map(|t| xi_from_dto(t, dim)).collect()
}

pub fn xi_list_to_json(list: &[CoefficientVector]) -> serde_json::Value {
    serde_json::Value::Array(list.iter().map(xi_to_json).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MemberJson {
    xi: Vec<TermJson>,
    measure: MeasureJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FamilyJson {
    dim: usize,
    kind: Kind,
    #[serde(default = "user_supplied")]
    provenance: Provenance,
    members: Vec<MemberJson>,
}

fn user_supplied() -> Provenance {
    Provenance::UserSupplied
}

pub fn family_to_json(family: &MeasureFamily) -> serde_json::Value {
    let dto = FamilyJson {
        dim: family.dim(),
        kind: family.kind(),
        provenance: family.provenance,
        members: family
            .iter()
            .map(|(xi, mu)| MemberJson {
                xi: xi_to_dto(xi),
                measure: measure_to_dto(mu),
            })
            .collect(),
    };
    serde_json::to_value(dto).expect("plain data serializes")
}

pub fn family_from_str(text: &str) -> Result<MeasureFamily> {
    let raw: FamilyJson = parse(text, "family")?;
    let mut family = MeasureFamily::new(raw.dim, raw.kind, raw.provenance);
    for m in raw.members {
        let xi = xi_from_dto(m.xi, Some(raw.dim))?;
        family.insert(xi, measure_from_dto(m.measure)?)?;
    }
    Ok(family)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum TargetsJson {
    Real {
        mass: f64,
        first: Vec<f64>,
        second_diag: Vec<f64>,
    },
    Complex {
        mass: f64,
        means: Vec<ComplexJson>,
        corr: Vec<Vec<ComplexJson>>,
    },
}

pub fn targets_to_json(t: &TruncationTargets) -> serde_json::Value {
    let dto = match t {
        TruncationTargets::Real { mass, first, second_diag } => TargetsJson::Real {
            mass: *mass,
            first: first.clone(),
            second_diag: second_diag.clone(),
        },
        TruncationTargets::Complex { mass, means, corr } => TargetsJson::Complex {
            mass: *mass,
            means: means.iter().map(|&z| z.into()).collect(),
            corr: matrix_to_json(corr),
        },
    };
    serde_json::to_value(dto).expect("plain data serializes")
}

pub fn targets_from_str(text: &str) -> Result<TruncationTargets> {
    match parse(text, "targets")? {
        TargetsJson::Real { mass, first, second_diag } => TruncationTargets::real(mass, first, second_diag),
        TargetsJson::Complex { mass, means, corr } => {
            TruncationTargets::complex(mass, means.into_iter().map(Into::into).collect(), matrix_from_json(&corr)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate_certificate, monomial_basis};
    use crate::real_point;
    use crate::sequences::moments_of;

    #[test]
    fn sequence_round_trip() {
        let mu = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[2.0]), 1.0)]).unwrap();
        let s = moments_of(&mu, 3);
        let text = sequence_to_json(&s).to_string();
        assert_eq!(sequence_from_str(&text).unwrap(), s);

        let z = AtomicMeasure::new(1, Kind::Complex, vec![(vec![Complex64::new(1.0, -1.0)], 0.5)]).unwrap();
        let s = moments_of(&z, 2);
        let text = sequence_to_json(&s).to_string();
        assert_eq!(sequence_from_str(&text).unwrap(), s);
    }

    #[test]
    fn measure_formats() {
        let text = r#"{"dim":1,"kind":"complex","atoms":[{"point":[[1.0,2.0]],"weight":0.5}]}"#;
        let mu = measure_from_str(text).unwrap();
        assert_eq!(mu.atoms()[0].point[0], Complex64::new(1.0, 2.0));
        assert_eq!(measure_from_str(&measure_to_json(&mu).to_string()).unwrap(), mu);
        let text = r#"{"dim":2,"kind":"real","atoms":[{"point":[1.0,-1.0],"weight":1}]}"#;
        assert_eq!(measure_from_str(text).unwrap().len(), 1);
        let err = measure_from_str("{\"dim\":1,\n\"kind\":\"real\",\n\"atoms\":[{]}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn family_round_trip() {
        let mu = AtomicMeasure::new(1, Kind::Real, vec![(real_point(&[1.0]), 1.0)]).unwrap();
        let mut xis = monomial_basis(1, 1);
        xis.push(CoefficientVector::zero(1));
        let f = generate_certificate(&mu, &xis).unwrap();
        let back = family_from_str(&family_to_json(&f).to_string()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn targets_formats() {
        let t = targets_from_str(r#"{"mass":1,"first":[0],"second_diag":[1]}"#).unwrap();
        assert_eq!(t, TruncationTargets::real(1.0, vec![0.0], vec![1.0]).unwrap());
        let c = targets_from_str(r#"{"mass":1,"means":[{"re":0}],"corr":[[{"re":1,"im":0}]]}"#).unwrap();
        assert_eq!(c.kind(), Kind::Complex);
        assert_eq!(targets_from_str(&targets_to_json(&c).to_string()).unwrap(), c);
    }

    #[test]
    fn xi_lists() {
        let list = xi_list_from_str(r#"[[{"idx":[0],"re":1}], [{"idx":[1],"re":0,"im":2}], []]"#, Some(1)).unwrap();
        assert_eq!(list.len(), 3);
        assert!(list[2].is_zero());
        assert_eq!(xi_list_from_str(&xi_list_to_json(&list).to_string(), Some(1)).unwrap(), list);
    }
}
