use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use truncmoment::families::{generate_certificate, monomial, parallelogram_closure, polarization_closure, MeasureFamily, Provenance};
use truncmoment::json::{family_from_str, family_to_json, measure_to_json, sequence_from_str, sequence_to_json, xi_list_to_json};
use truncmoment::sequences::moments_of;
use truncmoment::{real_point, AtomicMeasure, CoefficientVector, Kind, TruncatedSequence};

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn write(&self, name: &str, body: impl ToString) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body.to_string()).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truncmoment"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn sym_pm1() -> AtomicMeasure {
    AtomicMeasure::new(1, Kind::Real, [(real_point(&[-1.0]), 0.5), (real_point(&[1.0]), 0.5)]).unwrap()
}

fn unit(e: u32) -> CoefficientVector {
    monomial(&[e]).unwrap()
}

#[test]
fn moments_round_trip_through_json() {
    let ws = Workspace::new();
    let m = ws.write("m.json", measure_to_json(&sym_pm1()));
    let out = run(&[&"moments", &"--measure", &m, &"--degree", &"4"]);
    assert_eq!(code(&out), 0);
    let seq = sequence_from_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(seq.real_values(), &[1.0, 0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn localize_affine_polynomial() {
    let ws = Workspace::new();
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0).add(&unit(1))]));
    let out = run(&[&"localize", &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 0);
    let body = String::from_utf8(out.stdout).unwrap();
    let seq = sequence_from_str(&body).unwrap();
    assert_eq!(seq.real_values(), &[2.0, 2.0, 2.0]);
}

#[test]
fn localize_rejects_several_vectors() {
    let ws = Workspace::new();
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0), unit(1)]));
    assert_eq!(code(&run(&[&"localize", &"--sequence", &s, &"--xi", &xi])), 1);
}

#[test]
fn check_psd_exit_codes() {
    let ws = Workspace::new();
    let good = ws.write("good.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let out = run(&[&"check-psd", &"--sequence", &good, &"--order", &"2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["tool"], "truncmoment");

    let bad = TruncatedSequence::from_real_fn(1, 2, |n| [1.0, 2.0, 1.0][n.degree() as usize]);
    let bad = ws.write("bad.json", sequence_to_json(&bad));
    let out = run(&[&"check-psd", &"--sequence", &bad, &"--order", &"1"]);
    assert_eq!(code(&out), 2);
    let v = stdout_json(&out);
    assert!((v["report"]["min_eigenvalue"].as_f64().unwrap_or_else(|| v["min_eigenvalue"].as_f64().unwrap()) + 1.0).abs() < 1e-12);
}

#[test]
fn generate_then_verify_passes() {
    let ws = Workspace::new();
    let m = ws.write("m.json", measure_to_json(&sym_pm1()));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0), unit(1)]));
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let fam = ws.path("fam.json");
    let out = run(&[&"certify", &"generate", &"--measure", &m, &"--xi", &xi, &"--output", &fam]);
    assert_eq!(code(&out), 0);
    let out = run(&[&"certify", &"verify", &"--family", &fam, &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_names_missing_member() {
    let ws = Workspace::new();
    let mut family = MeasureFamily::new(1, Kind::Real, Provenance::UserSupplied);
    let generated = generate_certificate(&sym_pm1(), &[unit(0), unit(1)]).unwrap();
    for (k, v) in generated.iter() {
        family.insert(k.clone(), v.clone()).unwrap();
    }
    let fam = ws.write("fam.json", family_to_json(&family));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0), unit(1)]));
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let out = run(&[&"certify", &"verify", &"--family", &fam, &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing"), "{err}");
}

#[test]
fn verify_flags_tampered_family() {
    let ws = Workspace::new();
    let xis = [unit(0), unit(1)];
    // --xi checks every ordered pair, self-pairs included
    let pairs: Vec<_> = xis.iter().flat_map(|a| xis.iter().map(move |b| (a.clone(), b.clone()))).collect();
    let mut closure = xis.to_vec();
    closure.extend(parallelogram_closure(&pairs));
    let honest = generate_certificate(&sym_pm1(), &closure).unwrap();
    let mut tampered = MeasureFamily::new(1, Kind::Real, Provenance::UserSupplied);
    for (k, v) in honest.iter() {
        let v = if *k == unit(1) { v.scaled(3.0) } else { v.clone() };
        tampered.insert(k.clone(), v).unwrap();
    }
    let fam = ws.write("fam.json", family_to_json(&tampered));
    let xi = ws.write("xi.json", xi_list_to_json(&xis));
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let out = run(&[&"certify", &"verify", &"--family", &fam, &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_reports_cauchy_schwarz_witness() {
    let ws = Workspace::new();
    let bad = TruncatedSequence::from_real_fn(1, 2, |n| [1.0, 2.0, 1.0][n.degree() as usize]);
    let s = ws.write("s.json", sequence_to_json(&bad));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0)]));
    let out = run(&[&"certify", &"solve", &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 2);
    let text = String::from_utf8(out.stdout).unwrap() + &String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("cauchy_schwarz") || text.contains("Cauchy-Schwarz"), "{text}");
}

#[test]
fn solve_moment_sequence_succeeds() {
    let ws = Workspace::new();
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let xi = ws.write("xi.json", xi_list_to_json(&[unit(0), unit(1)]));
    let out = run(&[&"certify", &"solve", &"--sequence", &s, &"--xi", &xi]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out).to_string().contains("coupling_satisfied"));
}

#[test]
fn dilate_round_trip_and_tampered_block() {
    let ws = Workspace::new();
    let basis = [unit(0), unit(1)];
    let family = generate_certificate(&sym_pm1(), &polarization_closure(&basis)).unwrap();
    let fam = ws.write("fam.json", family_to_json(&family));
    let b = ws.write("basis.json", xi_list_to_json(&basis));
    let s = ws.write("s.json", sequence_to_json(&moments_of(&sym_pm1(), 4)));
    let out = run(&[&"dilate", &"--family", &fam, &"--basis", &b, &"--sequence", &s]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // inflating μ_{1+x} makes the block at x = 1 indefinite
    let text = std::fs::read_to_string(&fam).unwrap();
    let honest = family_from_str(&text).unwrap();
    let mut tampered = MeasureFamily::new(1, Kind::Real, Provenance::UserSupplied);
    let target = unit(0).add(&unit(1));
    for (k, v) in honest.iter() {
        let v = if *k == target { v.scaled(5.0) } else { v.clone() };
        tampered.insert(k.clone(), v).unwrap();
    }
    let bad = ws.write("bad.json", family_to_json(&tampered));
    let out = run(&[&"dilate", &"--family", &bad, &"--basis", &b, &"--sequence", &s]);
    assert_eq!(code(&out), 2);
}

#[test]
fn weak_limit_demo_matches() {
    let out = run(&[&"weak-limit-demo"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    for part in ["part1", "part2"] {
        let suites = v[part].as_array().unwrap();
        assert_eq!(suites.len(), 3);
        assert!(suites.iter().all(|s| s["matches"] == true));
    }
}

#[test]
fn malformed_json_is_an_operational_error() {
    let ws = Workspace::new();
    let broken = ws.write("broken.json", "{\"dim\": 1,\n  bad");
    let out = run(&[&"check-psd", &"--sequence", &broken, &"--order", &"1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[&"no-such-command"])), 1);
    assert_eq!(code(&run(&[&"--tol", &"0", &"weak-limit-demo"])), 1);
    assert_eq!(code(&run(&[&"--help"])), 0);
}
