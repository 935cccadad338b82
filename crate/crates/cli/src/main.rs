//! `truncmoment`: command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on operational errors (bad
//! input, missing family members, ...), 2 when a violation is certified
//! (failed positivity test, infeasible truncation, non-PSD block, failed audit).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use truncmoment::dilation::{naimark_dilate, reconstruct_moments, semispectral_from_family};
use truncmoment::families::{
    generate_certificate, homogeneity_closure, parallelogram_closure, polarization_closure,
    sesquilinear_audit, verify_moment_conditions, verify_moment_conditions_for, verify_parallelogram_positivity,
    MeasureFamily, Region,
};
use truncmoment::json::{
    family_from_str, family_to_json, matrix_to_json, measure_from_str, measure_to_json, sequence_from_str,
    sequence_to_json, targets_from_str, targets_to_json, xi_list_from_str,
};
use truncmoment::linalg::{spectral_norm, HermitianEigen};
use truncmoment::rkhs::{check_positive_definite, null_space};
use truncmoment::sequences::localize;
use truncmoment::solver::{feasibility, solve_family, solve_initial_truncation, Feasibility};
use truncmoment::weaklimits::{part1_suites, part2_suites};
use truncmoment::{CoefficientVector, Error, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "truncmoment", version, about = "Certify and audit truncated moment data")]
struct Cli {
    /// Numerical tolerance (positive)
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments of an atomic measure up to a degree
    Moments {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        degree: u32,
    },
    /// Localized sequence a^ξ for a single coefficient vector
    Localize {
        #[arg(long)]
        sequence: PathBuf,
        /// JSON array holding one coefficient vector
        #[arg(long)]
        xi: PathBuf,
    },
    /// Positive-definiteness test of a given order
    CheckPsd {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        order: u32,
    },
    /// Certificate families: generate, verify, or solve
    Certify {
        #[command(subcommand)]
        mode: Certify,
    },
    /// Semispectral measure of a family and its Naimark dilation
    Dilate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        basis: PathBuf,
        /// Sequence supplying the quotient by the null space and the reconstruction target
        #[arg(long)]
        sequence: PathBuf,
        /// Order of the quotient (defaults to the largest basis degree)
        #[arg(long)]
        order: Option<u32>,
    },
    /// Run the bundled weak-limit example suites
    WeakLimitDemo,
}

#[derive(Subcommand)]
enum Certify {
    /// Family μ_ξ = |p_ξ|² dμ over the ξ list and its parallelogram closure
    Generate {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        xi: PathBuf,
        /// Also include the polarization and homogeneity closure of this basis
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Audit a family against a sequence
    Verify(VerifyArgs),
    /// Solve every order-two truncation, or a single target set
    Solve {
        #[arg(long, required_unless_present = "targets")]
        sequence: Option<PathBuf>,
        #[arg(long, requires = "sequence")]
        xi: Option<PathBuf>,
        /// Targets given directly instead of through a sequence
        #[arg(long, conflicts_with_all = ["sequence", "xi"])]
        targets: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    sequence: PathBuf,
    /// Check exactly these ξ and all their ordered pairs (default: every member)
    #[arg(long)]
    xi: Option<PathBuf>,
    /// Run the sesquilinear audit over this basis
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Include the homogeneity check in the sesquilinear audit
    #[arg(long, requires = "basis")]
    homogeneity: bool,
}

/// Outcome of a command: a JSON document and whether a violation was certified.
struct Outcome {
    body: Value,
    violation: bool,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Outcome { body, violation: false }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, Error>) -> Result<T, Error> {
    f(&read(path)?).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn report(command: &str, tol: f64, body: Value) -> Value {
    let mut out = json!({
        "tool": "truncmoment",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "tol": tol,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut out, body) {
        dst.extend(src);
    }
    out
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report data serializes")
}

fn ordered_pairs(xis: &[CoefficientVector]) -> Vec<(CoefficientVector, CoefficientVector)> {
    let mut out = Vec::new();
    for a in xis {
        for b in xis {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

fn pairs_present(family: &MeasureFamily) -> Vec<(CoefficientVector, CoefficientVector)> {
    let keys: Vec<CoefficientVector> = family.keys().cloned().collect();
    ordered_pairs(&keys)
        .into_iter()
        .filter(|(a, b)| family.contains(&a.add(b)) && family.contains(&a.sub(b)))
        .collect()
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let tol = cli.tol;
    match &cli.command {
        Command::Moments { measure, degree } => {
            let mu = with_file(measure, measure_from_str)?;
            Ok(Outcome::ok(sequence_to_json(&truncmoment::sequences::moments_of(&mu, *degree))))
        }
        Command::Localize { sequence, xi } => {
            let seq = with_file(sequence, sequence_from_str)?;
            let xis = with_file(xi, |t| xi_list_from_str(t, Some(seq.dim())))?;
            let [xi] = xis.as_slice() else {
                return Err(Error::Parse(format!("{}: expected exactly one coefficient vector", xi.display())));
            };
            Ok(Outcome::ok(sequence_to_json(&localize(&seq, xi)?)))
        }
        Command::CheckPsd { sequence, order } => {
            let seq = with_file(sequence, sequence_from_str)?;
            let r = check_positive_definite(&seq, *order, tol)?;
            Ok(Outcome {
                violation: !r.verdict.passed(),
                body: report("check-psd", tol, to_value(&r)),
            })
        }
        Command::Certify { mode } => certify(mode, tol),
        Command::Dilate {
            family,
            basis,
            sequence,
            order,
        } => dilate(family, basis, sequence, *order, tol),
        Command::WeakLimitDemo => weak_limit_demo(tol),
    }
}

fn certify(mode: &Certify, tol: f64) -> Result<Outcome, Error> {
    match mode {
        Certify::Generate { measure, xi, basis } => {
            let mu = with_file(measure, measure_from_str)?;
            let xis = with_file(xi, |t| xi_list_from_str(t, Some(mu.dim())))?;
            let mut all = xis.clone();
            all.extend(parallelogram_closure(&ordered_pairs(&xis)));
            if let Some(b) = basis {
                let basis = with_file(b, |t| xi_list_from_str(t, Some(mu.dim())))?;
                all.extend(polarization_closure(&basis));
                all.extend(homogeneity_closure(&basis));
            }
            Ok(Outcome::ok(family_to_json(&generate_certificate(&mu, &all)?)))
        }
        Certify::Verify(args) => verify(args, tol),
        Certify::Solve { sequence, xi, targets } => {
            if let Some(path) = targets {
                let t = with_file(path, targets_from_str)?;
                return match feasibility(&t, tol) {
                    Feasibility::Infeasible(w) => Ok(Outcome {
                        violation: true,
                        body: report("certify solve", tol, json!({"feasible": false, "witness": to_value(&w)})),
                    }),
                    Feasibility::Feasible => {
                        let mu = solve_initial_truncation(&t, tol)?;
                        Ok(Outcome::ok(report(
                            "certify solve",
                            tol,
                            json!({"feasible": true, "targets": targets_to_json(&t), "measure": measure_to_json(&mu)}),
                        )))
                    }
                };
            }
            let seq_path = sequence.as_ref().expect("clap enforces --sequence");
            let seq = with_file(seq_path, sequence_from_str)?;
            let xis = match xi {
                Some(p) => with_file(p, |t| xi_list_from_str(t, Some(seq.dim())))?,
                None => vec![CoefficientVector::one(seq.dim())],
            };
            match solve_family(&seq, &xis, tol) {
                Ok(sol) => {
                    let coupled = sol.constraint_report.verdict.passed();
                    Ok(Outcome::ok(report(
                        "certify solve",
                        tol,
                        json!({
                            "feasible": true,
                            "coupling_satisfied": coupled,
                            "family": family_to_json(&sol.family),
                            "parallelogram": to_value(&sol.constraint_report),
                        }),
                    )))
                }
                Err(Error::InfeasibleFamily(list)) => {
                    let items: Vec<Value> = list
                        .iter()
                        .map(|(xi, w)| {
                            json!({"xi": xi, "witness": to_value(w), "reason": w.to_string()})
                        })
                        .collect();
                    Ok(Outcome {
                        violation: true,
                        body: report("certify solve", tol, json!({"feasible": false, "infeasible": items})),
                    })
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn verify(args: &VerifyArgs, tol: f64) -> Result<Outcome, Error> {
    let family = with_file(&args.family, family_from_str)?;
    let seq = with_file(&args.sequence, sequence_from_str)?;
    let (moments, pairs) = match &args.xi {
        Some(p) => {
            let xis = with_file(p, |t| xi_list_from_str(t, Some(family.dim())))?;
            (verify_moment_conditions_for(&family, &seq, &xis, tol)?, ordered_pairs(&xis))
        }
        None => (verify_moment_conditions(&family, &seq, tol)?, pairs_present(&family)),
    };
    let parallelogram = verify_parallelogram_positivity(&family, &pairs, tol)?;
    let mut ok = moments.verdict.passed() && parallelogram.verdict.passed();
    let mut body = json!({
        "moment_conditions": to_value(&moments),
        "parallelogram": to_value(&parallelogram),
    });
    if let Some(b) = &args.basis {
        let basis = with_file(b, |t| xi_list_from_str(t, Some(family.dim())))?;
        let mut regions: Vec<Region> = Vec::new();
        let mut seen: Vec<truncmoment::Point> = Vec::new();
        for (_, mu) in family.iter() {
            for a in mu.atoms() {
                if !seen.iter().any(|p| truncmoment::sequences::same_point(p, &a.point)) {
                    seen.push(a.point.clone());
                }
            }
        }
        regions.extend(seen.into_iter().map(|p| Region::Points(vec![p])));
        regions.push(Region::Full);
        let audit = sesquilinear_audit(&family, &basis, &regions, &seq, tol, args.homogeneity)?;
        ok &= audit.verdict.passed();
        body["sesquilinear"] = to_value(&audit);
    }
    body["verdict"] = json!(if ok { "pass" } else { "fail" });
    Ok(Outcome {
        violation: !ok,
        body: report("certify verify", tol, body),
    })
}

fn dilate(family: &Path, basis: &Path, sequence: &Path, order: Option<u32>, tol: f64) -> Result<Outcome, Error> {
    let family = with_file(family, family_from_str)?;
    let seq = with_file(sequence, sequence_from_str)?;
    let basis = with_file(basis, |t| xi_list_from_str(t, Some(family.dim())))?;
    let order = order.unwrap_or_else(|| basis.iter().map(|b| b.deg()).max().unwrap_or(0));
    let quotient = null_space(&seq, order, tol)?;
    let f = match semispectral_from_family(&family, &basis, &quotient, tol) {
        Ok(f) => f,
        Err(Error::PsdDefect { atom, eigenvalue }) => {
            return Ok(Outcome {
                violation: true,
                body: report(
                    "dilate",
                    tol,
                    json!({"psd_defect": {"atom": atom, "eigenvalue": eigenvalue}, "verdict": "fail"}),
                ),
            })
        }
        Err(e) => return Err(e),
    };
    let d = naimark_dilate(&f, tol)?;
    let block_min: Vec<f64> = f.blocks().iter().map(|b| HermitianEigen::new(b).min()).collect();
    let mut compression = 0.0_f64;
    let mut idempotence = 0.0_f64;
    for (j, b) in f.blocks().iter().enumerate() {
        let e = d.projection(j);
        compression = compression.max(spectral_norm(&(d.compress(&e) - b)));
        idempotence = idempotence.max(spectral_norm(&(&e * &e - &e)));
    }
    let vacuum = d.vacuum(&basis)?;
    let rebuilt = reconstruct_moments(&d, &vacuum, seq.max_degree())?;
    let residual = rebuilt.max_difference(&seq)?;
    let scale = seq.max_abs().max(1.0);
    let ok = residual <= tol * scale;
    let body = json!({
        "atoms": f.points().len(),
        "block_dimension": f.rank(),
        "quotient_dimension": quotient.dimension(),
        "dilation_dimension": d.space_dim(),
        "block_min_eigenvalues": block_min,
        "total": matrix_to_json(f.total()),
        "blocks": f.blocks().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "compression_defect": compression,
        "projection_defect": idempotence,
        "reconstruction_residual": residual,
        "verdict": if ok { "pass" } else { "fail" },
    });
    Ok(Outcome {
        violation: !ok,
        body: report("dilate", tol, body),
    })
}

fn weak_limit_demo(tol: f64) -> Result<Outcome, Error> {
    let mut ok = true;
    let mut part1 = Vec::new();
    for s in part1_suites() {
        let r = s.run(tol)?;
        let matches = r.verdicts() == s.expected && !r.falsification;
        ok &= matches;
        part1.push(json!({"name": s.name, "expected": to_value(&s.expected), "matches": matches, "report": to_value(&r)}));
    }
    let mut part2 = Vec::new();
    for s in part2_suites() {
        let r = s.run(tol)?;
        let matches = r.verdicts() == s.expected && !r.falsification;
        ok &= matches;
        part2.push(json!({"name": s.name, "expected": to_value(&s.expected), "matches": matches, "report": to_value(&r)}));
    }
    Ok(Outcome {
        violation: !ok,
        body: report("weak-limit-demo", tol, json!({"part1": part1, "part2": part2, "verdict": if ok { "pass" } else { "fail" }})),
    })
}

fn certified_violation(e: &Error) -> bool {
    matches!(
        e,
        Error::Infeasible(_) | Error::InfeasibleFamily(_) | Error::Inconsistent | Error::PsdDefect { .. }
    )
}

fn emit(output: &Option<PathBuf>, value: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match output {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // usage errors are operational failures; 2 is reserved for certified violations
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        eprintln!("error: --tol must be a positive finite number");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli.output, &outcome.body) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if outcome.violation { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            if certified_violation(&e) {
                let body = report("error", cli.tol, json!({"violation": e.to_string()}));
                let _ = emit(&cli.output, &body);
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
