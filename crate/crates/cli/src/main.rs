//! `fovkit`: numerical radii, product-bound verdicts and certificates from
//! the command line.

mod exit;
mod io;
mod report;

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fovkit::bounds::{ratio_search, verify_submult_2x2};
use fovkit::commute::{certify_pair, CertificateRoute, Factor, NORMALIZED_TOL, RECONSTRUCT_TOL};
use fovkit::mat::MAX_ORDER;
use fovkit::method::{spread, MethodRegistry, AGREEMENT_TOL};
use fovkit::numrange::{boundary, contains, DEFAULT_GRID};
use fovkit::CMat;
use serde_json::{json, Value};

use crate::exit::{Failure, Status};
use crate::io::{boundary_csv, load_matrix, LoadedMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "fovkit",
    version,
    about = "Numerical ranges and numerical radius inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Numerical radius of one matrix.
    Radius {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
        method: MethodChoice,
    },
    /// Check w(AB) ≤ w(A)w(B) for a commuting 2×2 pair and classify equality.
    Verify { a: PathBuf, b: PathBuf },
    /// Convex-combination certificates for a commuting 2×2 pair.
    Decompose { a: PathBuf, b: PathBuf },
    /// Boundary of the numerical range of a 2×2 matrix as CSV.
    Boundary {
        file: PathBuf,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Largest w(AB)/(w(A)w(B)) over seeded random commuting pairs.
    Search {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        family: String,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodChoice {
    Support,
    Ellipse,
    Both,
}

struct Outcome {
    results: Value,
    inputs: Value,
    status: Status,
}

fn require_order_two(m: &LoadedMatrix) -> Result<(), Failure> {
    if m.matrix.order() != 2 {
        return Err(Failure::parse(format!(
            "{}: expected a 2×2 matrix, got order {}",
            m.path.display(),
            m.matrix.order()
        )));
    }
    Ok(())
}

fn cmd_radius(file: &Path, method: MethodChoice) -> Result<Outcome, Failure> {
    let loaded = load_matrix(file)?;
    let registry = MethodRegistry::builtin();
    let results = match method {
        MethodChoice::Both => registry.evaluate_all(&loaded.matrix)?,
        MethodChoice::Support | MethodChoice::Ellipse => {
            let name = if method == MethodChoice::Support {
                "support"
            } else {
                "ellipse"
            };
            let m = registry.get(name)?;
            if !m.supports_order(loaded.matrix.order()) {
                return Err(Failure::parse(format!(
                    "method `{name}` does not handle order {}",
                    loaded.matrix.order()
                )));
            }
            vec![(name, m.radius(&loaded.matrix)?)]
        }
    };
    let gap = spread(&results);
    let agree = gap <= AGREEMENT_TOL;
    let radii: serde_json::Map<String, Value> = results
        .iter()
        .map(|&(n, v)| (n.to_string(), json!(v)))
        .collect();
    Ok(Outcome {
        results: json!({ "radius": radii, "spread": gap, "agree": agree, "tolerance": AGREEMENT_TOL }),
        inputs: json!({ "matrix": report::input(&loaded) }),
        status: if agree {
            Status::Pass
        } else {
            Status::Disagreement
        },
    })
}

fn load_pair(a: &Path, b: &Path) -> Result<(LoadedMatrix, LoadedMatrix), Failure> {
    let a = load_matrix(a)?;
    let b = load_matrix(b)?;
    require_order_two(&a)?;
    require_order_two(&b)?;
    Ok((a, b))
}

fn cmd_verify(a: &Path, b: &Path) -> Result<Outcome, Failure> {
    let (a, b) = load_pair(a, b)?;
    let v = verify_submult_2x2(&a.matrix, &b.matrix)?;
    Ok(Outcome {
        results: report::verdict(&v),
        inputs: json!({ "a": report::input(&a), "b": report::input(&b) }),
        status: if v.holds {
            Status::Pass
        } else {
            Status::Violation
        },
    })
}

/// Re-checks a certificate bundle independently of how it was built.
fn recheck(cert: &fovkit::commute::PairCertificate, a: &CMat, b: &CMat) -> Value {
    let normalized = |m: &CMat, w: f64| m.scale_real(1.0 / w);
    match &cert.route {
        CertificateRoute::Canonical {
            pair,
            cert_a,
            cert_b,
            product,
            ..
        } => {
            let an = normalized(a, cert.radius_a);
            let bn = normalized(b, cert.radius_b);
            let reconstruct = pair
                .reconstruct(Factor::A)
                .max_abs_diff(&an)
                .max(pair.reconstruct(Factor::B).max_abs_diff(&bn));
            let certificates = cert_a.verify(&pair.canonical_matrix(Factor::A)).is_ok()
                && cert_b.verify(&pair.canonical_matrix(Factor::B)).is_ok();
            let s_within = pair.s1.abs() <= cert_a.s_hat + RECONSTRUCT_TOL
                && pair.s2.abs() <= cert_b.s_hat + RECONSTRUCT_TOL;
            let identity = (product.identity - 1.0).abs() <= RECONSTRUCT_TOL;
            let bound = product.radius_a1b1 <= product.bound + RECONSTRUCT_TOL;
            json!({
                "reconstruction_error": reconstruct,
                "reconstruction_ok": reconstruct <= 1e-9,
                "certificates_ok": certificates,
                "s_within_s_hat": s_within,
                "identity_ok": identity,
                "product_bound_ok": bound,
            })
        }
        CertificateRoute::Scalar {
            cert_a,
            cert_b,
            product,
        } => {
            let ok_a = cert_a.verify(&normalized(a, cert.radius_a)).is_ok();
            let ok_b = cert_b.verify(&normalized(b, cert.radius_b)).is_ok();
            json!({
                "certificates_ok": ok_a && ok_b,
                "product_bound_ok": product.zero_product && product.radius_a1b1 <= NORMALIZED_TOL,
            })
        }
        CertificateRoute::Diagonal | CertificateRoute::Zero => json!({}),
    }
}

fn cmd_decompose(a: &Path, b: &Path) -> Result<Outcome, Failure> {
    let (a, b) = load_pair(a, b)?;
    let verdict = verify_submult_2x2(&a.matrix, &b.matrix)?;
    let cert = certify_pair(&a.matrix, &b.matrix)?;
    let checks = recheck(&cert, &a.matrix, &b.matrix);
    let checks_pass = checks
        .as_object()
        .map(|m| m.values().all(|v| v.as_bool() != Some(false)))
        .unwrap_or(true);
    let pass = checks_pass && verdict.holds;
    Ok(Outcome {
        results: json!({
            "verdict": report::verdict(&verdict),
            "certificate": report::pair_certificate(&cert),
            "checks": checks,
        }),
        inputs: json!({ "a": report::input(&a), "b": report::input(&b) }),
        status: if pass {
            Status::Pass
        } else {
            Status::Violation
        },
    })
}

fn cmd_boundary(file: &Path, points: usize, out: &Path) -> Result<Outcome, Failure> {
    let loaded = load_matrix(file)?;
    require_order_two(&loaded)?;
    let trace = boundary(&loaded.matrix, points)?;
    let csv = boundary_csv(&trace.samples);
    fs::write(out, &csv)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", out.display())))?;
    let mut inside = true;
    for &(_, z) in &trace.samples {
        inside &= contains(&loaded.matrix, z, DEFAULT_GRID)?;
    }
    Ok(Outcome {
        results: json!({
            "out": out.display().to_string(),
            "rows": trace.samples.len(),
            "csv_sha256": io::sha256_hex(csv.as_bytes()),
            "all_inside": inside,
        }),
        inputs: json!({ "matrix": report::input(&loaded) }),
        status: if inside {
            Status::Pass
        } else {
            Status::Violation
        },
    })
}

fn cmd_search(order: usize, samples: usize, family: &str, seed: u64) -> Result<Outcome, Failure> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Failure::parse(format!(
            "order {order} outside 1..={MAX_ORDER}"
        )));
    }
    let outcome = ratio_search(order, samples, family, seed)?;
    Ok(Outcome {
        results: report::search(&outcome),
        inputs: json!({ "order": order, "samples": samples, "family": family, "seed": seed }),
        status: if outcome.bound_holds {
            Status::Pass
        } else {
            Status::Violation
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let (name, outcome) = match &cli.command {
        Command::Radius { file, method } => ("radius", cmd_radius(file, *method)),
        Command::Verify { a, b } => ("verify", cmd_verify(a, b)),
        Command::Decompose { a, b } => ("decompose", cmd_decompose(a, b)),
        Command::Boundary { file, points, out } => ("boundary", cmd_boundary(file, *points, out)),
        Command::Search {
            order,
            samples,
            family,
            seed,
        } => ("search", cmd_search(*order, *samples, family, *seed)),
    };
    match outcome {
        Ok(o) => {
            let doc = report::document(name, &argv, o.inputs, o.results, o.status == Status::Pass);
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", report::render(&doc)) {
                // a closed pipe downstream is not our failure
                Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                    eprintln!("fovkit {name}: cannot write report: {e}");
                    Status::Io.into()
                }
                _ => o.status.into(),
            }
        }
        Err(failure) => {
            eprintln!("fovkit {name}: {}", failure.message);
            failure.status.into()
        }
    }
}
