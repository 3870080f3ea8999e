//! JSON report documents.
//!
//! Every report carries `"schema": 1`, the command line that produced it,
//! a digest per input and a `pass` flag. Floats are written in shortest
//! round-trip form, so parsing a report recovers every value bit for bit.

use fovkit::bounds::{SearchOutcome, VerdictReport};
use fovkit::commute::{
    CanonicalPair, CertificateRoute, ConvexCertificate, PairCertificate, ProductBoundReport,
};
use fovkit::{CMat, CScalar};
use serde_json::{json, Map, Value};

use crate::io::{LoadedMatrix, MatrixFile};

pub const SCHEMA: u32 = 1;

pub fn document(
    command: &str,
    argv: &[String],
    inputs: Value,
    results: Value,
    pass: bool,
) -> Value {
    json!({
        "schema": SCHEMA,
        "command": { "name": command, "argv": argv },
        "inputs": inputs,
        "results": results,
        "pass": pass,
    })
}

pub fn input(loaded: &LoadedMatrix) -> Value {
    json!({
        "path": loaded.path.display().to_string(),
        "sha256": loaded.sha256,
        "order": loaded.matrix.order(),
    })
}

pub fn complex(z: CScalar) -> Value {
    json!([z.re, z.im])
}

pub fn matrix(m: &CMat) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).expect("matrix files serialize")
}

pub fn verdict(v: &VerdictReport) -> Value {
    json!({
        "wA": v.wa,
        "wB": v.wb,
        "wAB": v.wab,
        "ratio": v.ratio,
        "equality_class": v.equality_class.name(),
        "commutation_defect": v.commutation_defect,
        "holds": v.holds,
    })
}

fn canonical_pair(p: &CanonicalPair) -> Value {
    json!({
        "z1": complex(p.z1),
        "z2": complex(p.z2),
        "s1": p.s1,
        "s2": p.s2,
        "r": p.r,
        "gamma": p.gamma,
        "c": matrix(&p.c),
        "u": matrix(&p.u.u),
        "unitary_defect": p.u.defect,
        "phases": [p.phases.0, p.phases.1],
    })
}

pub fn certificate(c: &ConvexCertificate) -> Value {
    json!({
        "phi": c.phi,
        "s_hat": c.s_hat,
        "nu": c.nu,
        "t": c.t,
        "r": c.r,
        "a0": matrix(&c.a0),
        "a1": matrix(&c.a1),
    })
}

pub fn product(p: &ProductBoundReport) -> Value {
    json!({
        "u": p.u_coef,
        "v": p.v_coef,
        "identity": p.identity,
        "f_max": p.f_max,
        "w_a1b1": p.radius_a1b1,
        "bound": p.bound,
        "zero_product": p.zero_product,
    })
}

/// Certificate payload and the name of the route that produced it.
pub fn pair_certificate(cert: &PairCertificate) -> Value {
    let mut out = Map::new();
    out.insert("wA".into(), json!(cert.radius_a));
    out.insert("wB".into(), json!(cert.radius_b));
    match &cert.route {
        CertificateRoute::Canonical {
            pair,
            cert_a,
            cert_b,
            product: p,
            corners,
            radius_product,
        } => {
            out.insert("route".into(), json!("canonical"));
            out.insert("canonical".into(), canonical_pair(pair));
            out.insert("certificate_a".into(), certificate(cert_a));
            out.insert("certificate_b".into(), certificate(cert_b));
            out.insert("product_bound".into(), product(p));
            out.insert("corner_radii".into(), json!(corners));
            out.insert("w_normalized_product".into(), json!(radius_product));
        }
        CertificateRoute::Scalar {
            cert_a,
            cert_b,
            product: p,
        } => {
            out.insert("route".into(), json!("scalar"));
            out.insert("certificate_a".into(), certificate(cert_a));
            out.insert("certificate_b".into(), certificate(cert_b));
            out.insert("product_bound".into(), product(p));
        }
        CertificateRoute::Diagonal => {
            out.insert("route".into(), json!("normal"));
            out.insert("equality_case".into(), json!("b"));
            out.insert(
                "note".into(),
                json!("both matrices are normal; they are simultaneously diagonalizable and no certificate is needed"),
            );
        }
        CertificateRoute::Zero => {
            out.insert("route".into(), json!("zero"));
        }
    }
    Value::Object(out)
}

pub fn search(outcome: &SearchOutcome) -> Value {
    json!({
        "order": outcome.order,
        "max_ratio": outcome.max_ratio,
        "bound": outcome.bound,
        "bound_holds": outcome.bound_holds,
        "evaluated": outcome.evaluated,
        "argmax": {
            "family": outcome.argmax.family,
            "seed": outcome.argmax.seed,
            "stream": outcome.argmax.stream,
            "a": matrix(&outcome.argmax.a),
            "b": matrix(&outcome.argmax.b),
        },
    })
}

pub fn render(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("reports serialize")
}
