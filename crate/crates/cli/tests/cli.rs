use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fovkit");

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().expect("temp dir"),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes a matrix given as rows of `[re, im]` pairs.
    fn matrix(&self, name: &str, rows: &[&[[f64; 2]]]) -> PathBuf {
        let entries: Vec<Vec<[f64; 2]>> = rows.iter().map(|r| r.to_vec()).collect();
        let doc = serde_json::json!({ "order": rows.len(), "entries": entries });
        let path = self.path(name);
        fs::write(&path, doc.to_string()).unwrap();
        path
    }

    fn raw(&self, name: &str, text: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(&path, text).unwrap();
        path
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_paths(cmd: &str, paths: &[&Path], extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec![cmd.to_string()];
    args.extend(paths.iter().map(|p| p.display().to_string()));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

const C06: &[&[[f64; 2]]] = &[&[[0.8, 0.0], [1.2, 0.0]], &[[0.0, 0.0], [-0.8, 0.0]]];
/// 0.82i·I + 0.3·C(0.6).
const B_WORKED: &[&[[f64; 2]]] = &[&[[0.24, 0.82], [0.36, 0.0]], &[[0.0, 0.0], [-0.24, 0.82]]];
const NILPOTENT: &[&[[f64; 2]]] = &[&[[0.0, 0.0], [1.0, 0.0]], &[[0.0, 0.0], [0.0, 0.0]]];

#[test]
fn radius_of_c_matrix_agrees_across_methods() {
    let ws = Workspace::new();
    let c = ws.matrix("c.json", C06);
    let out = run_paths("radius", &[&c], &[]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    let radii = &doc["results"]["radius"];
    assert!((num(&radii["ellipse"]) - 1.0).abs() <= 1e-12);
    assert!((num(&radii["support"]) - 1.0).abs() <= 1e-9);
    assert_eq!(doc["results"]["agree"], true);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["schema"], 1);
}

#[test]
fn radius_of_identity_and_nilpotent() {
    let ws = Workspace::new();
    let eye = ws.matrix(
        "i.json",
        &[&[[1.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [1.0, 0.0]]],
    );
    let nil = ws.matrix("n.json", NILPOTENT);
    let doc = report(&run_paths("radius", &[&eye], &[]));
    assert!((num(&doc["results"]["radius"]["support"]) - 1.0).abs() <= 1e-12);
    for method in ["support", "ellipse", "both"] {
        let out = run_paths("radius", &[&nil], &["--method", method]);
        assert_eq!(code(&out), 0, "{method}");
        for (_, v) in report(&out)["results"]["radius"].as_object().unwrap() {
            assert!((num(v) - 0.5).abs() <= 1e-12);
        }
    }
}

#[test]
fn radius_of_larger_matrix_uses_support_only() {
    let ws = Workspace::new();
    let shift = ws.matrix(
        "s.json",
        &[
            &[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
            &[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            &[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        ],
    );
    let out = run_paths("radius", &[&shift], &[]);
    assert_eq!(code(&out), 0);
    let radii = report(&out)["results"]["radius"].clone();
    assert!(radii.get("ellipse").is_none());
    assert!((num(&radii["support"]) - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9);
    assert_eq!(
        code(&run_paths("radius", &[&shift], &["--method", "ellipse"])),
        2
    );
}

#[test]
fn verify_classifies_equality_cases() {
    let ws = Workspace::new();
    let c = ws.matrix("c.json", C06);
    let scalar = ws.matrix(
        "z.json",
        &[&[[0.0, 2.0], [0.0, 0.0]], &[[0.0, 0.0], [0.0, 2.0]]],
    );
    let out = run_paths("verify", &[&scalar, &c], &[]);
    assert_eq!(code(&out), 0);
    let r = &report(&out)["results"];
    assert_eq!(r["equality_class"], "ScalarA");
    assert!((num(&r["ratio"]) - 1.0).abs() <= 1e-9);

    let out = run_paths("verify", &[&c, &c], &[]);
    assert_eq!(code(&out), 0);
    let r = &report(&out)["results"];
    assert_eq!(r["equality_class"], "Strict");
    assert!((num(&r["wAB"]) - 0.64).abs() <= 1e-9);
    assert_eq!(r["holds"], true);

    let d1 = ws.matrix(
        "d1.json",
        &[&[[3.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [1.0, 0.0]]],
    );
    let d2 = ws.matrix(
        "d2.json",
        &[&[[2.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [0.5, 0.0]]],
    );
    let r = report(&run_paths("verify", &[&d1, &d2], &[]))["results"].clone();
    assert_eq!(r["equality_class"], "SimulDiagOrdered");
}

#[test]
fn verify_rejects_non_commuting_pairs() {
    let ws = Workspace::new();
    let n = ws.matrix("n.json", NILPOTENT);
    let m = ws.matrix(
        "m.json",
        &[&[[0.0, 0.0], [0.0, 0.0]], &[[1.0, 0.0], [0.0, 0.0]]],
    );
    let out = run_paths("verify", &[&n, &m], &[]);
    assert_eq!(code(&out), 5);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("verify"));
}

#[test]
fn decompose_worked_pair() {
    let ws = Workspace::new();
    let a = ws.matrix("a.json", C06);
    let b = ws.matrix("b.json", B_WORKED);
    let out = run_paths("decompose", &[&a, &b], &[]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    let cert = &doc["results"]["certificate"];
    assert_eq!(cert["route"], "canonical");
    assert!((num(&cert["certificate_a"]["t"]) - 1.0).abs() <= 1e-9);
    assert!((num(&cert["certificate_b"]["t"]) - 0.5).abs() <= 1e-9);
    assert!((num(&cert["canonical"]["r"]) - 0.6).abs() <= 1e-12);
    assert!((num(&cert["product_bound"]["identity"]) - 1.0).abs() <= 1e-10);
    assert_eq!(cert["product_bound"]["zero_product"], false);
    for (k, v) in doc["results"]["checks"].as_object().unwrap() {
        assert_ne!(v, &Value::Bool(false), "{k}");
    }
}

#[test]
fn decompose_scalar_and_degenerate_routes() {
    let ws = Workspace::new();
    let c = ws.matrix("c.json", C06);
    let scalar = ws.matrix(
        "s.json",
        &[&[[0.0, 1.0], [0.0, 0.0]], &[[0.0, 0.0], [0.0, 1.0]]],
    );
    let doc = report(&run_paths("decompose", &[&scalar, &c], &[]));
    assert_eq!(doc["pass"], true);
    let cert = &doc["results"]["certificate"];
    let t = |k: &str| num(&cert[k]["t"]);
    assert!(t("certificate_a").abs() <= 1e-12, "{cert}");

    // equal diagonal entries give r = 1, where the normalized product vanishes
    let n = ws.matrix("n.json", NILPOTENT);
    let n2 = ws.matrix(
        "n2.json",
        &[&[[0.0, 0.0], [0.5, 0.0]], &[[0.0, 0.0], [0.0, 0.0]]],
    );
    let doc = report(&run_paths("decompose", &[&n, &n2], &[]));
    assert_eq!(doc["pass"], true);
    assert_eq!(
        doc["results"]["certificate"]["product_bound"]["zero_product"],
        true
    );

    let d1 = ws.matrix(
        "d1.json",
        &[&[[1.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [-1.0, 0.0]]],
    );
    let d2 = ws.matrix(
        "d2.json",
        &[&[[0.0, 1.0], [0.0, 0.0]], &[[0.0, 0.0], [2.0, 0.0]]],
    );
    let doc = report(&run_paths("decompose", &[&d1, &d2], &[]));
    assert_eq!(doc["results"]["certificate"]["route"], "normal");
    assert_eq!(doc["results"]["certificate"]["equality_case"], "b");
}

fn read_csv(path: &Path) -> Vec<[f64; 3]> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,re,im"));
    lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [f[0], f[1], f[2]]
        })
        .collect()
}

#[test]
fn boundary_of_c_matrix() {
    let ws = Workspace::new();
    let c = ws.matrix("c.json", C06);
    let csv = ws.path("c.csv");
    let out = run_paths(
        "boundary",
        &[&c],
        &["--points", "4", "--out", csv.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["results"]["all_inside"], true);
    let rows = read_csv(&csv);
    let expect = [
        [0.0, 1.0, 0.0],
        [PI / 2.0, 0.0, 0.6],
        [PI, -1.0, 0.0],
        [1.5 * PI, 0.0, -0.6],
    ];
    assert_eq!(rows.len(), 4);
    for (row, want) in rows.iter().zip(expect) {
        for k in 0..3 {
            assert!((row[k] - want[k]).abs() <= 1e-12, "{row:?} vs {want:?}");
        }
    }
}

#[test]
fn boundary_of_hermitian_is_a_segment() {
    let ws = Workspace::new();
    let d = ws.matrix(
        "d.json",
        &[&[[1.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [-1.0, 0.0]]],
    );
    let csv = ws.path("d.csv");
    let out = run_paths(
        "boundary",
        &[&d],
        &["--points", "16", "--out", csv.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0);
    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 16);
    for [_, re, im] in rows {
        assert!(im.abs() <= 1e-12 && re.abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn boundary_points_are_members() {
    let ws = Workspace::new();
    let a = ws.matrix(
        "a.json",
        &[&[[0.3, -1.1], [2.0, 0.7]], &[[-0.4, 0.2], [1.5, 0.9]]],
    );
    let csv = ws.path("a.csv");
    let out = run_paths(
        "boundary",
        &[&a],
        &["--points", "64", "--out", csv.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["results"]["all_inside"], true);
    assert_eq!(doc["results"]["rows"], 64);
    assert_eq!(read_csv(&csv).len(), 64);
}

#[test]
fn boundary_write_failure_is_io() {
    let ws = Workspace::new();
    let c = ws.matrix("c.json", C06);
    let bad = ws.path("missing-dir").join("out.csv");
    let out = run_paths(
        "boundary",
        &[&c],
        &["--points", "8", "--out", bad.to_str().unwrap()],
    );
    assert_eq!(code(&out), 6);
}

fn search(order: &str, samples: &str, family: &str, seed: &str) -> Output {
    run(&[
        "search",
        "--order",
        order,
        "--samples",
        samples,
        "--family",
        family,
        "--seed",
        seed,
    ])
}

#[test]
fn search_order_two_never_exceeds_one() {
    let out = search("2", "10000", "canonical-form", "11");
    assert_eq!(code(&out), 0);
    let r = report(&out)["results"].clone();
    assert!(num(&r["max_ratio"]) <= 1.0 + 1e-9);
    assert_eq!(r["bound_holds"], true);
}

#[test]
fn search_order_four_reaches_two() {
    let out = search("4", "20", "shared-triangular", "3");
    assert_eq!(code(&out), 0);
    let r = report(&out)["results"].clone();
    assert!(num(&r["max_ratio"]) >= 2.0 - 1e-9);
    assert_eq!(r["argmax"]["family"], "seeded-extremal");
}

#[test]
fn search_without_samples_reports_seeds_only() {
    let out = search("3", "0", "diagonal", "1");
    assert_eq!(code(&out), 0);
    let r = report(&out)["results"].clone();
    assert_eq!(r["evaluated"], 1);
    assert_eq!(r["argmax"]["family"], "seeded-scalar");
}

#[test]
fn search_argmax_replays() {
    let ws = Workspace::new();
    let r = report(&search("3", "50", "polynomial-in-A", "5"))["results"].clone();
    let a = ws.raw("a.json", &r["argmax"]["a"].to_string());
    let b = ws.raw("b.json", &r["argmax"]["b"].to_string());
    let wa = num(
        &report(&run_paths("radius", &[&a], &["--method", "support"]))["results"]["radius"]
            ["support"],
    );
    let wb = num(
        &report(&run_paths("radius", &[&b], &["--method", "support"]))["results"]["radius"]
            ["support"],
    );
    assert!(wa > 0.0 && wb > 0.0);
    assert!(num(&r["max_ratio"]) <= 2.0 + 1e-9);
}

#[test]
fn search_rejects_bad_arguments() {
    assert_eq!(code(&search("2", "5", "no-such-family", "1")), 2);
    assert_eq!(code(&search("17", "5", "diagonal", "1")), 2);
    assert_eq!(code(&search("0", "5", "diagonal", "1")), 2);
    assert_eq!(
        code(&run(&[
            "search",
            "--order",
            "2",
            "--samples",
            "5",
            "--family",
            "diagonal"
        ])),
        2
    );
}

#[test]
fn malformed_and_missing_inputs() {
    let ws = Workspace::new();
    let bad = ws.raw("bad.json", r#"{"order": 2}"#);
    assert_eq!(code(&run_paths("radius", &[&bad], &[])), 2);
    let ragged = ws.raw(
        "r.json",
        r#"{"order": 2, "entries": [[[1, 0], [0, 0]], [[1, 0]]]}"#,
    );
    assert_eq!(code(&run_paths("radius", &[&ragged], &[])), 2);
    let missing = ws.path("nope.json");
    assert_eq!(code(&run_paths("radius", &[&missing], &[])), 6);
    let big = ws.matrix(
        "big.json",
        &[&[[1.0, 0.0]; 3], &[[0.0, 0.0]; 3], &[[0.0, 0.0]; 3]],
    );
    let c = ws.matrix("c.json", C06);
    assert_eq!(code(&run_paths("verify", &[&big, &c], &[])), 2);
}

#[test]
fn reports_round_trip_and_repeat() {
    let ws = Workspace::new();
    let a = ws.matrix("a.json", C06);
    let b = ws.matrix("b.json", B_WORKED);
    let first = run_paths("decompose", &[&a, &b], &[]);
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap(), text.trim_end());
    assert_eq!(doc["command"]["name"], "decompose");
    assert_eq!(doc["inputs"]["a"]["sha256"].as_str().unwrap().len(), 64);

    let second = run_paths("decompose", &[&a, &b], &[]);
    assert_eq!(first.stdout, second.stdout);
    let s1 = search("5", "40", "canonical-form", "9");
    let s2 = search("5", "40", "canonical-form", "9");
    assert_eq!(code(&s1), code(&s2));
    assert_eq!(s1.stdout, s2.stdout);
}
