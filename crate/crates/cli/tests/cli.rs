use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qopcoh");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", self.stdout))
    }
}

fn qopcoh_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("QOPCOH_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn qopcoh(args: &[&str]) -> Run {
    qopcoh_env(args, &[])
}

fn c(re: f64, im: f64) -> Value {
    json!([re, im])
}

fn real_matrix(rows: &[&[f64]]) -> Value {
    Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(|x| c(*x, 0.0)).collect())).collect())
}

fn op_doc(d: usize, kind: &str, matrices: Vec<Value>) -> Value {
    json!({ "schema_version": "1", "d": d, "kind": kind, "matrices": matrices, "metadata": {} })
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn identity_doc() -> Value {
    op_doc(2, "unitary", vec![real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]])])
}

fn hadamard_doc() -> Value {
    op_doc(2, "unitary", vec![real_matrix(&[&[H, H], &[H, -H]])])
}

fn dephasing_doc() -> Value {
    op_doc(2, "kraus", vec![real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]]), real_matrix(&[&[0.0, 0.0], &[0.0, 1.0]])])
}

fn max_coherent_doc() -> Value {
    op_doc(2, "kraus", vec![real_matrix(&[&[H, H], &[H, H]])])
}

fn entry(m: &Value, r: usize, col: usize) -> (f64, f64) {
    let z = &m[r][col];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

#[test]
fn convert_identity_to_choi() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "id.json", &identity_doc());
    let r = qopcoh(&["convert", s(&f), "--to", "choi"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["kind"], "choi");
    let m = &v["matrices"][0];
    for (row, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        assert!((entry(m, row, col).0 - 0.5).abs() < 1e-15);
    }
    assert!(entry(m, 1, 1).0.abs() < 1e-15);
    assert_eq!(v["metadata"]["cptp"], "true");
}

#[test]
fn convert_dephasing_to_choi_is_diagonal() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "deph.json", &dephasing_doc());
    let v = qopcoh(&["convert", s(&f), "--to", "choi"]).json();
    let m = &v["matrices"][0];
    for r in 0..4 {
        for col in 0..4 {
            let want = if r == col && (r == 0 || r == 3) { 0.5 } else { 0.0 };
            assert!((entry(m, r, col).0 - want).abs() < 1e-15);
        }
    }
}

#[test]
fn non_cptp_choi_converts_to_kraus_and_is_flagged() {
    let dir = TempDir::new().unwrap();
    let proj = real_matrix(&[&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &[0.0; 4], &[0.0; 4]]);
    let f = write(&dir, "p.json", &op_doc(2, "choi", vec![proj]));
    let r = qopcoh(&["convert", s(&f), "--to", "kraus"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["kind"], "kraus");
    assert_eq!(v["metadata"]["cptp"], "false");
    let k = v["matrices"][0].clone();
    assert!((entry(&k, 0, 0).0 - 2f64.sqrt()).abs() < 1e-12);

    let back = write(&dir, "k.json", &v);
    let r = qopcoh(&["check", s(&back), "--predicate", "cptp"]);
    assert_eq!(r.code, 1);
}

#[test]
fn kraus_choi_kraus_round_trip_keeps_action() {
    let dir = TempDir::new().unwrap();
    let r = qopcoh(&["random", "--kind", "cptp", "--d", "2", "--seed", "5", "--env", "2"]);
    assert_eq!(r.code, 0);
    let orig = write(&dir, "orig.json", &r.json());
    let choi = qopcoh(&["convert", s(&orig), "--to", "choi"]).json();
    let cf = write(&dir, "choi.json", &choi);
    let kraus = qopcoh(&["convert", s(&cf), "--to", "kraus"]).json();
    let kf = write(&dir, "kraus.json", &kraus);
    let again = qopcoh(&["convert", s(&kf), "--to", "choi"]).json();
    let (a, b) = (&choi["matrices"][0], &again["matrices"][0]);
    for r in 0..4 {
        for col in 0..4 {
            let (x, y) = (entry(a, r, col), entry(b, r, col));
            assert!((x.0 - y.0).abs() < 1e-10 && (x.1 - y.1).abs() < 1e-10);
        }
    }
}

#[test]
fn unitary_conversion_requires_pure_maximally_entangled_choi() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "deph.json", &dephasing_doc());
    let r = qopcoh(&["convert", s(&f), "--to", "unitary"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not pure"), "{}", r.stderr);

    let h = write(&dir, "h.json", &hadamard_doc());
    let choi = write(&dir, "hc.json", &qopcoh(&["convert", s(&h), "--to", "choi"]).json());
    let u = qopcoh(&["convert", s(&choi), "--to", "unitary"]).json();
    let m = &u["matrices"][0];
    assert!((entry(m, 0, 0).0 - H).abs() < 1e-10);
    assert!((entry(m, 1, 1).0 + H).abs() < 1e-10);
}

#[test]
fn check_predicates() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &identity_doc());
    assert_eq!(qopcoh(&["check", s(&id), "--predicate", "cptp"]).code, 0);

    let h = write(&dir, "h.json", &hadamard_doc());
    let r = qopcoh(&["check", s(&h), "--predicate", "incoherent"]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["passed"], false);
    assert!((v["body"]["max_off_diagonal"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn maximally_coherent_operation_fails_cptp_at_default_tolerance() {
    // Its Kraus operator has K^dag K = [[1,1],[1,1]], so tr_O C = [[1/2,1/2],[1/2,1/2]].
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "max.json", &max_coherent_doc());
    let r = qopcoh(&["check", s(&f), "--predicate", "cptp"]);
    assert_eq!(r.code, 1);
    assert!((r.json()["body"]["marginal_residual"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let loose = qopcoh_env(&["check", s(&f), "--predicate", "cptp"], &[("QOPCOH_TOL", "0.6")]);
    assert_eq!(loose.code, 0);
    assert_eq!(loose.json()["body"]["tolerance"], 0.6);
}

#[test]
fn bad_tolerance_override_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "id.json", &identity_doc());
    assert_eq!(qopcoh_env(&["check", s(&f), "--predicate", "cptp"], &[("QOPCOH_TOL", "abc")]).code, 2);
    assert_eq!(qopcoh_env(&["check", s(&f), "--predicate", "cptp"], &[("QOPCOH_TOL", "-1")]).code, 2);
}

#[test]
fn dephase_outputs_incoherent_choi() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "h.json", &hadamard_doc());
    let out = dir.path().join("hd.json");
    assert_eq!(qopcoh(&["dephase", s(&h), "-o", s(&out)]).code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["kind"], "choi");
    assert_eq!(v["metadata"]["cptp"], "true");
    let m = &v["matrices"][0];
    for k in 0..4 {
        assert!((entry(m, k, k).0 - 0.25).abs() < 1e-15);
    }
    assert_eq!(qopcoh(&["check", s(&out), "--predicate", "incoherent"]).code, 0);

    let id = write(&dir, "id.json", &identity_doc());
    let v = qopcoh(&["dephase", s(&id)]).json();
    let m = &v["matrices"][0];
    assert!((entry(m, 0, 0).0 - 0.5).abs() < 1e-15);
    assert!(entry(m, 0, 3).0.abs() < 1e-15);
}

#[test]
fn classify_documents() {
    let dir = TempDir::new().unwrap();
    let phase_out = write(&dir, "po.json", &json!({ "schema_version": "1", "d": 2, "kind": "phase_out" }));
    let v = qopcoh(&["classify", s(&phase_out)]).json();
    assert_eq!(v["body"]["in_diso"], true);

    let had = json!({ "schema_version": "1", "d": 2, "kind": "sandwich", "outer": hadamard_doc(), "inner": hadamard_doc() });
    let v = qopcoh(&["classify", s(&write(&dir, "h.json", &had))]).json();
    assert_eq!(v["body"]["in_miso"], false);

    let inc = json!({ "schema_version": "1", "d": 2, "kind": "sandwich", "outer": dephasing_doc(), "inner": identity_doc() });
    let v = qopcoh(&["classify", s(&write(&dir, "i.json", &inc))]).json();
    assert_eq!(v["body"]["in_miso"], true);
}

#[test]
fn measure_values() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &identity_doc());
    let v = qopcoh(&["measure", s(&id)]).json();
    assert_eq!(v["body"]["value"], 0.707106781187);
    assert_eq!(v["body"]["kind"], "exact_pure");

    let x = write(&dir, "x.json", &op_doc(2, "unitary", vec![real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])]));
    let v = qopcoh(&["measure", s(&x), "--method", "qubit-closed-form"]).json();
    assert_eq!(v["body"]["value"], 0.707106781187);
    assert_eq!(v["body"]["kind"], "closed_form_qubit");

    let m = write(&dir, "m.json", &max_coherent_doc());
    let v = qopcoh(&["measure", s(&m)]).json();
    assert_eq!(v["body"]["value"], 0.866025403784);

    let d = write(&dir, "d.json", &dephasing_doc());
    let r = qopcoh(&["measure", s(&d), "--method", "convex-roof", "--seed", "3", "--restarts", "8"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert!(v["body"]["value"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["body"]["kind"], "convex_roof_upper_bound");
    assert_eq!(v["body"]["exact"], false);
    assert_eq!(v["seed"], 3);
}

#[test]
fn measure_rejects_inapplicable_methods() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", &dephasing_doc());
    assert_eq!(qopcoh(&["measure", s(&d), "--method", "qubit-closed-form"]).code, 2);
    let r = qopcoh(&["measure", s(&d), "--method", "pure"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not pure"), "{}", r.stderr);
    assert_eq!(qopcoh(&["measure", s(&d)]).code, 2, "convex roof needs a seed");
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(qopcoh(&["check", s(&bad), "--predicate", "cptp"]).code, 2);
    let wrong = write(&dir, "w.json", &op_doc(3, "unitary", vec![real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]])]));
    assert_eq!(qopcoh(&["measure", s(&wrong)]).code, 2);
    assert_eq!(qopcoh(&["check", "/nonexistent/file.json", "--predicate", "cptp"]).code, 2);
    assert_eq!(qopcoh(&["frobnicate"]).code, 2);
    assert_eq!(qopcoh(&["verify", "--suite", "nope", "--seed", "1"]).code, 2);
    assert_eq!(qopcoh(&["verify", "--suite", "axioms"]).code, 2, "seed is required");
}

#[test]
fn random_generation() {
    let a = qopcoh(&["random", "--kind", "incoherent-cptp", "--d", "3", "--seed", "11"]);
    let b = qopcoh(&["random", "--kind", "incoherent-cptp", "--d", "3", "--seed", "11"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "inc.json", &a.json());
    assert_eq!(qopcoh(&["check", s(&f), "--predicate", "incoherent"]).code, 0);
    assert_eq!(qopcoh(&["check", s(&f), "--predicate", "cptp"]).code, 0);

    let u = qopcoh(&["random", "--kind", "unitary", "--d", "2", "--seed", "1"]).json();
    assert_eq!(u["kind"], "unitary");
    assert_eq!(u["metadata"]["seed"], "1");

    let sup = qopcoh(&["random", "--kind", "superop", "--d", "2", "--seed", "2"]);
    let f = write(&dir, "sup.json", &sup.json());
    assert_eq!(qopcoh(&["classify", s(&f)]).code, 0);

    assert_eq!(qopcoh(&["random", "--kind", "unitary", "--d", "0", "--seed", "1"]).code, 2);
    assert_eq!(qopcoh(&["random", "--kind", "unitary", "--d", "2"]).code, 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = qopcoh(&["verify", "--suite", "axioms", "--samples", "5", "--seed", "4"]);
    let b = qopcoh(&["verify", "--suite", "axioms", "--samples", "5", "--seed", "4"]);
    assert_eq!(a.code, 0, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.json().get("wall_time_ms").is_none());
    let t = qopcoh(&["--timing", "verify", "--suite", "axioms", "--samples", "2", "--seed", "4"]);
    assert!(t.json()["wall_time_ms"].as_f64().is_some());
}

#[test]
fn verify_suites_pass() {
    let v = qopcoh(&["verify", "--suite", "cptp-preservation", "--samples", "500", "--seed", "1"]);
    assert_eq!(v.code, 0, "{}", v.stdout);

    let v = qopcoh(&["verify", "--suite", "unitary-range", "--samples", "1000", "--seed", "2"]);
    assert_eq!(v.code, 0, "{}", v.stdout);
    let checks = v.json()["body"]["checks"].clone();
    let range = checks.as_array().unwrap().iter().find(|c| c["name"] == "values_in_range").unwrap().clone();
    assert!((range["metrics"]["min_observed"].as_f64().unwrap() - H).abs() < 1e-12);
    assert!((range["metrics"]["max_observed"].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);

    let v = qopcoh(&["verify", "--suite", "class-closure", "--samples", "200", "--seed", "3"]);
    assert_eq!(v.code, 0, "{}", v.stdout);
    let names: Vec<String> =
        v.json()["body"]["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_owned()).collect();
    for class in ["MISO", "MISO*", "DISO"] {
        assert!(names.iter().any(|n| n.contains(&format!("_{class}_"))), "{names:?}");
    }

    let v = qopcoh(&["verify", "--suite", "theorem11", "--samples", "20", "--seed", "4"]);
    assert_eq!(v.code, 0);
    assert_eq!(v.json()["body"]["suite"], "phase-out-forms");
}

#[test]
fn combined_suite_passes_at_small_sample_size() {
    let r = qopcoh(&["verify", "--suite", "all", "--samples", "10", "--seed", "9"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.json()["body"]["suite"], "all");
}
