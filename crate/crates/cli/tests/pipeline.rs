use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qnet(args: &[&str], stdin: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qnet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn qnet");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str], stdin: &str) -> String {
    let r = qnet(args, stdin);
    assert_eq!(r.code, 0, "qnet {args:?} failed: {}", r.stderr);
    r.stdout
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn entries(v: &Value) -> Vec<f64> {
    v["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap().iter())
        .flat_map(|z| z.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect()
}

#[test]
fn beam_splitter_validates() {
    let s = ok(&["element", "beam_splitter", "--phi", "0.7"], "");
    let r = qnet(&["validate"], &s);
    assert_eq!(r.code, 0);
    let report = json(&r.stdout);
    assert_eq!(report["passed"], true);
    for res in report["residuals"].as_array().unwrap() {
        assert!(res["value"].as_f64().unwrap() < 1e-15);
    }
}

#[test]
fn pi_phased_squeezer_has_no_hamiltonian() {
    let s = ok(&["element", "squeezer_pi", "--zeta", "0.3"], "");
    let r = qnet(&["log"], &s);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("decompose"));
    let doc = json(&r.stdout);
    assert_eq!(doc["outcome"], "no_single_hamiltonian");
    let trace = doc["diagnostics"]["trace"][0].as_f64().unwrap();
    assert!((trace + 2.0 * 0.3f64.cosh()).abs() < 1e-12);
    assert_eq!(doc["diagnostics"]["trace_obstruction"], true);
}

#[test]
fn pi_phased_squeezer_decomposes() {
    let s = ok(&["element", "squeezer_pi", "--zeta", "0.3"], "");
    let doc = json(&ok(&["decompose", "--variant", "g"], &s));
    assert_eq!(doc["factors"].as_array().unwrap().len(), 3);
    assert!(doc["reconstruction_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn decompose_exp_compose_reproduces_input() {
    for (variant, input) in [
        ("g", ok(&["element", "random", "--modes", "3", "--norm", "1.5", "--seed", "4"], "")),
        ("g0", ok(&["element", "random", "--modes", "2", "--norm", "1.0", "--seed", "9"], "")),
        ("g", ok(&["element", "parametric_amplifier", "--zeta", "0.5"], "")),
    ] {
        let factors = ok(&["decompose", "--variant", variant], &input);
        let residual = json(&factors)["reconstruction_residual"].as_f64().unwrap();
        let product = ok(&["compose"], &ok(&["exp"], &factors));
        let diff: f64 = entries(&json(&product))
            .iter()
            .zip(entries(&json(&input)))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= residual.max(1e-12) * 10.0 + 1e-12, "{variant}: {diff} vs {residual}");
    }
}

#[test]
fn log_then_exp_round_trips() {
    let s = ok(&["element", "random", "--modes", "2", "--norm", "0.4", "--seed", "11"], "");
    let back = ok(&["exp"], &ok(&["log"], &s));
    let err = entries(&json(&back))
        .iter()
        .zip(entries(&json(&s)))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-12);
}

#[test]
fn hamiltonian_is_marked_hermitian() {
    let s = ok(&["element", "parametric_amplifier", "--zeta", "0.2"], "");
    let h = json(&ok(&["hamiltonian"], &ok(&["log"], &s)));
    assert_eq!(h["hermitian"], true);
    assert_eq!(h["n"], 2);
    assert!(h["hermiticity_residual"].as_f64().unwrap() < 1e-13);
}

#[test]
fn outputs_are_byte_identical() {
    let args: [&[&str]; 3] = [
        &["element", "random", "--modes", "3", "--seed", "21"],
        &["decompose", "--variant", "g"],
        &["exp"],
    ];
    let pipeline = || {
        let mut text = String::new();
        for a in args {
            text = ok(a, &text);
        }
        text
    };
    assert_eq!(pipeline(), pipeline());
}

#[test]
fn fock_verify_passive_and_factored() {
    let s = ok(&["element", "beam_splitter", "--phi", "0.6"], "");
    let doc = json(&ok(&["fock-verify", "--cutoff", "6", "--max-photons", "3", "--tolerance", "1e-10"], &s));
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["method"], "single_exponential");

    let s = ok(&["element", "squeezer_pi", "--zeta", "0.15"], "");
    let doc = json(&ok(&["fock-verify", "--cutoff", "24", "--max-photons", "4"], &s));
    assert_eq!(doc["method"], "factorization");
    assert!(doc["residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn fock_verify_guard_band_is_input_error() {
    let s = ok(&["element", "single_mode_squeezer", "--zeta", "0.1"], "");
    let r = qnet(&["fock-verify", "--cutoff", "5", "--max-photons", "4"], &s);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("cutoff"));
}

#[test]
fn exit_codes() {
    let not_quasi_unitary = r#"{"n":1,"matrix":[[[2,0],[0,0]],[[0,0],[1,0]]]}"#;
    assert_eq!(qnet(&["validate"], not_quasi_unitary).code, 2);
    assert_eq!(qnet(&["log"], not_quasi_unitary).code, 2);
    assert_eq!(qnet(&["decompose"], not_quasi_unitary).code, 2);

    let ragged = r#"{"n":1,"matrix":[[[1,0],[0,0]],[[1,0]]]}"#;
    assert_eq!(qnet(&["validate"], ragged).code, 1);
    assert_eq!(qnet(&["log"], "not json").code, 1);
    assert_eq!(qnet(&["element", "mirror"], "").code, 1);
    assert_eq!(qnet(&["element", "compensated_tap", "--phi", "2.0"], "").code, 1);
    assert_eq!(qnet(&["validate", "/nonexistent/path.json"], "").code, 1);
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qnet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bs.json");
    let r = qnet(&["element", "beam_splitter", "--phi", "0.2", "-o", path.to_str().unwrap()], "");
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, ok(&["element", "beam_splitter", "--phi", "0.2"], ""));
    assert_eq!(qnet(&["validate", path.to_str().unwrap()], "").code, 0);
    std::fs::remove_dir_all(&dir).unwrap();
}
