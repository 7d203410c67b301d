//! End-to-end tests of the `calderon` binary: command behaviour, pipeline
//! composition, determinism and exit codes.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_calderon")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("calderon-cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary must run")
}

fn write_unit_coeffs(path: &Path) {
    std::fs::write(
        path,
        r#"{"basis":"zernike-disk","K":0,"J":0,"entries":[{"j":0,"k":0,"re":1.0,"im":0.0}]}"#,
    )
    .unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forward_produces_diagonal_matrix() {
    let dir = workdir("forward");
    let input = dir.join("c.json");
    let output = dir.join("m.json");
    write_unit_coeffs(&input);

    let out = run(&[
        "--command",
        "forward",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--M",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let matrix = read_json(&output);
    let entries = matrix["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    for e in entries {
        let (m, n) = (e["m"].as_i64().unwrap(), e["n"].as_i64().unwrap());
        assert_eq!(m, n);
        let expect = -1.0 / (sqrt_pi * m.abs() as f64);
        assert!((e["re"].as_f64().unwrap() - expect).abs() < 1e-15);
    }
    // plot CSV exists with the documented header
    let csv = std::fs::read_to_string(dir.join("m.plot.csv")).unwrap();
    assert!(csv.starts_with("j,m,n,re,im,abs\n"));
}

#[test]
fn forward_reconstruct_pipeline_is_identity() {
    let dir = workdir("pipeline");
    let coeffs_in = dir.join("eta.json");
    let matrix = dir.join("data.json");
    let coeffs_out = dir.join("recovered.json");
    // a deterministic perturbation touching several layers and frequencies
    let mut entries = Vec::new();
    for j in -12i32..=12 {
        for k in 0..=4u32 {
            let re = ((j * 7) as f64 * 0.13 + k as f64 * 0.71).sin();
            let im = ((j * 3) as f64 * 0.29 - k as f64 * 0.37).cos();
            entries.push(format!(
                r#"{{"j":{j},"k":{k},"re":{re},"im":{im}}}"#
            ));
        }
    }
    std::fs::write(
        &coeffs_in,
        format!(
            r#"{{"basis":"zernike-disk","K":4,"J":12,"entries":[{}]}}"#,
            entries.join(",")
        ),
    )
    .unwrap();

    let out = run(&[
        "--command",
        "forward",
        "--input",
        coeffs_in.to_str().unwrap(),
        "--output",
        matrix.to_str().unwrap(),
        "--M",
        "64",
    ]);
    assert!(out.status.success());
    let out = run(&[
        "--command",
        "reconstruct",
        "--input",
        matrix.to_str().unwrap(),
        "--output",
        coeffs_out.to_str().unwrap(),
        "--K",
        "4",
        "--J",
        "12",
        "--M",
        "64",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let original = read_json(&coeffs_in);
    let recovered = read_json(&coeffs_out);
    let lookup = |v: &Value, j: i64, k: i64| -> (f64, f64) {
        v["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["j"].as_i64() == Some(j) && e["k"].as_i64() == Some(k))
            .map(|e| (e["re"].as_f64().unwrap(), e["im"].as_f64().unwrap()))
            .unwrap_or((0.0, 0.0))
    };
    for j in -12i64..=12 {
        for k in 0..=4i64 {
            let (re0, im0) = lookup(&original, j, k);
            let (re1, im1) = lookup(&recovered, j, k);
            let err = ((re0 - re1).powi(2) + (im0 - im1).powi(2)).sqrt();
            let scale = (re0 * re0 + im0 * im0).sqrt().max(1e-3);
            assert!(
                err / scale < 1e-9,
                "(j={j}, k={k}): ({re0},{im0}) became ({re1},{im1})"
            );
        }
    }
    // amplification table goes with the reconstruction
    let amp = std::fs::read_to_string(dir.join("recovered.amplification.csv")).unwrap();
    assert!(amp.starts_with("j,k,amplification\n"));
    assert_eq!(amp.lines().count(), 1 + 25 * 5);
}

#[test]
fn stability_on_empty_coeffs() {
    let dir = workdir("stability-empty");
    let input = dir.join("zero.json");
    let output = dir.join("report.json");
    std::fs::write(
        &input,
        r#"{"basis":"zernike-disk","K":2,"J":2,"entries":[]}"#,
    )
    .unwrap();
    let out = run(&[
        "--command",
        "stability",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--M",
        "16",
    ]);
    assert!(out.status.success());
    let report = read_json(&output);
    assert_eq!(report["l2_norm"].as_f64().unwrap(), 0.0);
    assert_eq!(report["hs"]["truncated_norm"].as_f64().unwrap(), 0.0);
    assert_eq!(report["upper_satisfied"].as_bool(), Some(true));
    assert_eq!(report["lower_satisfied"].as_bool(), Some(true));
    // CSV summary row
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn stability_sampling_is_seed_deterministic() {
    let dir = workdir("stability-seeded");
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "--command",
            "stability",
            "--output",
            out.to_str().unwrap(),
            "--K",
            "2",
            "--J",
            "4",
            "--M",
            "32",
            "--seed",
            "7",
        ]);
        assert!(res.status.success());
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
        "same seed must give byte-identical reports"
    );
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = workdir("determinism");
    let input = dir.join("c.json");
    write_unit_coeffs(&input);
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "--command",
            "forward",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--M",
            "8",
        ]);
        assert!(res.status.success());
    }
    assert_eq!(std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
    assert_eq!(
        std::fs::read(dir.join("a.plot.csv")).unwrap(),
        std::fs::read(dir.join("b.plot.csv")).unwrap()
    );
}

#[test]
fn witness_command_named_value() {
    let dir = workdir("witness");
    let input = dir.join("c.json");
    let output = dir.join("w.json");
    std::fs::write(
        &input,
        r#"{"basis":"zernike-disk","K":0,"J":1,"entries":[{"j":1,"k":0,"re":1.0,"im":0.0}]}"#,
    )
    .unwrap();
    let out = run(&[
        "--command",
        "witness",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let w = read_json(&output);
    assert_eq!(w["m"].as_i64(), Some(1));
    assert_eq!(w["n"].as_i64(), Some(2));
    let expect = -2.0_f64.sqrt() / (2.0 * std::f64::consts::PI.sqrt());
    assert!((w["re"].as_f64().unwrap() - expect).abs() < 1e-12);
}

#[test]
fn conformal_command_reports_constants() {
    let dir = workdir("conformal");
    let input = dir.join("c.json");
    let spec = dir.join("map.json");
    let output = dir.join("report.json");
    write_unit_coeffs(&input);
    std::fs::write(
        &spec,
        r#"{"kind":"quadratic","params":{"c1_re":1.0,"c1_im":0.0,"c2_re":0.2,"c2_im":0.0}}"#,
    )
    .unwrap();
    let out = run(&[
        "--command",
        "conformal",
        "--input",
        input.to_str().unwrap(),
        "--map-spec",
        spec.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&output);
    assert!((report["min_boundary_deriv"].as_f64().unwrap() - 0.6).abs() < 1e-8);
    assert!((report["max_boundary_deriv"].as_f64().unwrap() - 1.4).abs() < 1e-8);
    assert!(report["invariance_abs_diff"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.join("report.plot.csv")).unwrap();
    assert!(csv.starts_with("theta,phi_re,phi_im,dphi_abs\n"));
}

#[test]
fn oracle_check_small_truncation() {
    let dir = workdir("oracle");
    let input = dir.join("c.json");
    let output = dir.join("check.json");
    write_unit_coeffs(&input);
    let out = run(&[
        "--command",
        "oracle-check",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--M",
        "6",
        "--tol",
        "1e-9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&output);
    assert_eq!(report["within_tol"].as_bool(), Some(true));
    assert!(report["max_abs_discrepancy"].as_f64().unwrap() < 1e-9);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = workdir("exit-codes");
    let input = dir.join("c.json");
    write_unit_coeffs(&input);

    // missing input file: I/O failure, exit 2
    let out = run(&[
        "--command",
        "forward",
        "--input",
        dir.join("absent.json").to_str().unwrap(),
        "--output",
        dir.join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error code=2 kind="), "stderr: {stderr}");
    assert_eq!(stderr.lines().count(), 1);

    // truncation below J + K + 1: precondition violation, exit 1
    let matrix = dir.join("m.json");
    let out = run(&[
        "--command",
        "forward",
        "--input",
        input.to_str().unwrap(),
        "--output",
        matrix.to_str().unwrap(),
        "--M",
        "4",
    ]);
    assert!(out.status.success());
    let out = run(&[
        "--command",
        "reconstruct",
        "--input",
        matrix.to_str().unwrap(),
        "--output",
        dir.join("y.json").to_str().unwrap(),
        "--K",
        "4",
        "--J",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error code=1 kind=truncation_too_small"));

    // invalid map parameters: exit 1
    let bad_spec = dir.join("bad-map.json");
    std::fs::write(
        &bad_spec,
        r#"{"kind":"moebius","params":{"a_re":1.5,"a_im":0.0,"phase":0.0}}"#,
    )
    .unwrap();
    let out = run(&[
        "--command",
        "conformal",
        "--input",
        input.to_str().unwrap(),
        "--map-spec",
        bad_spec.to_str().unwrap(),
        "--output",
        dir.join("z.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // witness of the zero perturbation: exit 1
    let zero = dir.join("zero.json");
    std::fs::write(
        &zero,
        r#"{"basis":"zernike-disk","K":1,"J":1,"entries":[]}"#,
    )
    .unwrap();
    let out = run(&[
        "--command",
        "witness",
        "--input",
        zero.to_str().unwrap(),
        "--output",
        dir.join("w.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero_perturbation"));
}
