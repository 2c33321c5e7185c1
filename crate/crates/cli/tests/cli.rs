use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn spinframe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinframe"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = spinframe(dir, args);
    assert_eq!(
        code(&out),
        0,
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

/// Data rows of a CSV written by the tool, with the `#` meta line and header removed.
fn csv_column(path: &Path, column: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinframe(dir.path(), &["gram", "--constellation", "absent.json"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn malformed_json_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(
        code(&spinframe(
            dir.path(),
            &["gram", "--constellation", "bad.json"]
        )),
        4
    );
}

#[test]
fn wrong_point_count_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let doc =
        json!({"twice_s": 1, "points": [{"theta": 0.0, "phi": 0.0}, {"theta": 1.0, "phi": 0.0}]});
    write_json(&dir.path().join("short.json"), &doc);
    let out = spinframe(dir.path(), &["gram", "--constellation", "short.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn usage_error_without_source() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&spinframe(dir.path(), &["gram"])), 2);
    assert_eq!(code(&spinframe(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn tetrahedron_gram_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &["generate", "--generate", "tetrahedron", "--out", "t.json"],
    );
    ok(p, &["gram", "--constellation", "t.json", "--out", "g.json"]);
    let g = read_json(&p.join("g.json"));
    let log_det = g["log_abs_det"].as_f64().unwrap();
    assert!((log_det - (16.0f64 / 27.0).ln()).abs() < 1e-12);
    assert!((g["condition_number"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(g["singular"], json!(false));
    assert_eq!(
        g["constellation_hash"],
        read_json(&p.join("t.json"))["constellation_hash"]
    );
}

#[test]
fn repeated_point_reports_singular_and_repair_fixes_it() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &["generate", "--generate", "tetrahedron", "--out", "t.json"],
    );
    let mut doc = read_json(&p.join("t.json"));
    doc["points"][3] = doc["points"][0].clone();
    doc.as_object_mut().unwrap().remove("constellation_hash");
    write_json(&p.join("dup.json"), &doc);

    ok(
        p,
        &["gram", "--constellation", "dup.json", "--out", "g.json"],
    );
    assert_eq!(read_json(&p.join("g.json"))["singular"], json!(true));

    let out = spinframe(
        p,
        &[
            "psymbol",
            "--operator",
            "t.json",
            "--constellation",
            "dup.json",
        ],
    );
    assert_ne!(code(&out), 0);

    ok(
        p,
        &[
            "repair",
            "--constellation",
            "dup.json",
            "--seed",
            "3",
            "--out",
            "fixed.json",
        ],
    );
    let fixed = read_json(&p.join("fixed.json"));
    let report = &fixed["report"];
    assert!(report["distance"].as_f64().unwrap() < 1e-3);
    assert_eq!(report["perturbations"][0]["index"], json!(3));
    ok(
        p,
        &["gram", "--constellation", "fixed.json", "--out", "g2.json"],
    );
    assert_eq!(read_json(&p.join("g2.json"))["singular"], json!(false));
}

#[test]
fn singular_frame_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &["generate", "--generate", "tetrahedron", "--out", "t.json"],
    );
    ok(p, &["random-state", "--twice-s", "1", "--out", "rho.json"]);
    let mut doc = read_json(&p.join("t.json"));
    doc["points"][2] = doc["points"][1].clone();
    doc.as_object_mut().unwrap().remove("constellation_hash");
    write_json(&p.join("dup.json"), &doc);
    let out = spinframe(
        p,
        &[
            "psymbol",
            "--operator",
            "rho.json",
            "--constellation",
            "dup.json",
        ],
    );
    assert_eq!(code(&out), 5);
}

#[test]
fn budget_exhausted_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &["generate", "--generate", "tetrahedron", "--out", "t.json"],
    );
    let mut doc = read_json(&p.join("t.json"));
    doc["points"][3] = doc["points"][0].clone();
    doc.as_object_mut().unwrap().remove("constellation_hash");
    write_json(&p.join("dup.json"), &doc);
    let out = spinframe(
        p,
        &[
            "repair",
            "--constellation",
            "dup.json",
            "--epsilon",
            "1e-14",
            "--retry-budget",
            "2",
        ],
    );
    assert_eq!(code(&out), 6);
}

#[test]
fn hash_mismatch_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "fibonacci",
            "--twice-s",
            "2",
            "--out",
            "a.json",
        ],
    );
    ok(
        p,
        &[
            "generate",
            "--generate",
            "random",
            "--twice-s",
            "2",
            "--gen-seed",
            "5",
            "--out",
            "b.json",
        ],
    );
    ok(
        p,
        &[
            "random-state",
            "--twice-s",
            "2",
            "--rank",
            "3",
            "--out",
            "rho.json",
        ],
    );
    ok(
        p,
        &[
            "qsymbol",
            "--operator",
            "rho.json",
            "--constellation",
            "a.json",
            "--out",
            "q.json",
        ],
    );
    let out = spinframe(
        p,
        &[
            "reconstruct",
            "--qsymbol",
            "q.json",
            "--constellation",
            "b.json",
        ],
    );
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash"));

    let mut doc = read_json(&p.join("a.json"));
    doc["constellation_hash"] = json!("0000");
    write_json(&p.join("tampered.json"), &doc);
    assert_eq!(
        code(&spinframe(p, &["gram", "--constellation", "tampered.json"])),
        4
    );
}

#[test]
fn qsymbol_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "fibonacci",
            "--twice-s",
            "3",
            "--out",
            "c.json",
        ],
    );
    ok(
        p,
        &[
            "random-state",
            "--twice-s",
            "3",
            "--rank",
            "2",
            "--seed",
            "8",
            "--out",
            "rho.json",
        ],
    );
    ok(
        p,
        &[
            "qsymbol",
            "--operator",
            "rho.json",
            "--constellation",
            "c.json",
            "--out",
            "q.json",
        ],
    );
    ok(
        p,
        &[
            "reconstruct",
            "--qsymbol",
            "q.json",
            "--constellation",
            "c.json",
            "--out",
            "rec.json",
        ],
    );
    let (a, b) = (
        read_json(&p.join("rho.json")),
        read_json(&p.join("rec.json")),
    );
    let mut worst = 0.0_f64;
    for part in ["real", "imag"] {
        for (ra, rb) in a[part]
            .as_array()
            .unwrap()
            .iter()
            .zip(b[part].as_array().unwrap())
        {
            for (x, y) in ra.as_array().unwrap().iter().zip(rb.as_array().unwrap()) {
                worst = worst.max((x.as_f64().unwrap() - y.as_f64().unwrap()).abs());
            }
        }
    }
    assert!(worst < 1e-8, "{worst}");
    assert!(b["condition_number"].as_f64().unwrap() >= 1.0);
}

#[test]
fn all_ones_symbol_reconstructs_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "fibonacci",
            "--twice-s",
            "2",
            "--out",
            "c.json",
        ],
    );
    let hash = read_json(&p.join("c.json"))["constellation_hash"].clone();
    write_json(
        &p.join("q.json"),
        &json!({"constellation_hash": hash, "values": vec![1.0; 9]}),
    );
    ok(
        p,
        &[
            "reconstruct",
            "--qsymbol",
            "q.json",
            "--constellation",
            "c.json",
            "--out",
            "id.json",
        ],
    );
    let rec = read_json(&p.join("id.json"));
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((rec["real"][i][j].as_f64().unwrap() - want).abs() < 1e-10);
            assert!(rec["imag"][i][j].as_f64().unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn scaled_convention_multiplies_p_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &["generate", "--generate", "tetrahedron", "--out", "t.json"],
    );
    ok(
        p,
        &[
            "random-state",
            "--twice-s",
            "1",
            "--seed",
            "2",
            "--out",
            "rho.json",
        ],
    );
    ok(
        p,
        &[
            "psymbol",
            "--operator",
            "rho.json",
            "--constellation",
            "t.json",
            "--out",
            "p.json",
        ],
    );
    ok(
        p,
        &[
            "psymbol",
            "--operator",
            "rho.json",
            "--constellation",
            "t.json",
            "--paper-convention",
            "--out",
            "pp.json",
        ],
    );
    let (a, b) = (read_json(&p.join("p.json")), read_json(&p.join("pp.json")));
    for (x, y) in a["values"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["values"].as_array().unwrap())
    {
        assert!((2.0 * x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-14);
    }
    // prefactor-free P values of a density matrix sum to its trace
    let total: f64 = a["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn qgrid_of_identity_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let doc = json!({"twice_s": 2, "real": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                     "imag": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]});
    write_json(&p.join("id.json"), &doc);
    ok(
        p,
        &[
            "qgrid",
            "--operator",
            "id.json",
            "--grid",
            "9x12",
            "--out",
            "q.csv",
        ],
    );
    let values = csv_column(&p.join("q.csv"), 2);
    assert_eq!(values.len(), 9 * 12);
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn landscape_with_no_fixed_points_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "random",
            "--twice-s",
            "2",
            "--out",
            "c.json",
        ],
    );
    ok(
        p,
        &[
            "landscape",
            "--constellation",
            "c.json",
            "--fixed",
            "0",
            "--grid",
            "6x6",
            "--out",
            "l.csv",
        ],
    );
    let values = csv_column(&p.join("l.csv"), 2);
    assert_eq!(values.len(), 36);
    assert!(values.iter().all(|&v| v == 1.0));
}

#[test]
fn csv_outputs_carry_meta_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "baseline",
            "--twice-s",
            "1",
            "--seeds",
            "10",
            "--seed",
            "4",
            "--out",
            "b.csv",
        ],
    );
    let text = std::fs::read_to_string(p.join("b.csv")).unwrap();
    let first = text.lines().next().unwrap();
    let meta: Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(meta["command"], json!("baseline"));
    assert_eq!(meta["seed"], json!(4));
}

#[test]
fn optimize_is_reproducible_and_improves() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "random",
            "--twice-s",
            "1",
            "--gen-seed",
            "2",
            "--out",
            "c.json",
        ],
    );
    let args = [
        "optimize",
        "--constellation",
        "c.json",
        "--iterations",
        "300",
        "--restarts",
        "2",
        "--seed",
        "6",
        "--best-out",
        "best.json",
        "--out",
        "trace.csv",
    ];
    ok(p, &args);
    let (trace, best) = (
        std::fs::read(p.join("trace.csv")).unwrap(),
        std::fs::read(p.join("best.json")).unwrap(),
    );
    ok(p, &args);
    assert_eq!(trace, std::fs::read(p.join("trace.csv")).unwrap());
    assert_eq!(best, std::fs::read(p.join("best.json")).unwrap());

    ok(
        p,
        &["gram", "--constellation", "c.json", "--out", "g0.json"],
    );
    ok(
        p,
        &["gram", "--constellation", "best.json", "--out", "g1.json"],
    );
    let before = read_json(&p.join("g0.json"))["condition_number"]
        .as_f64()
        .unwrap();
    let after = read_json(&p.join("g1.json"))["condition_number"]
        .as_f64()
        .unwrap();
    assert!(after <= before);
}

#[test]
fn tomo_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate",
            "--generate",
            "fibonacci",
            "--twice-s",
            "2",
            "--out",
            "c.json",
        ],
    );
    ok(
        p,
        &[
            "tomo",
            "--constellation",
            "c.json",
            "--rank",
            "2",
            "--shots",
            "100,10000",
            "--seeds",
            "4",
            "--out",
            "t.csv",
        ],
    );
    let errors = csv_column(&p.join("t.csv"), 2);
    assert_eq!(errors.len(), 8);
    assert!(errors.iter().all(|e| e.is_finite() && *e >= 0.0));

    ok(
        p,
        &[
            "tomo",
            "--constellation",
            "c.json",
            "--shots",
            "50",
            "--seeds",
            "3",
            "--psd-repair",
            "--out",
            "r.csv",
        ],
    );
    let text = std::fs::read_to_string(p.join("r.csv")).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",repaired_frobenius_error"));
    assert!(csv_column(&p.join("r.csv"), 5)
        .iter()
        .all(|e| e.is_finite()));
}
