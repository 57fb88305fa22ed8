use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn epival(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epival")).args(args).output().expect("binary runs")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn conjugate_suite_passes_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conj.json");
    let o = epival(&["verify", "--suite", "conjugate", "--n", "1", "--cases", "100", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(&out);
    assert_eq!(r["suite"], "conjugate");
    assert_eq!(r["pass"], 100);
    assert_eq!(r["fail"], 0);
    assert_eq!(r["worst_residual"].as_f64(), Some(0.0));
    assert_eq!(r["per_case"].as_array().unwrap().len(), 100);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.json"));
        let o = epival(&["verify", "--suite", "change-of-vars", "--n", "2", "--cases", "12", "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("r.json");
    fs::write(&cfg, format!("# comment\nsuite = degree-n\nn = 2\ncases = 3\nseed = 5\nout = {}\n", out.display())).unwrap();
    let o = epival(&["verify", "--config", cfg.to_str().unwrap(), "--cases", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(&out);
    assert_eq!(r["suite"], "degree-n");
    assert_eq!(r["n"], 2);
    assert_eq!(r["cases"], 4);
}

#[test]
fn failing_tolerance_gives_exit_one() {
    // finite differences cannot reach 1e-15
    let o = epival(&["verify", "--suite", "closed-forms", "--n", "1", "--cases", "2", "--tol-quad", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["fail"], 2);
}

#[test]
fn usage_errors_give_exit_two() {
    assert_eq!(epival(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(epival(&["verify"]).status.code(), Some(2));
    assert_eq!(epival(&["verify", "--suite", "conjugate", "--n", "3"]).status.code(), Some(2));
    assert_eq!(epival(&["verify", "--suite", "conjugate", "--cases", "0"]).status.code(), Some(2));
    assert_eq!(epival(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(epival(&["minkowski", "--in", "/does/not/exist.json"]).status.code(), Some(2));
    assert_eq!(epival(&["gw", "--j-list", "2,x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(epival(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let o = epival(&["verify", "--suite", "conjugate", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn minkowski_axis_measure_gives_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mu.json");
    let out = dir.path().join("square.json");
    fs::write(
        &input,
        r#"{"dim": 2, "atoms": [{"n": [1, 0], "w": 1}, {"n": [-1, 0], "w": 1}, {"n": [0, 1], "w": 1}, {"n": [0, -1], "w": 1}]}"#,
    )
    .unwrap();
    let o = epival(&["minkowski", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(&out);
    let p: epival_core::Polytope = serde_json::from_value(r["polytope"].clone()).unwrap();
    let expect = epival_core::Polytope::cuboid(&epival_core::num::qvec(&[0, 0]), &epival_core::num::qvec(&[1, 1]))
        .unwrap()
        .translate(&[epival_core::num::q(-1, 2), epival_core::num::q(-1, 2)]);
    assert_eq!(p, expect);
}

#[test]
fn minkowski_rejects_unbalanced_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mu.json");
    fs::write(&input, r#"{"dim": 2, "atoms": [{"n": [1, 0], "w": 1}, {"n": [0, 1], "w": 1}, {"n": [0, -1], "w": 1}]}"#).unwrap();
    assert_eq!(epival(&["minkowski", "--in", input.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn gw_zero_measure_reports_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.json");
    fs::write(&input, r#"{"n": 1, "atoms": []}"#).unwrap();
    let o = epival(&["gw", "--in", input.to_str().unwrap(), "--j-list", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(row["sup_error"].as_f64(), Some(0.0));
        assert!(row["values"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    }
}

#[test]
fn gw_second_difference_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gw.json");
    let o = epival(&["gw", "--n", "1", "--j-list", "2,4,8,16", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    let errs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 4);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn decompose_splits_a_mixed_valuation() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.json");
    let z = serde_json::json!({
        "valuation": { "sum": { "terms": [
            { "constant": { "c": 2.0 } },
            { "dual_atoms": { "mu": { "n": 1, "atoms": [{"x": ["-1"], "w": "1"}, {"x": ["0"], "w": "-2"}, {"x": ["1"], "w": "1"}] } } }
        ] } },
        "function": serde_json::to_value(epival_core::epi::interval_indicator(-1, 1)).unwrap(),
    });
    fs::write(&input, z.to_string()).unwrap();
    let o = epival(&["decompose", "--in", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let c: Vec<f64> = r["components"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((c[0] - 2.0).abs() < 1e-9);
    // the conjugate of I_[-1,1] is |y|, whose second difference at 0 is 2
    assert!((c[1] - 2.0).abs() < 1e-9);
}
