//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use epival_core::goodey_weil::{affine_test_set, default_family, gw_pipeline, minkowski_solve, mollify, BumpKind, DualAtomMeasure, Mollifier};
use epival_core::measures::{support_measure, Atom, SphereMeasure};
use epival_core::num::qvec;
use epival_core::suite::{run_suite, Suite, SuiteConfig, SuiteReport};
use epival_core::Polytope;

const SEED: u64 = 1;

struct Line {
    pass: bool,
    text: String,
}

fn suite(s: Suite, n: usize, cases: usize) -> SuiteReport {
    run_suite(&SuiteConfig::new(s, n, cases, SEED)).expect("suite runs")
}

fn summary(reports: &[SuiteReport]) -> String {
    reports
        .iter()
        .map(|r| format!("n={} {}/{} worst {:.3e}", r.n, r.passed(), r.rows.len(), r.worst_residual()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn suites(s: Suite, cases: usize) -> (bool, String) {
    let reports: Vec<SuiteReport> = (1..=2).map(|n| suite(s, n, cases)).collect();
    (reports.iter().all(SuiteReport::all_pass), summary(&reports))
}

fn c1() -> (bool, String) {
    let t = Instant::now();
    let (ok, s) = suites(Suite::Conjugate, 100);
    let secs = t.elapsed().as_secs_f64();
    (ok && secs < 30.0, format!("{s}; {secs:.1}s (limit 30s)"))
}

fn c2() -> (bool, String) {
    let t = Instant::now();
    let (ok, s) = suites(Suite::ChangeOfVars, 100);
    let secs = t.elapsed().as_secs_f64();
    (ok && secs < 60.0, format!("{s}; {secs:.1}s (limit 60s)"))
}

fn c3() -> (bool, String) {
    suites(Suite::Lattice, 100)
}

fn c4() -> (bool, String) {
    let square = Polytope::cuboid(&qvec(&[0, 0]), &qvec(&[1, 1])).unwrap();
    let cube = Polytope::cuboid(&qvec(&[0, 0, 0]), &qvec(&[1, 1, 1])).unwrap();
    let totals = |p: &Polytope| (0..p.ambient_dim()).map(|i| support_measure(p, i).unwrap().total).collect::<Vec<f64>>();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
    let fits = close(&totals(&square), &[PI, 2.0]) && close(&totals(&cube), &[4.0 * PI / 3.0, PI, 2.0]);
    let (mc, s) = suites(Suite::Steiner, 10);
    let (hs, h) = suites(Suite::HessianSteiner, 10);
    (fits && mc && hs, format!("totals fit={fits}; parallel volume {s}; Hessian {h} (σ units, limit 3)"))
}

fn c5() -> (bool, String) {
    suites(Suite::Homogeneous, 10)
}

fn c6() -> (bool, String) {
    let (a, s) = suites(Suite::DegreeN, 100);
    let (b, c) = suites(Suite::Cylinder, 20);
    (a && b, format!("degree-n {s}; cylinder {c}"))
}

fn c7() -> (bool, String) {
    let t = Instant::now();
    let mu = DualAtomMeasure::second_difference();
    let bump = Mollifier::new(BumpKind::Exp, 1).unwrap();
    let js = [2, 4, 8, 16];
    let report = gw_pipeline(&mu, &bump, &js, &default_family(1).unwrap()).unwrap();
    let tv = mu.total_variation();
    let errs: Vec<f64> = report.rows.iter().map(|r| r.sup_error).collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let affine = js
        .iter()
        .map(|&j| {
            let phi = mollify(&mu, &bump, j).unwrap();
            affine_test_set(1).iter().map(|(a, b)| phi.affine_residual(a, *b)).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let support = report.rows.iter().all(|r| r.support_radius <= 1.0 + 1.0 / r.j as f64 + r.grid_step);
    let rep = report.rows.iter().map(|r| r.representation_residual.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    let ok = monotone && last <= 0.05 * tv && affine <= 1e-8 * tv && support && rep <= 1e-5 && secs < 300.0;
    (
        ok,
        format!(
            "sup errors {:?}; j=16 {:.3e} <= {:.3e}; affine {:.1e}; support ok={support}; representation {:.1e}; {secs:.1}s",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
            last,
            0.05 * tv,
            affine,
            rep
        ),
    )
}

fn c8() -> (bool, String) {
    let a = suite(Suite::Minkowski, 1, 50);
    let b = suite(Suite::Minkowski, 2, 20);
    let axis = |d: usize| {
        let atoms = (0..2 * d)
            .map(|k| {
                let mut n = vec![0.0; d];
                n[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                Atom { n, w: 1.0 }
            })
            .collect();
        SphereMeasure { dim: d, atoms, signed: false }
    };
    let cube = minkowski_solve(&axis(3), 3).unwrap();
    let cube_ok = cube.vertices().len() == 8 && cube.vertices_f64().iter().flatten().all(|x| (x.abs() - 0.5).abs() <= 1e-9);
    let s = 3f64.sqrt() / 2.0;
    let tri = SphereMeasure {
        dim: 2,
        atoms: vec![
            Atom { n: vec![0.0, -1.0], w: 2.0 },
            Atom { n: vec![s, 0.5], w: 2.0 },
            Atom { n: vec![-s, 0.5], w: 2.0 },
        ],
        signed: false,
    };
    let t = minkowski_solve(&tri, 2).unwrap();
    let v = t.vertices_f64();
    let edge = |i: usize, j: usize| ((v[i][0] - v[j][0]).powi(2) + (v[i][1] - v[j][1]).powi(2)).sqrt();
    let tri_ok = v.len() == 3
        && [(0, 1), (1, 2), (0, 2)].iter().all(|&(i, j)| (edge(i, j) - 2.0).abs() <= 1e-9)
        && (t.relative_volume() - 3f64.sqrt()).abs() <= 1e-9;
    let ok = a.all_pass() && b.all_pass() && cube_ok && tri_ok;
    (ok, format!("{}; cube={cube_ok} triangle={tri_ok}", summary(&[a, b])))
}

fn c9() -> (bool, String) {
    suites(Suite::ClosedForms, 1)
}

fn c10() -> (bool, String) {
    suites(Suite::Continuity, 10)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> (bool, String)); 10] = [
        ("conjugate identity", c1),
        ("change of variables", c2),
        ("lattice transfer", c3),
        ("Steiner formulas", c4),
        ("homogeneous decomposition", c5),
        ("degree-n behaviour", c6),
        ("Goodey-Weil pipeline", c7),
        ("Minkowski solver", c8),
        ("closed forms", c9),
        ("continuity", c10),
    ];
    let mut lines = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f();
        let line = Line { pass, text: format!("{} criterion {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, k + 1) };
        println!("{}", line.text);
        lines.push(line);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
