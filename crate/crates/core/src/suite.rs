//! Identity suites over seeded random cases, with JSON and CSV reports.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::epi::PLConvexFunction;
use crate::error::{Error, Result};
use crate::generate::{case_rng, gaussian_point, random_balanced_measure, random_body, random_pl_function, split_pair};
use crate::goodey_weil::{minkowski_residual, minkowski_solve, mollify, BumpKind, DualAtom, DualAtomMeasure, Mollifier};
use crate::hull::Halfspace;
use crate::linalg::dotf;
use crate::measures::{
    hessian_steiner, local_parallel_volume_mc, p_t_volume_mc, support_measure, HessianRegion,
};
use crate::num::{f64_to_value, format_f64, q, qi, qvec, to_f64, vec_to_f64, QVec, Q};
use crate::polytope::Polytope;
use crate::valuation::{
    bump_family, cylinder_identity_check, distinguishes, eta_to_zeta, eval_gradient_valuation, eval_sphere_valuation,
    homogeneous_components, valuation_residual, Kernel, PlaneDensity, Residual, SphereDensity, ValuationSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Conjugate,
    ChangeOfVars,
    Lattice,
    Steiner,
    HessianSteiner,
    Homogeneous,
    DegreeN,
    Cylinder,
    Minkowski,
    ClosedForms,
    Continuity,
    Uniqueness,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Conjugate,
        Suite::ChangeOfVars,
        Suite::Lattice,
        Suite::Steiner,
        Suite::HessianSteiner,
        Suite::Homogeneous,
        Suite::DegreeN,
        Suite::Cylinder,
        Suite::Minkowski,
        Suite::ClosedForms,
        Suite::Continuity,
        Suite::Uniqueness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Conjugate => "conjugate",
            Suite::ChangeOfVars => "change-of-vars",
            Suite::Lattice => "lattice",
            Suite::Steiner => "steiner",
            Suite::HessianSteiner => "hessian-steiner",
            Suite::Homogeneous => "homogeneous",
            Suite::DegreeN => "degree-n",
            Suite::Cylinder => "cylinder",
            Suite::Minkowski => "minkowski",
            Suite::ClosedForms => "closed-forms",
            Suite::Continuity => "continuity",
            Suite::Uniqueness => "uniqueness",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "suite", name: s.to_string() })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub n: usize,
    pub cases: usize,
    pub seed: u64,
    pub tol_geom: f64,
    pub tol_quad: f64,
    /// Allowed deviation of Monte-Carlo estimates, in standard errors.
    pub mc_sigma: f64,
    pub mc_samples: usize,
}

impl SuiteConfig {
    pub fn new(suite: Suite, n: usize, cases: usize, seed: u64) -> Self {
        SuiteConfig { suite, n, cases, seed, tol_geom: 1e-9, tol_quad: 1e-6, mc_sigma: 3.0, mc_samples: 200_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::UnsupportedDimension(self.n));
        }
        if self.cases == 0 {
            return Err(Error::InvalidArgument("case count must be positive".into()));
        }
        if self.mc_samples == 0 || !(self.tol_geom > 0.0) || !(self.tol_quad > 0.0) || !(self.mc_sigma > 0.0) {
            return Err(Error::InvalidArgument("tolerances and sample counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseRow {
    pub case: usize,
    pub residual: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub n: usize,
    pub seed: u64,
    pub rows: Vec<CaseRow>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.rows.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn worst_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.name(),
            "n": self.n,
            "seed": self.seed,
            "cases": self.rows.len(),
            "pass": self.passed(),
            "fail": self.failed(),
            "worst_residual": f64_to_value(self.worst_residual()),
            "per_case": self.rows.iter().map(|r| json!({
                "case": r.case,
                "residual": f64_to_value(r.residual),
                "pass": r.pass,
                "detail": r.detail,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("case,residual,pass,detail\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},\"{}\"\n", r.case, format_f64(r.residual), r.pass, r.detail.replace('"', "'")));
        }
        s
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rows: Vec<CaseRow> = (0..cfg.cases).into_par_iter().map(|i| run_case(cfg, i)).collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.case);
    Ok(SuiteReport { suite: cfg.suite, n: cfg.n, seed: cfg.seed, rows })
}

fn run_case(cfg: &SuiteConfig, i: usize) -> Result<CaseRow> {
    let (residual, pass, detail) = match cfg.suite {
        Suite::Conjugate => conjugate_case(cfg, i),
        Suite::ChangeOfVars => change_of_vars_case(cfg, i),
        Suite::Lattice => lattice_case(cfg, i)?,
        Suite::Steiner => steiner_case(cfg, i)?,
        Suite::HessianSteiner => hessian_steiner_case(cfg, i)?,
        Suite::Homogeneous => homogeneous_case(cfg, i)?,
        Suite::DegreeN => degree_n_case(cfg, i)?,
        Suite::Cylinder => cylinder_case(cfg, i)?,
        Suite::Minkowski => minkowski_case(cfg, i)?,
        Suite::ClosedForms => closed_forms_case(cfg, i),
        Suite::Continuity => continuity_case(cfg, i),
        Suite::Uniqueness => uniqueness_case(cfg, i)?,
    };
    Ok(CaseRow { case: i, residual, pass, detail })
}

type Outcome = (f64, bool, String);

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn conjugate_case(cfg: &SuiteConfig, i: usize) -> Outcome {
    let mut rng = case_rng(cfg.seed, i as u64);
    let k = random_body(&mut rng, cfg.n + 1);
    let conj = PLConvexFunction::lower_envelope(&k).fenchel_conjugate();
    let mut worst = Q::zero();
    for _ in 0..100 {
        let y = gaussian_point(&mut rng, cfg.n);
        let mut dir = y.clone();
        dir.push(qi(-1));
        let d = (conj.evaluate(&y) - k.support_function(&dir)).abs();
        if d > worst {
            worst = d;
        }
    }
    (to_f64(&worst), worst.is_zero(), format!("{} vertices", k.vertices().len()))
}

fn change_of_vars_case(cfg: &SuiteConfig, i: usize) -> Outcome {
    let mut rng = case_rng(cfg.seed, i as u64);
    let u = random_pl_function(&mut rng, cfg.n);
    let k = u.body_of();
    let mut worst = 0.0f64;
    let mut hits = 0;
    for eta in bump_family(cfg.n + 1) {
        let lhs = eval_sphere_valuation(&eta, &k);
        let rhs = eval_gradient_valuation(&eta_to_zeta(&eta).expect("restricted"), &u);
        if lhs != 0.0 {
            hits += 1;
        }
        worst = worst.max(rel(lhs, rhs));
    }
    (worst, worst <= cfg.tol_geom, format!("{hits} of 5 densities non-zero"))
}

fn gradient_probe(n: usize) -> ValuationSpec {
    ValuationSpec::Gradient {
        zeta: PlaneDensity::new(n, Kernel::Hat { center: vec![0.25; n], width: 2.5, height: 1.0 }, 3.0).expect("valid"),
    }
}

fn lattice_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let s = split_pair(&mut rng, cfg.n + 1);
    let u = PLConvexFunction::lower_envelope(&s.lower);
    let v = PLConvexFunction::lower_envelope(&s.upper);
    let meet = s.lower.intersect(&s.upper).expect("overlapping pieces");
    let max_ok = u.pointwise_max(&v)?.canonical_eq(&PLConvexFunction::lower_envelope(&meet));
    let min_ok = u.pointwise_min(&v)?.canonical_eq(&PLConvexFunction::lower_envelope(&s.body));
    let vals = [
        gradient_probe(cfg.n),
        ValuationSpec::Sphere { eta: bump_family(cfg.n + 1).remove(i % 5) },
    ];
    let mut worst = 0.0f64;
    for z in &vals {
        match valuation_residual(z, &u, &v)? {
            Residual::Value(r) => worst = worst.max(r),
            Residual::Skip => return Ok((f64::INFINITY, false, "unexpected skip".into())),
        }
    }
    let pass = max_ok && min_ok && worst <= cfg.tol_geom;
    Ok((worst, pass, format!("max_eq={max_ok} min_eq={min_ok}")))
}

/// `box(P) + 1` cut by a random hyperplane through the vertex centroid. The
/// hyperplane is redrawn while it holds two or more of `points`, so that no
/// positive-dimensional face lies in the boundary of the region.
fn random_cut_box(rng: &mut impl Rng, lo: &[f64], hi: &[f64], centre: &[Q], points: &[QVec]) -> Result<Polytope> {
    let d = lo.len();
    let to_q = |x: f64| crate::num::from_f64(x.floor());
    let lo: QVec = lo.iter().map(|x| to_q(*x - 1.0)).collect::<Result<_>>()?;
    let hi: QVec = hi.iter().map(|x| to_q(*x + 2.0)).collect::<Result<_>>()?;
    let off = |a: &QVec| crate::num::dot(a, centre);
    let a = loop {
        let a = gaussian_point(rng, d);
        let c = off(&a);
        if !a.iter().all(Zero::is_zero) && points.iter().filter(|v| crate::num::dot(&a, v) == c).count() <= 1 {
            break a;
        }
    };
    let mut hs = Polytope::cuboid(&lo, &hi)?.halfspaces();
    let offset = off(&a);
    hs.push(Halfspace { normal: a, offset });
    Polytope::from_halfspaces(d, &hs).ok_or_else(|| Error::InvalidArgument("empty region".into()))
}

fn contains_f64(p: &Polytope, x: &[f64]) -> bool {
    p.halfspaces().iter().all(|h| dotf(&vec_to_f64(&h.normal), x) <= to_f64(&h.offset) + 1e-12)
}

pub const STEINER_TIMES: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn mc_seed(cfg: &SuiteConfig, i: usize, k: usize) -> u64 {
    cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((i as u64) << 8) ^ k as u64
}

fn steiner_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let d = cfg.n + 1;
    let p = random_body(&mut rng, d);
    let (lo, hi) = p.bounding_box();
    let a = random_cut_box(&mut rng, &lo, &hi, &p.vertex_centroid(), p.vertices())?;
    // no facet normal on the great sphere ξ·w = 0
    let w = loop {
        let w = gaussian_point(&mut rng, d);
        if p.facets().iter().all(|f| !crate::num::dot(&f.normal, &w).is_zero()) {
            break w;
        }
    };
    let wf = vec_to_f64(&w);
    let theta: Vec<f64> = (0..d).map(|k| support_measure(&p, k).map(|m| m.localized(Some(&a), Some(&w)))).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (k, &t) in STEINER_TIMES.iter().enumerate() {
        let exact: f64 = (0..d).map(|j| t.powi((d - j) as i32) * crate::measures::binom(d, j) * theta[j]).sum();
        let (est, se) = local_parallel_volume_mc(&p, |x, xi| contains_f64(&a, x) && dotf(xi, &wf) >= 0.0, t, cfg.mc_samples, mc_seed(cfg, i, k))?;
        let z = if se > 0.0 { (est - exact).abs() / se } else if est == exact { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        detail.push(format!("t={t}: exact {exact:.6} mc {est:.6}±{se:.1e}"));
    }
    Ok((worst, worst <= cfg.mc_sigma, detail.join("; ")))
}

fn hessian_steiner_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let n = cfg.n;
    let u = random_pl_function(&mut rng, n);
    let (lo, hi) = u.domain().bounding_box();
    let a = random_cut_box(&mut rng, &lo, &hi, &u.domain().vertex_centroid(), &u.complex_vertices())?;
    // gradient box [−r, r]^n, r = 1 unless a gradient would sit on its boundary
    let r = (0..)
        .map(|k| Q::from(qi(1)) + q(k, 64))
        .find(|r| u.pieces().iter().all(|pc| pc.a.iter().all(|c| c.abs() != *r)))
        .expect("finitely many gradients");
    let region = HessianRegion { x_set: Some(a), y_set: Polytope::cuboid(&vec![-r.clone(); n], &vec![r; n])? };
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (k, &t) in STEINER_TIMES.iter().enumerate() {
        let exact = hessian_steiner(&u, t, &region);
        let (est, se) = p_t_volume_mc(&u, &region, t, cfg.mc_samples / 2, mc_seed(cfg, i, k))?;
        let z = if se > 0.0 { (est - exact).abs() / se } else if (est - exact).abs() <= 1e-12 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        detail.push(format!("t={t}: exact {exact:.6} mc {est:.6}±{se:.1e}"));
    }
    Ok((worst, worst <= cfg.mc_sigma, detail.join("; ")))
}

/// Balanced atoms: the second difference on the line, the five-point Laplacian in the plane.
pub fn laplacian_atoms(n: usize) -> DualAtomMeasure {
    match n {
        1 => DualAtomMeasure::second_difference(),
        _ => {
            let atom = |x: &[i64], w: i64| DualAtom { x: qvec(x), w: qi(w) };
            DualAtomMeasure::new(
                2,
                vec![atom(&[0, 0], -4), atom(&[1, 0], 1), atom(&[-1, 0], 1), atom(&[0, 1], 1), atom(&[0, -1], 1)],
                None,
            )
            .expect("balanced")
        }
    }
}

/// Three valuations mixing constant, degree-one and degree-`n` parts.
pub fn mixed_valuations(n: usize) -> Vec<ValuationSpec> {
    let etas = bump_family(n + 1);
    let phi = mollify(&laplacian_atoms(n), &Mollifier::new(BumpKind::Poly3, n).expect("n in range"), 2).expect("valid");
    vec![
        ValuationSpec::Sum { terms: vec![ValuationSpec::Constant { c: 0.75 }, gradient_probe(n)] },
        ValuationSpec::Sum {
            terms: vec![
                ValuationSpec::Constant { c: -1.25 },
                ValuationSpec::DualAtoms { mu: laplacian_atoms(n) },
                ValuationSpec::Sphere { eta: etas[0].clone() },
            ],
        },
        ValuationSpec::Sum {
            terms: vec![
                ValuationSpec::Gradient { zeta: eta_to_zeta(&etas[2]).expect("restricted") },
                ValuationSpec::DualDensity { phi },
                ValuationSpec::Constant { c: 2.0 },
            ],
        },
    ]
}

fn homogeneous_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let u = random_pl_function(&mut rng, cfg.n);
    let u3 = u.epi_scale(&qi(3))?;
    let mut worst = 0.0f64;
    let mut sum_err = 0.0f64;
    for z in mixed_valuations(cfg.n) {
        let c = homogeneous_components(&z, &u)?;
        let c3 = homogeneous_components(&z, &u3)?;
        let total = z.evaluate(&u)?;
        sum_err = sum_err.max(rel(c.iter().sum(), total));
        let scale: f64 = c.iter().enumerate().map(|(k, x)| 3f64.powi(k as i32) * x.abs()).sum();
        for (k, (a, b)) in c.iter().zip(&c3).enumerate() {
            let expect = 3f64.powi(k as i32) * a;
            let err = (b - expect).abs() / expect.abs().max(1e-6 * scale).max(1e-300);
            worst = worst.max(err);
        }
    }
    let pass = worst <= 1e-7 && sum_err <= 1e-9;
    Ok((worst, pass, format!("component sum rel error {sum_err:.2e}")))
}

fn random_rational(rng: &mut impl Rng, lo: i64, hi: i64, den: i64) -> Q {
    q(rng.random_range(lo * den..=hi * den), den)
}

fn degree_n_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let n = cfg.n;
    let u = random_pl_function(&mut rng, n);
    let zeta = match i % 3 {
        0 => eta_to_zeta(&bump_family(n + 1)[i % 5])?,
        1 => PlaneDensity::new(n, Kernel::Hat { center: vec![-0.5; n], width: 3.0, height: 2.0 }, 3.0)?,
        _ => PlaneDensity::new(n, Kernel::Poly { coeffs: vec![1.0, -0.5, 0.25], axis: None }, 2.5)?,
    };
    let base = eval_gradient_valuation(&zeta, &u);
    let x0: QVec = (0..n).map(|_| random_rational(&mut rng, -3, 3, 16)).collect();
    let c = random_rational(&mut rng, -3, 3, 16);
    let moved = eval_gradient_valuation(&zeta, &u.epi_translate(&x0, &c));
    let t = q(rng.random_range(3..=24), 8);
    let scaled = eval_gradient_valuation(&zeta, &u.epi_scale(&t)?);
    let homog = rel(scaled, to_f64(&t).powi(n as i32) * base);
    let exact_translation = moved == base;
    let residual = homog.max((moved - base).abs());
    Ok((residual, exact_translation && homog <= 1e-12, format!("value {base:.6}, translation exact={exact_translation}")))
}

/// Symmetric full-sphere densities used by the cylinder suite.
pub fn symmetric_densities(d: usize) -> Vec<SphereDensity> {
    let mut l = vec![0.0; d];
    l[0] = 1.5;
    let mut centre = vec![0.0; d];
    centre[0] = 0.6;
    centre[d - 1] = 0.8;
    let mut mirror = centre.clone();
    mirror[d - 1] = -0.8;
    vec![
        SphereDensity::full(d, Kernel::Constant { c: 1.0 }),
        SphereDensity::full(d, Kernel::Linear { l, c: 0.5 }),
        SphereDensity::full(d, Kernel::Poly { coeffs: vec![0.0, 0.0, 2.0], axis: Some(d - 1) }),
        SphereDensity::full(
            d,
            Kernel::Sum {
                terms: vec![
                    Kernel::Bump { center: centre, width: 0.7, height: 1.0 },
                    Kernel::Bump { center: mirror, width: 0.7, height: 1.0 },
                    Kernel::Poly { coeffs: vec![0.3, 0.0, 1.0], axis: None },
                ],
            },
        ),
    ]
}

fn cylinder_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let k = random_body(&mut rng, cfg.n);
    let ell = q(rng.random_range(4..=24), 8);
    let etas = symmetric_densities(cfg.n + 1);
    let eta = &etas[i % etas.len()];
    let r = cylinder_identity_check(&k, &ell, eta)?;
    Ok((r, r <= cfg.tol_geom, format!("density {}, height {}", i % etas.len(), crate::num::format_q(&ell))))
}

fn minkowski_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let dim = cfg.n + 1;
    let atoms = if dim == 2 { rng.random_range(5..=16) } else { rng.random_range(6..=14) };
    let mu = random_balanced_measure(&mut rng, dim, atoms);
    let tol = if dim == 2 { 1e-9 } else { 1e-6 };
    match minkowski_solve(&mu, dim) {
        Ok(p) => {
            let r = minkowski_residual(&p, &mu, 1e-6);
            Ok((r, r <= tol, format!("{atoms} atoms, {} facets", p.facets().len())))
        }
        Err(e) => Ok((f64::INFINITY, false, e.to_string())),
    }
}

/// `b*(y) = √(1+|y|²)` for `b = ⌊B^{n+1}⌋`; checked at the maximiser `x = y/√(1+|y|²)`
/// and against the finite-difference Hessian determinant `(1+|y|²)^{−(n/2+1)}`.
fn closed_forms_case(cfg: &SuiteConfig, i: usize) -> Outcome {
    let mut rng = case_rng(cfg.seed, i as u64);
    let n = cfg.n;
    let bstar = |y: &[f64]| (1.0 + dotf(y, y)).sqrt();
    let b = |x: &[f64]| -(1.0 - dotf(x, x)).sqrt();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s = bstar(&y);
        let x: Vec<f64> = y.iter().map(|v| v / s).collect();
        let at_max = dotf(&x, &y) - b(&x);
        worst = worst.max((at_max - s).abs());
        // the maximiser is global: nearby feasible points do no better
        for k in 0..8 {
            let ang = k as f64 * std::f64::consts::FRAC_PI_4;
            let mut z = x.clone();
            z[0] += 1e-3 * ang.cos();
            if n == 2 {
                z[1] += 1e-3 * ang.sin();
            }
            if dotf(&z, &z) < 1.0 {
                let v = dotf(&z, &y) - b(&z);
                worst = worst.max((v - s).max(0.0));
            }
        }
        let h = 1e-4;
        let e = |k: usize| {
            let mut v = vec![0.0; n];
            v[k] = h;
            v
        };
        let f = |d: &[f64]| bstar(&y.iter().zip(d).map(|(a, b)| a + b).collect::<Vec<_>>());
        let second = |a: usize, c: usize| {
            let (ea, ec) = (e(a), e(c));
            let pp: Vec<f64> = ea.iter().zip(&ec).map(|(p, q)| p + q).collect();
            let pm: Vec<f64> = ea.iter().zip(&ec).map(|(p, q)| p - q).collect();
            let mp: Vec<f64> = pm.iter().map(|v| -v).collect();
            let mm: Vec<f64> = pp.iter().map(|v| -v).collect();
            (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h)
        };
        let det = if n == 1 { second(0, 0) } else { second(0, 0) * second(1, 1) - second(0, 1) * second(1, 0) };
        let closed = (1.0 + dotf(&y, &y)).powf(-(n as f64 / 2.0 + 1.0));
        worst = worst.max((det - closed).abs());
    }
    (worst, worst <= cfg.tol_quad, "100 points".into())
}

/// Number of terms of each continuity sequence.
pub const CONTINUITY_STEPS: u32 = 14;

fn continuity_case(cfg: &SuiteConfig, i: usize) -> Outcome {
    let mut rng = case_rng(cfg.seed, i as u64);
    let k = random_body(&mut rng, cfg.n + 1);
    let c = k.vertex_centroid();
    let v = gaussian_point(&mut rng, cfg.n + 1);
    let target = PLConvexFunction::lower_envelope(&k);
    let mut dists = Vec::new();
    for j in 1..=CONTINUITY_STEPS {
        let eps = q(1, 1i64 << j);
        let shift: QVec = c.iter().zip(&v).map(|(ci, vi)| ci - ci * (Q::from(qi(1)) + &eps) + vi * &eps).collect();
        let kj = k.scale(&(qi(1) + &eps)).translate(&shift);
        dists.push(PLConvexFunction::lower_envelope(&kj).epi_distance(&target));
    }
    let monotone = dists.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last = *dists.last().unwrap();
    (last, monotone && last < 1e-3, format!("first {:.3e}, monotone={monotone}", dists[0]))
}

fn uniqueness_case(cfg: &SuiteConfig, i: usize) -> Result<Outcome> {
    let mut rng = case_rng(cfg.seed, i as u64);
    let d = cfg.n + 1;
    let family: Vec<PLConvexFunction> = (0..10).map(|_| random_pl_function(&mut rng, cfg.n)).collect();
    let etas = bump_family(d);
    let base = etas[i % 5].clone();
    let extra = match &etas[(i + 1) % 5].kernel {
        Kernel::Bump { center, width, .. } => Kernel::Bump { center: center.clone(), width: *width, height: 0.5 },
        k => k.clone(),
    };
    let other = SphereDensity { d, kernel: Kernel::Sum { terms: vec![base.kernel.clone(), extra] }, support: base.support };
    let a = ValuationSpec::Sphere { eta: base };
    let b = ValuationSpec::Sphere { eta: other };
    let distinct = distinguishes(&a, &b, &family, cfg.tol_geom)?;
    Ok((if distinct { 0.0 } else { 1.0 }, distinct, "bump pair on 10 functions".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_conjugate_run() {
        let r = run_suite(&SuiteConfig::new(Suite::Conjugate, 1, 5, 7)).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.worst_residual(), 0.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(run_suite(&SuiteConfig::new(Suite::Conjugate, 3, 5, 7)).is_err());
        assert!(run_suite(&SuiteConfig::new(Suite::Conjugate, 1, 0, 7)).is_err());
    }
}
