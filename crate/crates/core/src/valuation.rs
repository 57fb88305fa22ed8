//! Epi-translation invariant valuations on piecewise-linear convex functions,
//! in gradient form, sphere form and dual form, with the transfer to bodies.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::epi::PLConvexFunction;
use crate::error::{Error, Result};
use crate::goodey_weil::{eval_dual, DualAtomMeasure, GridDensity};
use crate::linalg::{dotf, normf};
use crate::measures::{gnomonic, lower_normal, surface_area_measure};
use crate::num::{qi, to_f64, Q};
use crate::polytope::Polytope;

/// Named kernels; arbitrary code is never deserialized.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Constant { c: f64 },
    /// `c + l · x`.
    Linear { l: Vec<f64>, c: f64 },
    /// `Σ_k coeffs[k]·s^k` with `s = x[axis]`, or `s = |x|²` without an axis.
    Poly { coeffs: Vec<f64>, axis: Option<usize> },
    /// `height·exp(1 − 1/(1 − r²))` with `r = |x − center| / width`, zero for `r >= 1`.
    Bump { center: Vec<f64>, width: f64, height: f64 },
    /// `height·max(0, 1 − |x − center| / width)`.
    Hat { center: Vec<f64>, width: f64, height: f64 },
    Sum { terms: Vec<Kernel> },
    /// Plane kernel `y ↦ η((y, −1)/√(1+|y|²))·√(1+|y|²)`.
    FromSphere { eta: Box<SphereDensity> },
    /// Sphere kernel `N ↦ ζ(g(N)) / √(1+|g(N)|²)` on the open lower hemisphere, zero elsewhere.
    FromPlane { zeta: Box<PlaneDensity> },
    /// Sphere kernel `N ↦ φ(g(N))·(1+|g(N)|²)^exponent` on the open lower hemisphere.
    Grid { phi: Box<GridDensity>, exponent: f64 },
}

impl Kernel {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Kernel::Constant { c } => *c,
            Kernel::Linear { l, c } => c + dotf(l, x),
            Kernel::Poly { coeffs, axis } => {
                let s = match axis {
                    Some(k) => x[*k],
                    None => dotf(x, x),
                };
                coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            Kernel::Bump { center, width, height } => {
                let r2 = dist2(x, center) / (width * width);
                if r2 >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            }
            Kernel::Hat { center, width, height } => height * (1.0 - dist2(x, center).sqrt() / width).max(0.0),
            Kernel::Sum { terms } => terms.iter().map(|k| k.eval(x)).sum(),
            Kernel::FromSphere { eta } => {
                let s = (1.0 + dotf(x, x)).sqrt();
                eta.eval(&lower_normal(x)) * s
            }
            Kernel::FromPlane { zeta } => {
                let last = x[x.len() - 1];
                if last >= 0.0 {
                    return 0.0;
                }
                let y = gnomonic(x);
                zeta.eval(&y) / (1.0 + dotf(&y, &y)).sqrt()
            }
            Kernel::Grid { phi, exponent } => {
                if x[x.len() - 1] >= 0.0 {
                    return 0.0;
                }
                let y = gnomonic(x);
                phi.eval(&y) * (1.0 + dotf(&y, &y)).powf(*exponent)
            }
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Density `ζ` on gradients, vanishing outside the ball of radius `support_radius`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlaneDensity {
    pub n: usize,
    pub kernel: Kernel,
    pub support_radius: f64,
}

impl PlaneDensity {
    pub fn new(n: usize, kernel: Kernel, support_radius: f64) -> Result<Self> {
        if !(support_radius >= 0.0) {
            return Err(Error::InvalidArgument("support radius must be non-negative".into()));
        }
        Ok(PlaneDensity { n, kernel, support_radius })
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        if normf(y) > self.support_radius {
            0.0
        } else {
            self.kernel.eval(y)
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SphereSupport {
    /// `{N : N · e_{n+1} <= −delta}`.
    Restricted { delta: f64 },
    Full,
}

/// Density `η` on `S^n ⊂ R^{n+1}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SphereDensity {
    pub d: usize,
    pub kernel: Kernel,
    pub support: SphereSupport,
}

impl SphereDensity {
    pub fn restricted(d: usize, kernel: Kernel, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidArgument(format!("support margin must lie in (0, 1], got {delta}")));
        }
        Ok(SphereDensity { d, kernel, support: SphereSupport::Restricted { delta } })
    }

    pub fn full(d: usize, kernel: Kernel) -> Self {
        SphereDensity { d, kernel, support: SphereSupport::Full }
    }

    pub fn eval(&self, nv: &[f64]) -> f64 {
        match self.support {
            SphereSupport::Restricted { delta } if nv[self.d - 1] > -delta => 0.0,
            _ => self.kernel.eval(nv),
        }
    }
}

/// `Z(u) = Σ_cells vol(C)·ζ(∇u|_C)`.
pub fn eval_gradient_valuation(zeta: &PlaneDensity, u: &PLConvexFunction) -> f64 {
    u.gradient_cells()
        .iter()
        .filter(|(c, _)| c.is_full_dim())
        .map(|(c, a)| to_f64(&c.volume()) * zeta.eval(&crate::num::vec_to_f64(a)))
        .sum()
}

/// `Y(K) = Σ_facets area·η(normal)`.
pub fn eval_sphere_valuation(eta: &SphereDensity, k: &Polytope) -> f64 {
    surface_area_measure(k).integrate(|nv| eta.eval(nv))
}

pub fn eta_to_zeta(eta: &SphereDensity) -> Result<PlaneDensity> {
    match eta.support {
        SphereSupport::Full => Err(Error::InvalidArgument("sphere density needs a positive support margin".into())),
        SphereSupport::Restricted { delta } => {
            let r = (1.0 / (delta * delta) - 1.0).max(0.0).sqrt();
            Ok(PlaneDensity { n: eta.d - 1, kernel: Kernel::FromSphere { eta: Box::new(eta.clone()) }, support_radius: r })
        }
    }
}

pub fn zeta_to_eta(zeta: &PlaneDensity) -> Result<SphereDensity> {
    if !zeta.support_radius.is_finite() {
        return Err(Error::InvalidArgument("plane density needs a finite support radius".into()));
    }
    let delta = 1.0 / (1.0 + zeta.support_radius * zeta.support_radius).sqrt();
    SphereDensity::restricted(zeta.n + 1, Kernel::FromPlane { zeta: Box::new(zeta.clone()) }, delta)
}

pub type ExternalValuation = Arc<dyn Fn(&PLConvexFunction) -> Result<f64> + Send + Sync>;

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationSpec {
    Gradient { zeta: PlaneDensity },
    Sphere { eta: SphereDensity },
    DualDensity { phi: GridDensity },
    /// `u ↦ Σ w_m u*(x_m)`.
    DualAtoms { mu: DualAtomMeasure },
    Constant { c: f64 },
    Sum { terms: Vec<ValuationSpec> },
    #[serde(skip)]
    External { n: usize, f: ExternalValuation },
}

impl fmt::Debug for ValuationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationSpec::Gradient { zeta } => f.debug_struct("Gradient").field("zeta", zeta).finish(),
            ValuationSpec::Sphere { eta } => f.debug_struct("Sphere").field("eta", eta).finish(),
            ValuationSpec::DualDensity { phi } => f.debug_struct("DualDensity").field("n", &phi.n).finish(),
            ValuationSpec::DualAtoms { mu } => f.debug_struct("DualAtoms").field("mu", mu).finish(),
            ValuationSpec::Constant { c } => f.debug_struct("Constant").field("c", c).finish(),
            ValuationSpec::Sum { terms } => f.debug_struct("Sum").field("terms", terms).finish(),
            ValuationSpec::External { n, .. } => f.debug_struct("External").field("n", n).finish(),
        }
    }
}

impl ValuationSpec {
    /// `vol(dom ·)`.
    pub fn domain_volume(n: usize) -> Self {
        ValuationSpec::Gradient { zeta: PlaneDensity { n, kernel: Kernel::Constant { c: 1.0 }, support_radius: f64::INFINITY } }
    }

    /// Dimension of the functions the valuation acts on, if it is fixed.
    pub fn n(&self) -> Option<usize> {
        match self {
            ValuationSpec::Gradient { zeta } => Some(zeta.n),
            ValuationSpec::Sphere { eta } => Some(eta.d - 1),
            ValuationSpec::DualDensity { phi } => Some(phi.n),
            ValuationSpec::DualAtoms { mu } => Some(mu.n),
            ValuationSpec::Constant { .. } => None,
            ValuationSpec::Sum { terms } => terms.iter().find_map(|t| t.n()),
            ValuationSpec::External { n, .. } => Some(*n),
        }
    }

    pub fn evaluate(&self, u: &PLConvexFunction) -> Result<f64> {
        if let Some(n) = self.n() {
            if n != u.n() {
                return Err(Error::Dimension { expected: n, got: u.n() });
            }
        }
        match self {
            ValuationSpec::Gradient { zeta } => Ok(eval_gradient_valuation(zeta, u)),
            ValuationSpec::Sphere { eta } => Ok(eval_sphere_valuation(eta, &u.body_of())),
            ValuationSpec::DualDensity { phi } => Ok(eval_dual(phi, u)),
            ValuationSpec::DualAtoms { mu } => Ok(mu.evaluate(u)),
            ValuationSpec::Constant { c } => Ok(*c),
            ValuationSpec::Sum { terms } => terms.iter().map(|t| t.evaluate(u)).sum(),
            ValuationSpec::External { f, .. } => f(u),
        }
    }
}

/// `K ↦ Z(⌊K⌋)`.
pub fn induced_body_valuation(z: &ValuationSpec) -> impl Fn(&Polytope) -> Result<f64> + '_ {
    move |k| z.evaluate(&PLConvexFunction::lower_envelope(k))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Residual {
    Value(f64),
    /// `u ∧ v` is not convex or `u ∨ v` is not proper.
    Skip,
}

/// `|Z(u∧v) + Z(u∨v) − Z(u) − Z(v)|`.
pub fn valuation_residual(z: &ValuationSpec, u: &PLConvexFunction, v: &PLConvexFunction) -> Result<Residual> {
    let max = match u.pointwise_max(v) {
        Ok(m) => m,
        Err(Error::DomainEmpty) => return Ok(Residual::Skip),
        Err(e) => return Err(e),
    };
    let min = match u.pointwise_min(v) {
        Ok(m) => m,
        Err(Error::NotConvex) => return Ok(Residual::Skip),
        Err(e) => return Err(e),
    };
    let r = z.evaluate(&min)? + z.evaluate(&max)? - z.evaluate(u)? - z.evaluate(v)?;
    Ok(Residual::Value(r.abs()))
}

/// `(Z_0(u), …, Z_n(u))` from `Z(t⊡u) = Σ_i t^i Z_i(u)` at `t = 1, …, n+1`.
pub fn homogeneous_components(z: &ValuationSpec, u: &PLConvexFunction) -> Result<Vec<f64>> {
    let m = u.n() + 1;
    let mut vals = Vec::with_capacity(m);
    for t in 1..=m {
        vals.push(z.evaluate(&u.epi_scale(&qi(t as i64))?)?);
    }
    let v = DMatrix::from_fn(m, m, |r, c| ((r + 1) as f64).powi(c as i32));
    let sol = v
        .lu()
        .solve(&DVector::from_vec(vals))
        .ok_or_else(|| Error::NoConvergence("singular Vandermonde system".into()))?;
    Ok(sol.iter().copied().collect())
}

/// Sample directions used to test reflection symmetry of sphere densities.
fn probe_directions(d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let k = 24;
    for i in 0..k {
        let a = std::f64::consts::TAU * (i as f64 + 0.37) / k as f64;
        if d == 2 {
            out.push(vec![a.cos(), a.sin()]);
        } else {
            for j in 0..k / 2 {
                let b = std::f64::consts::PI * (j as f64 + 0.41) / (k / 2) as f64;
                out.push(vec![b.sin() * a.cos(), b.sin() * a.sin(), b.cos()]);
            }
        }
    }
    out
}

fn reflect_last(v: &[f64]) -> Vec<f64> {
    let mut w = v.to_vec();
    let k = w.len() - 1;
    w[k] = -w[k];
    w
}

/// `|Y(K × [0, ℓ]) − 2η(−e_{n+1}) vol(K) − ℓ Σ_{facets F of K} H^{n−1}(F) η((ν_F, 0))|`.
pub fn cylinder_identity_check(k: &Polytope, ell: &Q, eta: &SphereDensity) -> Result<f64> {
    let n = k.ambient_dim();
    if eta.d != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: eta.d });
    }
    if !k.is_full_dim() {
        return Err(Error::InvalidArgument("base of the cylinder must be full-dimensional".into()));
    }
    if *ell <= qi(0) {
        return Err(Error::InvalidArgument("cylinder height must be positive".into()));
    }
    for p in probe_directions(n + 1) {
        let (a, b) = (eta.eval(&p), eta.eval(&reflect_last(&p)));
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Asymmetric);
        }
    }
    let mut pts = Vec::new();
    for v in k.vertices() {
        for h in [qi(0), ell.clone()] {
            let mut w = v.clone();
            w.push(h);
            pts.push(w);
        }
    }
    let cyl = Polytope::construct(&pts)?;
    let lhs = eval_sphere_valuation(eta, &cyl);
    let mut down = vec![0.0; n + 1];
    down[n] = -1.0;
    let base = 2.0 * eta.eval(&down) * to_f64(&k.volume());
    let side: f64 = surface_area_measure(k).integrate(|nv| {
        let mut e = nv.to_vec();
        e.push(0.0);
        eta.eval(&e)
    });
    Ok((lhs - base - to_f64(ell) * side).abs())
}

/// Whether two valuations differ on at least one function of the family, beyond `tol`.
pub fn distinguishes(a: &ValuationSpec, b: &ValuationSpec, family: &[PLConvexFunction], tol: f64) -> Result<bool> {
    for u in family {
        if (a.evaluate(u)? - b.evaluate(u)?).abs() > tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Five smooth bumps on the lower hemisphere, each supported in `{N_{d} <= −0.2}`.
pub fn bump_family(d: usize) -> Vec<SphereDensity> {
    let params: [(f64, f64, f64, f64); 5] = [
        (0.0, 0.0, 0.9, 1.0),
        (0.6, 0.3, 0.7, 0.8),
        (-0.8, 0.0, 0.6, -1.3),
        (0.2, -0.9, 0.5, 2.0),
        (-0.4, 0.7, 0.8, 0.6),
    ];
    params
        .iter()
        .map(|&(a, b, width, height)| {
            // center at polar angle arccos of the last coordinate, inside the cap N_d <= −0.2
            let mut c = if d == 2 { vec![a] } else { vec![a, b] };
            let s = (c.iter().map(|x| x * x).sum::<f64>() + 1.0).sqrt();
            c.iter_mut().for_each(|x| *x /= s);
            c.push(-1.0 / s);
            // all points within `width` (chordal) of c have N_d <= c_d + width·|…| ; shrink until inside the cap
            let mut w = width;
            while -c[d - 1] - w < 0.2 {
                w *= 0.9;
            }
            SphereDensity::restricted(d, Kernel::Bump { center: c, width: w, height }, 0.2).expect("valid margin")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epi::{abs_on_interval, interval_indicator};
    use crate::num::{q, qvec};

    #[test]
    fn gradient_valuation_examples() {
        let one = PlaneDensity::new(1, Kernel::Constant { c: 1.0 }, 10.0).unwrap();
        assert_eq!(eval_gradient_valuation(&one, &abs_on_interval()), 2.0);
        let hat = PlaneDensity::new(1, Kernel::Hat { center: vec![0.0], width: 2.0, height: 2.0 }, 2.0).unwrap();
        assert_eq!(eval_gradient_valuation(&hat, &abs_on_interval()), 2.0);
        let ind = interval_indicator(0, 3);
        assert_eq!(eval_gradient_valuation(&hat, &ind), 6.0);
    }

    #[test]
    fn sphere_valuation_examples() {
        let cube = Polytope::cuboid(&qvec(&[0, 0, 0]), &qvec(&[1, 1, 1])).unwrap();
        assert_eq!(eval_sphere_valuation(&SphereDensity::full(3, Kernel::Constant { c: 1.0 }), &cube), 6.0);
        let lin = SphereDensity::full(3, Kernel::Linear { l: vec![0.3, -1.2, 0.7], c: 0.0 });
        let tet = Polytope::from_ints(&[&[0, 0, 0], &[3, 0, 0], &[0, 2, 0], &[1, 1, 5]]).unwrap();
        assert!(eval_sphere_valuation(&lin, &tet).abs() < 1e-13);
        let eta = SphereDensity::restricted(2, Kernel::Linear { l: vec![1.0, 0.0], c: 2.0 }, 0.5).unwrap();
        let k = abs_on_interval().body_of();
        let s = 0.5f64.sqrt();
        let expect = 2f64.sqrt() * (eta.eval(&[-s, -s]) + eta.eval(&[s, -s]));
        assert!((eval_sphere_valuation(&eta, &k) - expect).abs() < 1e-14);
    }

    #[test]
    fn transfer_round_trip() {
        for eta in bump_family(3) {
            let zeta = eta_to_zeta(&eta).unwrap();
            assert_eq!(zeta.eval(&[0.0, 0.0]), eta.eval(&[0.0, 0.0, -1.0]));
            let back = zeta_to_eta(&zeta).unwrap();
            for p in probe_directions(3) {
                assert!((back.eval(&p) - eta.eval(&p)).abs() < 1e-12);
            }
        }
        assert!(eta_to_zeta(&SphereDensity::full(2, Kernel::Constant { c: 1.0 })).is_err());
    }

    #[test]
    fn bump_family_respects_margin() {
        for d in [2, 3] {
            for eta in bump_family(d) {
                if let Kernel::Bump { center, width, .. } = &eta.kernel {
                    assert!(-center[d - 1] - width >= 0.2);
                }
            }
        }
    }

    #[test]
    fn homogeneous_components_examples() {
        let u = abs_on_interval();
        let z = ValuationSpec::Sum { terms: vec![ValuationSpec::domain_volume(1), ValuationSpec::Constant { c: 3.0 }] };
        let c = homogeneous_components(&z, &u).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_examples() {
        let k = Polytope::from_ints(&[&[0], &[1]]).unwrap();
        let one = SphereDensity::full(2, Kernel::Constant { c: 1.0 });
        assert!(cylinder_identity_check(&k, &qi(1), &one).unwrap() < 1e-12);
        let lin = SphereDensity::full(3, Kernel::Linear { l: vec![1.0, -2.0, 0.0], c: 0.0 });
        let tri = Polytope::from_ints(&[&[0, 0], &[2, 0], &[0, 1]]).unwrap();
        assert!(cylinder_identity_check(&tri, &q(3, 2), &lin).unwrap() < 1e-12);
        let tilted = SphereDensity::full(2, Kernel::Linear { l: vec![0.0, 1.0], c: 0.0 });
        assert_eq!(cylinder_identity_check(&k, &qi(1), &tilted), Err(Error::Asymmetric));
    }

    #[test]
    fn residual_skip_and_zero() {
        let z = ValuationSpec::domain_volume(1);
        let u = abs_on_interval();
        assert_eq!(valuation_residual(&z, &u, &u).unwrap(), Residual::Value(0.0));
        let a = interval_indicator(0, 1);
        let b = interval_indicator(2, 3);
        assert_eq!(valuation_residual(&z, &a, &b).unwrap(), Residual::Skip);
    }

    #[test]
    fn spec_json_round_trip() {
        let z = ValuationSpec::Sphere { eta: bump_family(2).remove(1) };
        let s = serde_json::to_string(&z).unwrap();
        let back: ValuationSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
