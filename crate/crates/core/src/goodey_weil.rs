//! Dual atom measures, their mollifications on grids, the transfer to sphere
//! densities, and the decomposition into a difference of two bodies through
//! the Minkowski problem.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epi::PLConvexFunction;
use crate::error::{Error, Result};
use crate::linalg::{cross3, dotf, normf, subf, unitf};
use crate::measures::{lower_normal, surface_area_measure, Atom, SphereMeasure};
use crate::num::{self, from_f64, to_f64, vec_to_f64, QVec, Q};
use crate::polytope::Polytope;
use crate::quadrature::{gauss_legendre, integrate_interval, integrate_sph_triangle, QuadConfig};
use crate::valuation::{Kernel, SphereDensity, SphereSupport};

// ---------------------------------------------------------------------------
// Dual atom measures
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DualAtom {
    #[serde(with = "num::serde_qvec_flat")]
    pub x: QVec,
    #[serde(with = "num::serde_q")]
    pub w: Q,
}

/// Finite signed measure annihilating affine functions.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(try_from = "RawDualAtoms")]
pub struct DualAtomMeasure {
    pub n: usize,
    pub atoms: Vec<DualAtom>,
    /// Support box `A` as `(lo, hi)`; the bounding box of the atoms when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support_box: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Deserialize)]
struct RawDualAtoms {
    n: usize,
    atoms: Vec<DualAtom>,
    #[serde(default)]
    support_box: Option<(Vec<f64>, Vec<f64>)>,
}

impl TryFrom<RawDualAtoms> for DualAtomMeasure {
    type Error = Error;

    fn try_from(r: RawDualAtoms) -> Result<Self> {
        DualAtomMeasure::new(r.n, r.atoms, r.support_box)
    }
}

impl DualAtomMeasure {
    pub fn new(n: usize, atoms: Vec<DualAtom>, support_box: Option<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut mass = Q::zero();
        let mut moment = vec![Q::zero(); n];
        for a in &atoms {
            if a.x.len() != n {
                return Err(Error::Dimension { expected: n, got: a.x.len() });
            }
            mass += &a.w;
            for (m, xi) in moment.iter_mut().zip(&a.x) {
                *m += &a.w * xi;
            }
        }
        if !mass.is_zero() || moment.iter().any(|m| !m.is_zero()) {
            return Err(Error::InvalidArgument("atom weights must annihilate affine functions".into()));
        }
        let m = DualAtomMeasure { n, atoms, support_box };
        if let Some((lo, hi)) = &m.support_box {
            if lo.len() != n || hi.len() != n {
                return Err(Error::Dimension { expected: n, got: lo.len().min(hi.len()) });
            }
            let inside = m.atoms.iter().all(|a| {
                vec_to_f64(&a.x).iter().enumerate().all(|(i, x)| lo[i] <= *x && *x <= hi[i])
            });
            if !inside {
                return Err(Error::InvalidArgument("atoms must lie in the support box".into()));
            }
        }
        Ok(m)
    }

    pub fn zero(n: usize) -> Self {
        DualAtomMeasure { n, atoms: Vec::new(), support_box: None }
    }

    /// `δ_{−1} − 2δ_0 + δ_1` on the line.
    pub fn second_difference() -> Self {
        let atom = |x: i64, w: i64| DualAtom { x: vec![num::qi(x)], w: num::qi(w) };
        DualAtomMeasure::new(1, vec![atom(-1, 1), atom(0, -2), atom(1, 1)], None).expect("balanced")
    }

    /// `Σ |w_m|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| to_f64(&a.w).abs()).sum()
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        if let Some(b) = &self.support_box {
            return b.clone();
        }
        if self.atoms.is_empty() {
            return (vec![0.0; self.n], vec![0.0; self.n]);
        }
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for a in &self.atoms {
            for (i, x) in vec_to_f64(&a.x).into_iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        (lo, hi)
    }

    /// `Σ w_m u*(x_m)`, evaluated exactly and rounded once.
    pub fn evaluate_exact(&self, u: &PLConvexFunction) -> Q {
        let conj = u.fenchel_conjugate();
        self.atoms.iter().map(|a| &a.w * conj.evaluate(&a.x)).sum()
    }

    pub fn evaluate(&self, u: &PLConvexFunction) -> f64 {
        to_f64(&self.evaluate_exact(u))
    }

    /// Least common denominator of the atom coordinates.
    fn coordinate_denominator(&self) -> u64 {
        let d = num::common_denominator(self.atoms.iter().flat_map(|a| a.x.iter()));
        u64::try_from(d).unwrap_or(1)
    }
}

// ---------------------------------------------------------------------------
// Mollifiers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `exp(−1/(1 − |x|²))`.
    Exp,
    /// `(1 − |x|²)³`.
    Poly3,
}

/// Smooth kernel `c·profile(|x|)` supported in the unit ball of `R^n`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Mollifier {
    pub kind: BumpKind,
    pub n: usize,
    pub c: f64,
}

fn exp_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// `∫_{B_1} exp(−1/(1 − |x|²)) dx` for `n = 1, 2`.
fn exp_mass(n: usize) -> f64 {
    static MASS: OnceLock<[f64; 2]> = OnceLock::new();
    let m = MASS.get_or_init(|| {
        let cfg = QuadConfig { gl_order: 32, panels: 64, depth: 0 };
        let one = 2.0 * integrate_interval(0.0, 1.0, &cfg, |r| exp_profile(r * r));
        let two = 2.0 * PI * integrate_interval(0.0, 1.0, &cfg, |r| r * exp_profile(r * r));
        [one, two]
    });
    m[n - 1]
}

impl Mollifier {
    pub fn new(kind: BumpKind, n: usize) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let c = match (kind, n) {
            (BumpKind::Exp, _) => 1.0 / exp_mass(n),
            (BumpKind::Poly3, 1) => 35.0 / 32.0,
            (BumpKind::Poly3, _) => 4.0 / PI,
        };
        Ok(Mollifier { kind, n, c })
    }

    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        match name {
            "exp" => Mollifier::new(BumpKind::Exp, n),
            "poly3" => Mollifier::new(BumpKind::Poly3, n),
            other => Err(Error::Unknown { kind: "bump", name: other.to_string() }),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = dotf(x, x);
        if r2 >= 1.0 {
            return 0.0;
        }
        self.c
            * match self.kind {
                BumpKind::Exp => exp_profile(r2),
                BumpKind::Poly3 => (1.0 - r2).powi(3),
            }
    }

    /// `∫ bump` by radial quadrature.
    pub fn mass(&self) -> f64 {
        let cfg = QuadConfig { gl_order: 32, panels: 64, depth: 0 };
        let radial = |r: f64| self.eval(&[r]);
        match self.n {
            1 => 2.0 * integrate_interval(0.0, 1.0, &cfg, radial),
            _ => 2.0 * PI * integrate_interval(0.0, 1.0, &cfg, |r| r * radial(r)),
        }
    }
}

// ---------------------------------------------------------------------------
// Grid densities
// ---------------------------------------------------------------------------

/// Cell-constant density on an axis-aligned grid; cell `k` has centre `lo + (k + 1/2)h`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridDensity {
    pub n: usize,
    pub lo: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn hi(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.shape).map(|(l, s)| l + *s as f64 * self.h).collect()
    }

    fn index(&self, k: &[usize]) -> usize {
        if self.n == 1 {
            k[0]
        } else {
            k[0] + self.shape[0] * k[1]
        }
    }

    fn multi(&self, i: usize) -> Vec<usize> {
        if self.n == 1 {
            vec![i]
        } else {
            vec![i % self.shape[0], i / self.shape[0]]
        }
    }

    pub fn center(&self, i: usize) -> Vec<f64> {
        self.multi(i).iter().zip(&self.lo).map(|(k, l)| l + (*k as f64 + 0.5) * self.h).collect()
    }

    /// Value of the cell containing `x`, zero outside the grid.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut k = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let t = ((x[i] - self.lo[i]) / self.h).floor();
            if t < 0.0 || t >= self.shape[i] as f64 {
                return 0.0;
            }
            k.push(t as usize);
        }
        self.values[self.index(&k)]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// `|Σ φ h^n|`.
    pub fn mass_residual(&self) -> f64 {
        (self.values.iter().sum::<f64>() * self.cell_volume()).abs()
    }

    /// `max_i |Σ φ x_i h^n|`.
    pub fn moment_residual(&self) -> f64 {
        let mut m = vec![0.0; self.n];
        for (i, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                for (mi, ci) in m.iter_mut().zip(self.center(i)) {
                    *mi += v * ci;
                }
            }
        }
        m.iter().map(|x| (x * self.cell_volume()).abs()).fold(0.0, f64::max)
    }

    /// `|∫ φ l|` for an affine `l(x) = a·x + b`.
    pub fn affine_residual(&self, a: &[f64], b: f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| v * (dotf(a, &self.center(i)) + b))
            .sum();
        (s * self.cell_volume()).abs()
    }

    fn nonzero_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i)
    }

    /// Largest distance from the origin to a point of a cell where `φ ≠ 0`,
    /// measured at cell centres plus half a cell diagonal.
    pub fn support_radius(&self) -> f64 {
        let half = 0.5 * self.h * (self.n as f64).sqrt();
        self.nonzero_cells().map(|i| normf(&self.center(i)) + half).fold(0.0, f64::max)
    }

    /// Largest distance from a centre of a non-zero cell to the box `[lo, hi]`.
    pub fn support_excess(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.nonzero_cells()
            .map(|i| {
                let c = self.center(i);
                let d: Vec<f64> = (0..self.n).map(|k| (lo[k] - c[k]).max(c[k] - hi[k]).max(0.0)).collect();
                normf(&d)
            })
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Whether every cell touching the grid boundary is zero.
    pub fn boundary_vanishes(&self) -> bool {
        (0..self.values.len()).all(|i| {
            let k = self.multi(i);
            let edge = k.iter().zip(&self.shape).any(|(ki, s)| *ki == 0 || ki + 1 == *s);
            !edge || self.values[i] == 0.0
        })
    }
}

/// `φ_j(x) = Σ_m w_m j^n bump(j(x_m − x))` on a grid with step `h = 1/(4jD)`, where
/// `D` is the common denominator of the atom coordinates. Every atom then sits at the
/// same offset from the cell centres, which makes the affine moments vanish identically.
pub fn mollify(mu: &DualAtomMeasure, bump: &Mollifier, j: u32) -> Result<GridDensity> {
    if j < 1 {
        return Err(Error::InvalidArgument("mollification index j must be at least 1".into()));
    }
    if bump.n != mu.n {
        return Err(Error::Dimension { expected: mu.n, got: bump.n });
    }
    if (bump.mass() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("bump is not normalized".into()));
    }
    let n = mu.n;
    let jf = j as f64;
    let h = 1.0 / (4.0 * jf * mu.coordinate_denominator() as f64);
    let (alo, ahi) = mu.bounds();
    let lo: Vec<f64> = alo.iter().map(|a| ((a - 1.0 / jf) / h).floor() * h - 2.0 * h).collect();
    let shape: Vec<usize> = ahi.iter().zip(&lo).map(|(a, l)| (((a + 1.0 / jf - l) / h).ceil() as usize) + 2).collect();
    let mut g = GridDensity { n, lo, h, shape, values: Vec::new() };
    g.values = vec![0.0; g.shape.iter().product()];
    let scale = jf.powi(n as i32);
    let reach = (1.0 / (jf * h)).ceil() as i64 + 1;
    for a in &mu.atoms {
        let x = vec_to_f64(&a.x);
        let w = to_f64(&a.w);
        let base: Vec<i64> = (0..n).map(|i| ((x[i] - g.lo[i]) / h).floor() as i64).collect();
        let ranges: Vec<(i64, i64)> =
            (0..n).map(|i| ((base[i] - reach).max(0), (base[i] + reach).min(g.shape[i] as i64 - 1))).collect();
        let mut visit = |k: &[usize]| {
            let idx = g.index(k);
            let c: Vec<f64> = (0..n).map(|i| g.lo[i] + (k[i] as f64 + 0.5) * h).collect();
            let z: Vec<f64> = (0..n).map(|i| jf * (x[i] - c[i])).collect();
            g.values[idx] += w * scale * bump.eval(&z);
        };
        if n == 1 {
            for k0 in ranges[0].0..=ranges[0].1 {
                visit(&[k0 as usize]);
            }
        } else {
            for k1 in ranges[1].0..=ranges[1].1 {
                for k0 in ranges[0].0..=ranges[0].1 {
                    visit(&[k0 as usize, k1 as usize]);
                }
            }
        }
    }
    Ok(g)
}

/// Float pieces `a·y + b` of `u*`.
fn conjugate_pieces(u: &PLConvexFunction) -> Vec<(Vec<f64>, f64)> {
    u.fenchel_conjugate().pieces.iter().map(|p| (vec_to_f64(&p.a), to_f64(&p.b))).collect()
}

/// `Σ_cells φ(cell)·∫_cell u*`, with the cell integral of the piecewise-linear `u*` exact up to rounding.
pub fn eval_dual(phi: &GridDensity, u: &PLConvexFunction) -> f64 {
    if phi.n != u.n() {
        return f64::NAN;
    }
    match phi.n {
        1 => eval_dual_1d(phi, u),
        _ => eval_dual_2d(phi, u),
    }
}

fn eval_dual_1d(phi: &GridDensity, u: &PLConvexFunction) -> f64 {
    let (pieces, bps) = u.fenchel_conjugate().breakpoints_1d();
    let pieces: Vec<(f64, f64)> = pieces.iter().map(|p| (to_f64(&p.a[0]), to_f64(&p.b))).collect();
    let bps: Vec<f64> = bps.iter().map(to_f64).collect();
    let lin = |(a, b): (f64, f64), s: f64, t: f64| a * 0.5 * (t * t - s * s) + b * (t - s);
    let mut total = 0.0;
    for i in phi.nonzero_cells() {
        let a = phi.lo[0] + i as f64 * phi.h;
        let b = a + phi.h;
        let mut k = bps.partition_point(|x| *x <= a);
        let mut s = a;
        let mut cell = 0.0;
        while k < bps.len() && bps[k] < b {
            cell += lin(pieces[k], s, bps[k]);
            s = bps[k];
            k += 1;
        }
        cell += lin(pieces[k], s, b);
        total += phi.values[i] * cell;
    }
    total
}

/// `∫` of an affine function over a convex polygon: area times value at the centroid.
fn polygon_affine_integral(poly: &[[f64; 2]], a: &[f64], b: f64) -> f64 {
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let (mut area2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let cr = p[0] * q[1] - q[0] * p[1];
        area2 += cr;
        cx += (p[0] + q[0]) * cr;
        cy += (p[1] + q[1]) * cr;
    }
    if area2 == 0.0 {
        return 0.0;
    }
    let area = 0.5 * area2;
    let (cx, cy) = (cx / (3.0 * area2), cy / (3.0 * area2));
    area * (a[0] * cx + a[1] * cy + b)
}

/// Sutherland–Hodgman clip of a convex polygon by `c·y <= e`.
fn clip(poly: &[[f64; 2]], c: [f64; 2], e: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let (fp, fq) = (c[0] * p[0] + c[1] * p[1] - e, c[0] * q[0] + c[1] * q[1] - e);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn eval_dual_2d(phi: &GridDensity, u: &PLConvexFunction) -> f64 {
    let pieces = conjugate_pieces(u);
    let val = |k: usize, y: [f64; 2]| pieces[k].0[0] * y[0] + pieces[k].0[1] * y[1] + pieces[k].1;
    let cells: Vec<usize> = phi.nonzero_cells().collect();
    cells
        .par_iter()
        .map(|&i| {
            let c = phi.center(i);
            let hh = 0.5 * phi.h;
            let sq = [[c[0] - hh, c[1] - hh], [c[0] + hh, c[1] - hh], [c[0] + hh, c[1] + hh], [c[0] - hh, c[1] + hh]];
            let best: Vec<usize> = sq
                .iter()
                .map(|y| (0..pieces.len()).max_by(|&a, &b| val(a, *y).total_cmp(&val(b, *y))).unwrap())
                .collect();
            let single = best.iter().all(|&k| best[0] == k)
                && sq.iter().all(|y| (0..pieces.len()).all(|l| val(best[0], *y) >= val(l, *y)));
            let integral = if single {
                phi.h * phi.h * val(best[0], [c[0], c[1]])
            } else {
                (0..pieces.len())
                    .map(|k| {
                        let mut poly = sq.to_vec();
                        for l in 0..pieces.len() {
                            if l == k || poly.len() < 3 {
                                continue;
                            }
                            // piece l no larger than piece k
                            let cc = [pieces[l].0[0] - pieces[k].0[0], pieces[l].0[1] - pieces[k].0[1]];
                            let e = pieces[k].1 - pieces[l].1;
                            if cc == [0.0, 0.0] {
                                if e < 0.0 || (e == 0.0 && l < k) {
                                    poly.clear();
                                }
                                continue;
                            }
                            poly = clip(&poly, cc, e);
                        }
                        polygon_affine_integral(&poly, &pieces[k].0, pieces[k].1)
                    })
                    .sum()
            };
            phi.values[i] * integral
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

// ---------------------------------------------------------------------------
// Sphere densities from grid densities
// ---------------------------------------------------------------------------

/// Exponent of `(1 + |g(N)|²)` that makes the sphere pairing reproduce the plane pairing.
pub fn default_exponent(n: usize) -> f64 {
    n as f64 / 2.0 + 1.0
}

/// `f(N) = φ(g(N))·(1 + |g(N)|²)^p` on the open lower hemisphere, zero elsewhere.
pub fn plane_to_sphere_density_with_exponent(phi: &GridDensity, p: f64) -> SphereDensity {
    let r = phi.lo.iter().zip(phi.hi()).map(|(l, h)| l.abs().max(h.abs())).map(|x| x * x).sum::<f64>().sqrt();
    let delta = 1.0 / (1.0 + r * r).sqrt();
    SphereDensity {
        d: phi.n + 1,
        kernel: Kernel::Grid { phi: Box::new(phi.clone()), exponent: p },
        support: SphereSupport::Restricted { delta },
    }
}

pub fn plane_to_sphere_density(phi: &GridDensity) -> SphereDensity {
    plane_to_sphere_density_with_exponent(phi, default_exponent(phi.n))
}

/// `∫_{S^n_−} F(N) dN` over the preimages of the grid cells under the gnomonic
/// chart, one panel per cell: arcs for `n = 1`, two spherical triangles for `n = 2`.
/// Cells are mapped to regions bounded by great circles, so cell-constant data stay smooth on each panel.
pub fn integrate_over_grid_cells(phi: &GridDensity, cfg: &QuadConfig, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let cells: Vec<usize> = (0..phi.values.len()).collect();
    cells
        .par_iter()
        .map(|&i| {
            let c = phi.center(i);
            let hh = 0.5 * phi.h;
            if phi.n == 1 {
                let (a, b) = (lower_normal(&[c[0] - hh]), lower_normal(&[c[0] + hh]));
                crate::quadrature::integrate_arc(&a, &b, cfg, &f)
            } else {
                let corner = |sx: f64, sy: f64| lower_normal(&[c[0] + sx * hh, c[1] + sy * hh]);
                let (p00, p10, p11, p01) = (corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0));
                integrate_sph_triangle(&p00, &p10, &p11, cfg, &f) + integrate_sph_triangle(&p00, &p11, &p01, cfg, &f)
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

// ---------------------------------------------------------------------------
// Discretization and balancing
// ---------------------------------------------------------------------------

/// Minimal ℓ² change of the weights making `Σ w N = 0`.
pub fn balance(atoms: &mut [Atom]) -> Result<()> {
    let d = atoms.first().map_or(0, |a| a.n.len());
    if atoms.len() < d + 1 {
        return Err(Error::InvalidArgument("too few atoms to balance".into()));
    }
    let nmat = DMatrix::from_fn(d, atoms.len(), |r, c| atoms[c].n[r]);
    let s: DVector<f64> = DVector::from_iterator(d, (0..d).map(|r| atoms.iter().map(|a| a.w * a.n[r]).sum()));
    let gram = &nmat * nmat.transpose();
    let lam = gram
        .lu()
        .solve(&s)
        .ok_or_else(|| Error::DegenerateNormals("atom normals do not span".into()))?;
    let corr = nmat.transpose() * lam;
    for (a, c) in atoms.iter_mut().zip(corr.iter()) {
        a.w -= c;
    }
    if atoms.iter().any(|a| a.w <= 0.0) {
        return Err(Error::InvalidArgument("balancing produced a non-positive weight".into()));
    }
    Ok(())
}

/// Octahedron subdivided `level` times, projected to the sphere.
pub fn geodesic_triangles(level: usize) -> Vec<[Vec<f64>; 3]> {
    let e = |i: usize, s: f64| {
        let mut v = vec![0.0; 3];
        v[i] = s;
        v
    };
    let mut tris = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                tris.push([e(0, sx), e(1, sy), e(2, sz)]);
            }
        }
    }
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * tris.len());
        for [a, b, c] in tris {
            let m = |p: &[f64], q: &[f64]| unitf(&p.iter().zip(q).map(|(x, y)| x + y).collect::<Vec<_>>());
            let (ab, bc, ca) = (m(&a, &b), m(&b, &c), m(&c, &a));
            next.push([a, ab.clone(), ca.clone()]);
            next.push([ab.clone(), b, bc.clone()]);
            next.push([ca.clone(), bc.clone(), c]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris
}

/// Atoms for `(1 + ‖f‖_∞ + f) dN`: one atom per panel, placed at the panel centre with the
/// panel integral as weight; `m` equal arcs on `S^1`, or the smallest geodesic level with at
/// least `m` triangles on `S^2`. `‖f‖_∞` is taken over the quadrature nodes. The weights are
/// then balanced.
pub fn balance_and_discretize(f: &SphereDensity, m: usize) -> Result<SphereMeasure> {
    let d = f.d;
    if m < d + 1 {
        return Err(Error::InvalidArgument(format!("need at least {} atoms, got {m}", d + 1)));
    }
    let cfg = QuadConfig { gl_order: 4, panels: 1, depth: 1 };
    let mut atoms = Vec::new();
    if d == 2 {
        let step = 2.0 * PI / m as f64;
        let mut sup = 0.0f64;
        let (x, _) = gauss_legendre(4);
        for k in 0..m {
            for xi in &x {
                let t = step * (k as f64 + 0.5 * xi);
                sup = sup.max(f.eval(&[t.cos(), t.sin()]).abs());
            }
        }
        for k in 0..m {
            let c = step * k as f64;
            let w = integrate_interval(c - 0.5 * step, c + 0.5 * step, &cfg, |t| 1.0 + sup + f.eval(&[t.cos(), t.sin()]));
            atoms.push(Atom { n: vec![c.cos(), c.sin()], w });
        }
    } else if d == 3 {
        let mut level = 0;
        while 8 * 4usize.pow(level as u32) < m {
            level += 1;
        }
        let tris = geodesic_triangles(level);
        let mut sup = 0.0f64;
        for [a, b, c] in &tris {
            integrate_sph_triangle(a, b, c, &cfg, |p| {
                sup = sup.max(f.eval(p).abs());
                0.0
            });
        }
        for [a, b, c] in &tris {
            let w = integrate_sph_triangle(a, b, c, &cfg, |p| 1.0 + sup + f.eval(p));
            let cen = unitf(&(0..3).map(|i| a[i] + b[i] + c[i]).collect::<Vec<_>>());
            atoms.push(Atom { n: cen, w });
        }
    } else {
        return Err(Error::UnsupportedDimension(d));
    }
    balance(&mut atoms)?;
    Ok(SphereMeasure { dim: d, atoms, signed: false })
}

// ---------------------------------------------------------------------------
// Minkowski problem
// ---------------------------------------------------------------------------

fn check_minkowski_input(mu: &SphereMeasure, dim: usize) -> Result<SphereMeasure> {
    if mu.dim != dim {
        return Err(Error::Dimension { expected: dim, got: mu.dim });
    }
    if mu.atoms.iter().any(|a| !(a.w > 0.0)) {
        return Err(Error::InvalidArgument("Minkowski input needs positive weights".into()));
    }
    let m = mu.merged(1e-12);
    let scale = m.total().max(1.0);
    let res = m.closedness_residual();
    if res > 1e-10 * scale {
        return Err(Error::UnbalancedInput(res));
    }
    let mat = DMatrix::from_fn(dim, m.atoms.len(), |r, c| m.atoms[c].n[r]);
    let sv = mat.svd(false, false).singular_values;
    if sv.len() < dim || sv.iter().fold(f64::INFINITY, |a, b| a.min(*b)) < 1e-9 {
        return Err(Error::DegenerateNormals("normals do not span the space".into()));
    }
    Ok(m)
}

/// Polytope whose surface area measure is `μ`, centred at its vertex centroid.
pub fn minkowski_solve(mu: &SphereMeasure, dim: usize) -> Result<Polytope> {
    match dim {
        2 => minkowski_2d(&check_minkowski_input(mu, 2)?),
        3 => minkowski_3d(&check_minkowski_input(mu, 3)?),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn minkowski_2d(mu: &SphereMeasure) -> Result<Polytope> {
    let mut atoms = mu.atoms.clone();
    atoms.sort_by(|a, b| a.n[1].atan2(a.n[0]).total_cmp(&b.n[1].atan2(b.n[0])));
    // edges run counter-clockwise along w·rot90(n)
    let mut pts = Vec::with_capacity(atoms.len());
    let (mut x, mut y) = (0.0, 0.0);
    for a in &atoms[..atoms.len() - 1] {
        pts.push(vec![x, y]);
        x -= a.w * a.n[1];
        y += a.w * a.n[0];
    }
    pts.push(vec![x, y]);
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    let q: Vec<QVec> = pts.iter().map(|p| Ok(vec![from_f64(p[0] - cx)?, from_f64(p[1] - cy)?])).collect::<Result<_>>()?;
    Polytope::construct(&q)
}

/// Facet areas and adjacent edge lengths of `{x : n_k·x <= h_k}` in floating point.
struct FloatGeometry {
    areas: Vec<f64>,
    /// `(i, j, length)` for facets sharing an edge.
    edges: Vec<(usize, usize, f64)>,
}

fn solve3(a: [&[f64]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = dotf(a[0], &cross3(a[1], a[2]));
    if det.abs() < 1e-12 {
        return None;
    }
    let c0 = cross3(a[1], a[2]);
    let c1 = cross3(a[2], a[0]);
    let c2 = cross3(a[0], a[1]);
    Some([0, 1, 2].map(|i| (b[0] * c0[i] + b[1] * c1[i] + b[2] * c2[i]) / det))
}

fn float_geometry(normals: &[Vec<f64>], h: &[f64]) -> FloatGeometry {
    let m = normals.len();
    let scale = h.iter().fold(1e-300f64, |a, b| a.max(b.abs()));
    let tol = 1e-9 * scale;
    let mut verts: Vec<([f64; 3], Vec<usize>)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let Some(x) = solve3([&normals[i], &normals[j], &normals[k]], [h[i], h[j], h[k]]) else { continue };
                if (0..m).any(|l| dotf(&normals[l], &x) > h[l] + tol) {
                    continue;
                }
                match verts.iter_mut().find(|(v, _)| normf(&subf(v, &x)) <= tol) {
                    Some((_, act)) => {
                        for l in [i, j, k] {
                            if !act.contains(&l) {
                                act.push(l);
                            }
                        }
                    }
                    None => verts.push((x, vec![i, j, k])),
                }
            }
        }
    }
    let mut areas = vec![0.0; m];
    for (i, area) in areas.iter_mut().enumerate() {
        let pts: Vec<[f64; 3]> = verts.iter().filter(|(_, a)| a.contains(&i)).map(|(v, _)| *v).collect();
        if pts.len() < 3 {
            continue;
        }
        let c: Vec<f64> = (0..3).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64).collect();
        let nrm = &normals[i];
        let e1 = unitf(&subf(&pts[0], &c));
        let e2 = cross3(nrm, &e1);
        let mut ang: Vec<(f64, [f64; 3])> = pts
            .iter()
            .map(|p| {
                let r = subf(p, &c);
                (dotf(&r, &e2).atan2(dotf(&r, &e1)), *p)
            })
            .collect();
        ang.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut s = 0.0;
        for k in 0..ang.len() {
            let (p, q) = (subf(&ang[k].1, &c), subf(&ang[(k + 1) % ang.len()].1, &c));
            s += dotf(&cross3(&p, &q), nrm);
        }
        *area = 0.5 * s.abs();
    }
    let mut edges = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let pts: Vec<&[f64; 3]> = verts.iter().filter(|(_, a)| a.contains(&i) && a.contains(&j)).map(|(v, _)| v).collect();
            let mut len = 0.0f64;
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    len = len.max(normf(&subf(pts[a], pts[b])));
                }
            }
            if len > 0.0 {
                edges.push((i, j, len));
            }
        }
    }
    FloatGeometry { areas, edges }
}

const NEWTON_MAX_ITER: usize = 200;

fn minkowski_3d(mu: &SphereMeasure) -> Result<Polytope> {
    let normals: Vec<Vec<f64>> = mu.atoms.iter().map(|a| unitf(&a.n)).collect();
    let w: Vec<f64> = mu.atoms.iter().map(|a| a.w).collect();
    let m = normals.len();
    let resid = |g: &FloatGeometry| -> (Vec<f64>, f64) {
        let r: Vec<f64> = g.areas.iter().zip(&w).map(|(a, wi)| a - wi).collect();
        let worst = r.iter().zip(&w).map(|(ri, wi)| (ri / wi).abs()).fold(0.0, f64::max);
        (r, worst)
    };
    // every facet of the polytope circumscribed about a ball is present
    let g1 = float_geometry(&normals, &vec![1.0; m]);
    let r0 = (w.iter().sum::<f64>() / g1.areas.iter().sum::<f64>()).sqrt();
    let mut h = vec![r0; m];
    let mut g = float_geometry(&normals, &h);
    let (mut r, mut worst) = resid(&g);
    let mut iter = 0;
    while worst > 1e-12 {
        if iter == NEWTON_MAX_ITER {
            return Err(Error::NoConvergence(format!("Minkowski Newton stopped at relative area residual {worst:.3e}")));
        }
        iter += 1;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for &(i, j, len) in &g.edges {
            let c = dotf(&normals[i], &normals[j]).clamp(-1.0, 1.0);
            let s = (1.0 - c * c).sqrt();
            jac[(i, j)] += len / s;
            jac[(j, i)] += len / s;
            jac[(i, i)] -= len * c / s;
            jac[(j, j)] -= len * c / s;
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&DVector::from_column_slice(&r), 1e-10 * smax)
            .map_err(|e| Error::NoConvergence(e.to_string()))?;
        let norm0: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = h.iter().zip(step.iter()).map(|(hi, si)| hi - alpha * si).collect();
            let gt = float_geometry(&normals, &trial);
            let present = gt.areas.iter().all(|a| *a > 0.0);
            let (rt, wt) = resid(&gt);
            let norm: f64 = rt.iter().map(|x| x * x).sum::<f64>().sqrt();
            if present && norm < (1.0 - 1e-4 * alpha) * norm0 {
                h = trial;
                g = gt;
                r = rt;
                worst = wt;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                if worst <= 1e-9 {
                    break;
                }
                return Err(Error::NoConvergence(format!("line search stalled at relative area residual {worst:.3e}")));
            }
        }
        if alpha < 1e-12 {
            break;
        }
    }
    let hs: Vec<crate::hull::Halfspace> = normals
        .iter()
        .zip(&h)
        .map(|(nv, hi)| {
            Ok(crate::hull::Halfspace { normal: nv.iter().map(|x| from_f64(*x)).collect::<Result<_>>()?, offset: from_f64(*hi)? })
        })
        .collect::<Result<_>>()?;
    let p = Polytope::from_halfspaces(3, &hs).ok_or_else(|| Error::NoConvergence("empty solution polytope".into()))?;
    let c = p.vertex_centroid();
    Ok(p.translate(&c.iter().map(|x| -x).collect::<Vec<_>>()))
}

/// Largest relative weight mismatch between `surface_area_measure(p)` and `μ`,
/// matching normals within `tol`. A facet with no matching atom counts with its
/// weight relative to the smallest atom.
pub fn minkowski_residual(p: &Polytope, mu: &SphereMeasure, tol: f64) -> f64 {
    let s = surface_area_measure(p).merged(tol);
    let target = mu.merged(tol);
    let mut worst = 0.0f64;
    for a in &target.atoms {
        let got = s.atoms.iter().find(|b| normf(&subf(&a.n, &b.n)) <= tol).map_or(0.0, |b| b.w);
        worst = worst.max((got - a.w).abs() / a.w);
    }
    for b in &s.atoms {
        if !target.atoms.iter().any(|a| normf(&subf(&a.n, &b.n)) <= tol) {
            let smallest = target.atoms.iter().map(|a| a.w).fold(f64::INFINITY, f64::min);
            worst = worst.max(b.w / smallest);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct GwRow {
    pub j: u32,
    pub grid_step: f64,
    pub sup_error: f64,
    pub mass_residual: f64,
    pub moment_residual: f64,
    pub support_radius: f64,
    pub representation_residual: Option<f64>,
    pub ball_hausdorff_error: Option<f64>,
    pub atoms: Option<usize>,
    /// `Z_j(u)` for each function of the family.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GwReport {
    pub n: usize,
    pub bump: BumpKind,
    pub total_variation: f64,
    /// `Z(u) = Σ w_m u*(x_m)` for each function of the family.
    pub exact: Vec<f64>,
    pub rows: Vec<GwRow>,
}

impl GwReport {
    /// Report with every float written in the fixed 17-digit form.
    pub fn to_json(&self) -> serde_json::Value {
        use num::f64_to_value as v;
        let opt = |x: Option<f64>| x.map_or(serde_json::Value::Null, v);
        serde_json::json!({
            "n": self.n,
            "bump": self.bump,
            "total_variation": v(self.total_variation),
            "exact": self.exact.iter().map(|x| v(*x)).collect::<Vec<_>>(),
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "j": r.j,
                "grid_step": v(r.grid_step),
                "sup_error": v(r.sup_error),
                "mass_residual": v(r.mass_residual),
                "moment_residual": v(r.moment_residual),
                "support_radius": v(r.support_radius),
                "representation_residual": opt(r.representation_residual),
                "ball_hausdorff_error": opt(r.ball_hausdorff_error),
                "atoms": r.atoms,
                "values": r.values.iter().map(|x| v(*x)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), num::format_f64);
        let mut s = String::from("j,grid_step,sup_error,mass_residual,moment_residual,support_radius,representation_residual,ball_hausdorff_error,atoms\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.j,
                num::format_f64(r.grid_step),
                num::format_f64(r.sup_error),
                num::format_f64(r.mass_residual),
                num::format_f64(r.moment_residual),
                num::format_f64(r.support_radius),
                opt(r.representation_residual),
                opt(r.ball_hausdorff_error),
                r.atoms.map_or(String::new(), |a| a.to_string()),
            ));
        }
        s
    }
}

/// Panels per unit angle on the part of the circle outside the grid.
const OUTER_PANEL: f64 = PI / 128.0;

/// Bodies `L_j` and `W_j` for `n = 1`: both measures share the Gauss nodes of the grid
/// cells (pulled to the lower half circle) and of equal angular panels elsewhere;
/// `L_j` carries `(1 + M + f_j) dN`, `W_j` carries `(1 + M) dN`.
fn bodies_1d(phi: &GridDensity, f: &SphereDensity) -> Result<(Polytope, Polytope, usize, f64)> {
    let p = match &f.kernel {
        Kernel::Grid { exponent, .. } => *exponent,
        _ => default_exponent(1),
    };
    let (x, wq) = gauss_legendre(4);
    let mut nodes: Vec<(Vec<f64>, f64, f64)> = Vec::new(); // (N, dN weight, f)
    let mut sup = 0.0f64;
    for (k, v) in phi.values.iter().enumerate() {
        let a = phi.lo[0] + k as f64 * phi.h;
        for (xi, wi) in x.iter().zip(&wq) {
            let y = a + 0.5 * phi.h * (xi + 1.0);
            let s = 1.0 + y * y;
            nodes.push((lower_normal(&[y]), 0.5 * phi.h * wi / s, v * s.powf(p)));
        }
        let end = a.abs().max((a + phi.h).abs());
        sup = sup.max(v.abs() * (1.0 + end * end).powf(p));
    }
    // remaining arc, counter-clockwise from the direction of the right grid edge to that of the left edge
    let hi = phi.hi()[0];
    let t0 = (-1.0f64).atan2(hi);
    let t1 = (-1.0f64).atan2(phi.lo[0]) + 2.0 * PI;
    let panels = ((t1 - t0) / OUTER_PANEL).ceil() as usize;
    let step = (t1 - t0) / panels as f64;
    for k in 0..panels {
        for (xi, wi) in x.iter().zip(&wq) {
            let t = t0 + step * (k as f64 + 0.5 * (xi + 1.0));
            nodes.push((vec![t.cos(), t.sin()], 0.5 * step * wi, 0.0));
        }
    }
    let c = 1.0 + sup;
    let mut l_atoms: Vec<Atom> = nodes.iter().map(|(n, dw, fv)| Atom { n: n.clone(), w: (c + fv) * dw }).collect();
    let mut w_atoms: Vec<Atom> = nodes.iter().map(|(n, dw, _)| Atom { n: n.clone(), w: c * dw }).collect();
    balance(&mut l_atoms)?;
    balance(&mut w_atoms)?;
    let count = l_atoms.len();
    let l = minkowski_solve(&SphereMeasure { dim: 2, atoms: l_atoms, signed: false }, 2)?;
    let w = minkowski_solve(&SphereMeasure { dim: 2, atoms: w_atoms, signed: false }, 2)?;
    // Hausdorff distance from W to the ball of radius 1 + M; the centre is read off the axis
    // widths, since the nodes cluster near the grid and bias the vertex centroid
    let verts = w.vertices_f64();
    let cen: Vec<f64> = (0..2)
        .map(|i| {
            let mut e = vec![0.0; 2];
            e[i] = 1.0;
            let hi = w.support_function_f64(&e);
            e[i] = -1.0;
            (hi - w.support_function_f64(&e)) / 2.0
        })
        .collect();
    let far = verts.iter().map(|v| normf(&subf(v, &cen))).fold(0.0, f64::max);
    let near = w
        .facets()
        .iter()
        .map(|hs| {
            let nv = vec_to_f64(&hs.normal);
            (to_f64(&hs.offset) - dotf(&nv, &cen)) / normf(&nv)
        })
        .fold(f64::INFINITY, f64::min);
    let haus = (far - c).max(c - near).abs();
    Ok((l, w, count, haus))
}

/// `Σ_{facets with N_{n+1} < 0} area·h_K(N)`.
fn lower_pairing(body: &Polytope, k: &Polytope) -> f64 {
    surface_area_measure(body).atoms.iter().filter(|a| a.n[a.n.len() - 1] < 0.0).map(|a| a.w * k.support_function_f64(&a.n)).sum()
}

pub fn gw_pipeline(mu: &DualAtomMeasure, bump: &Mollifier, j_list: &[u32], family: &[PLConvexFunction]) -> Result<GwReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("function family must be non-empty".into()));
    }
    if let Some(u) = family.iter().find(|u| u.n() != mu.n) {
        return Err(Error::Dimension { expected: mu.n, got: u.n() });
    }
    let exact: Vec<f64> = family.iter().map(|u| mu.evaluate(u)).collect();
    let bodies: Vec<Polytope> = family.iter().map(|u| u.body_of()).collect();
    let rows: Vec<GwRow> = j_list
        .par_iter()
        .map(|&j| {
            let phi = mollify(mu, bump, j)?;
            let values: Vec<f64> = family.iter().map(|u| eval_dual(&phi, u)).collect();
            let sup_error = values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let (mut rep, mut haus, mut atoms) = (None, None, None);
            if mu.n == 1 && !mu.atoms.is_empty() {
                let f = plane_to_sphere_density(&phi);
                let (l, w, count, hd) = bodies_1d(&phi, &f)?;
                let worst = bodies
                    .iter()
                    .zip(&values)
                    .map(|(k, v)| (v - (lower_pairing(&l, k) - lower_pairing(&w, k))).abs())
                    .fold(0.0, f64::max);
                rep = Some(worst);
                haus = Some(hd);
                atoms = Some(count);
            } else if mu.atoms.is_empty() {
                rep = Some(0.0);
            }
            Ok(GwRow {
                j,
                grid_step: phi.h,
                sup_error,
                mass_residual: phi.mass_residual(),
                moment_residual: phi.moment_residual(),
                support_radius: phi.support_radius(),
                representation_residual: rep,
                ball_hausdorff_error: haus,
                atoms,
                values,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GwReport { n: mu.n, bump: bump.kind, total_variation: mu.total_variation(), exact, rows })
}

/// Fixed compact test family: on the line `I_[−1,1]`, `|x| + I_[−1,1]` and `I_[0,2]`;
/// in the plane the indicators of `[−1,1]²` and `[0,2]²` and `max(x₁, x₂, 0)` on `[−1,1]²`.
pub fn default_family(n: usize) -> Result<Vec<PLConvexFunction>> {
    match n {
        1 => Ok(vec![
            crate::epi::interval_indicator(-1, 1),
            crate::epi::abs_on_interval(),
            crate::epi::interval_indicator(0, 2),
        ]),
        2 => {
            let square = |lo: i64, hi: i64| Polytope::cuboid(&num::qvec(&[lo, lo]), &num::qvec(&[hi, hi]));
            let piece = |a: [i64; 2]| crate::epi::Piece { a: num::qvec(&a), b: Q::zero() };
            Ok(vec![
                PLConvexFunction::indicator(square(-1, 1)?),
                PLConvexFunction::indicator(square(0, 2)?),
                PLConvexFunction::new(square(-1, 1)?, vec![piece([1, 0]), piece([0, 1]), piece([0, 0])])?,
            ])
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// Ten affine functions `(a, b)`, `l(x) = a·x + b`, for annihilation checks.
pub fn affine_test_set(n: usize) -> Vec<(Vec<f64>, f64)> {
    let raw: [(f64, f64, f64); 10] = [
        (0.0, 0.0, 1.0),
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (1.0, 1.0, 1.0),
        (-2.0, 0.5, 3.0),
        (0.25, -1.5, -0.75),
        (3.0, 2.0, -1.0),
        (-0.5, -0.5, 0.5),
        (1.0, -1.0, 2.0),
        (-3.0, 0.1, 0.0),
    ];
    raw.iter().map(|&(a, b, c)| (if n == 1 { vec![a + b] } else { vec![a, b] }, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epi::{abs_on_interval, interval_indicator};

    #[test]
    fn mollifier_mass() {
        for kind in [BumpKind::Exp, BumpKind::Poly3] {
            for n in [1, 2] {
                let b = Mollifier::new(kind, n).unwrap();
                assert!((b.mass() - 1.0).abs() < 1e-12, "{kind:?} {n}");
            }
        }
        let bad = Mollifier { kind: BumpKind::Poly3, n: 1, c: 1.0 };
        assert!(mollify(&DualAtomMeasure::second_difference(), &bad, 2).is_err());
    }

    #[test]
    fn mollify_examples() {
        let b = Mollifier::new(BumpKind::Exp, 1).unwrap();
        let z = mollify(&DualAtomMeasure::zero(1), &b, 3).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
        let mu = DualAtomMeasure::second_difference();
        for j in [1, 2, 4, 8] {
            let phi = mollify(&mu, &b, j).unwrap();
            let jf = j as f64;
            for i in (0..phi.values.len()).step_by(3) {
                let x = phi.center(i)[0];
                let direct = jf * (b.eval(&[jf * (-1.0 - x)]) - 2.0 * b.eval(&[-jf * x]) + b.eval(&[jf * (1.0 - x)]));
                assert!((phi.values[i] - direct).abs() < 1e-12);
            }
            assert!(phi.mass_residual() <= 1e-8 * 4.0);
            assert!(phi.moment_residual() <= 1e-8 * 4.0);
            assert!(phi.support_radius() <= 1.0 + 1.0 / jf + 1e-12);
            assert!(phi.boundary_vanishes());
        }
        assert!(mollify(&mu, &b, 0).is_err());
    }

    #[test]
    fn eval_dual_examples() {
        let b = Mollifier::new(BumpKind::Exp, 1).unwrap();
        let mu = DualAtomMeasure::second_difference();
        let ind = interval_indicator(-1, 1);
        let mut last = f64::INFINITY;
        for j in [2, 4, 8, 16] {
            let v = eval_dual(&mollify(&mu, &b, j).unwrap(), &ind);
            let err = (v - 2.0).abs();
            assert!(err < last);
            assert!(err * j as f64 <= 1.0);
            last = err;
        }
        // an affine conjugate is annihilated: u = indicator of a point
        let pt = PLConvexFunction::indicator(Polytope::from_ints(&[&[3]]).unwrap());
        assert!(eval_dual(&mollify(&mu, &b, 4).unwrap(), &pt).abs() < 1e-12);
        assert_eq!(mu.evaluate(&abs_on_interval()), 0.0);
    }

    #[test]
    fn eval_dual_2d_matches_fine_sampling() {
        let mu = DualAtomMeasure::new(
            2,
            vec![
                DualAtom { x: num::qvec(&[0, 0]), w: num::qi(-4) },
                DualAtom { x: num::qvec(&[1, 0]), w: num::qi(1) },
                DualAtom { x: num::qvec(&[-1, 0]), w: num::qi(1) },
                DualAtom { x: num::qvec(&[0, 1]), w: num::qi(1) },
                DualAtom { x: num::qvec(&[0, -1]), w: num::qi(1) },
            ],
            None,
        )
        .unwrap();
        let phi = mollify(&mu, &Mollifier::new(BumpKind::Poly3, 2).unwrap(), 2).unwrap();
        let sq = Polytope::from_ints(&[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1]]).unwrap();
        let u = PLConvexFunction::lower_envelope(&Polytope::from_ints(&[&[-1, -1, 1], &[1, -1, 1], &[1, 1, 1], &[-1, 1, 1], &[0, 0, 0]]).unwrap());
        for f in [PLConvexFunction::indicator(sq), u] {
            let conj = f.fenchel_conjugate();
            let sub = 16;
            let mut brute = 0.0;
            for i in 0..phi.values.len() {
                if phi.values[i] == 0.0 {
                    continue;
                }
                let c = phi.center(i);
                let mut s = 0.0;
                for a in 0..sub {
                    for b in 0..sub {
                        let y = [c[0] + phi.h * ((a as f64 + 0.5) / sub as f64 - 0.5), c[1] + phi.h * ((b as f64 + 0.5) / sub as f64 - 0.5)];
                        s += conj.evaluate_f64(&y);
                    }
                }
                brute += phi.values[i] * s * phi.h * phi.h / (sub * sub) as f64;
            }
            let exact = eval_dual(&phi, &f);
            assert!((exact - brute).abs() < 1e-3 * (1.0 + brute.abs()), "{exact} vs {brute}");
        }
    }

    #[test]
    fn sphere_density_examples() {
        let b = Mollifier::new(BumpKind::Exp, 1).unwrap();
        let phi = mollify(&DualAtomMeasure::second_difference(), &b, 4).unwrap();
        let f = plane_to_sphere_density(&phi);
        assert_eq!(f.eval(&[0.0, -1.0]), phi.eval(&[0.0]));
        assert_eq!(f.eval(&[0.0, 1.0]), 0.0);
    }

    #[test]
    fn balance_examples() {
        let zero = SphereDensity::full(2, Kernel::Constant { c: 0.0 });
        let m = balance_and_discretize(&zero, 4).unwrap();
        assert_eq!(m.atoms.len(), 4);
        for a in &m.atoms {
            assert!((a.w - PI / 2.0).abs() < 1e-12);
        }
        assert!(m.closedness_residual() < 1e-12);
        assert!(balance_and_discretize(&zero, 2).is_err());
        let bump = SphereDensity::full(3, Kernel::Bump { center: vec![0.0, 0.6, -0.8], width: 0.5, height: 3.0 });
        let m3 = balance_and_discretize(&bump, 100).unwrap();
        assert!(m3.closedness_residual() < 1e-12);
        assert!(m3.atoms.iter().all(|a| a.w > 0.0));
    }

    #[test]
    fn minkowski_examples() {
        let s = 0.5f64.sqrt();
        let axis = SphereMeasure {
            dim: 2,
            atoms: vec![
                Atom { n: vec![1.0, 0.0], w: 1.0 },
                Atom { n: vec![-1.0, 0.0], w: 1.0 },
                Atom { n: vec![0.0, 1.0], w: 1.0 },
                Atom { n: vec![0.0, -1.0], w: 1.0 },
            ],
            signed: false,
        };
        let sq = minkowski_solve(&axis, 2).unwrap();
        assert_eq!(num::to_f64(&sq.volume()), 1.0);
        assert!(minkowski_residual(&sq, &axis, 1e-9) < 1e-12);
        let tri = SphereMeasure {
            dim: 2,
            atoms: (0..3)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 3.0;
                    Atom { n: vec![t.cos(), t.sin()], w: 2.0 }
                })
                .collect(),
            signed: false,
        };
        let t = minkowski_solve(&tri, 2).unwrap();
        let v = t.vertices_f64();
        for a in 0..3 {
            for b in a + 1..3 {
                assert!((normf(&subf(&v[a], &v[b])) - 2.0).abs() < 1e-12);
            }
        }
        let cube_measure = SphereMeasure {
            dim: 3,
            atoms: (0..6)
                .map(|k| {
                    let mut n = vec![0.0; 3];
                    n[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                    Atom { n, w: 1.0 }
                })
                .collect(),
            signed: false,
        };
        let cube = minkowski_solve(&cube_measure, 3).unwrap();
        assert!((num::to_f64(&cube.volume()) - 1.0).abs() < 1e-9);
        assert!(minkowski_residual(&cube, &cube_measure, 1e-9) < 1e-6);
        let unbalanced = SphereMeasure { dim: 2, atoms: vec![Atom { n: vec![1.0, 0.0], w: 1.0 }, Atom { n: vec![0.0, 1.0], w: 1.0 }, Atom { n: vec![-s, -s], w: 1.0 }], signed: false };
        assert!(matches!(minkowski_solve(&unbalanced, 2), Err(Error::UnbalancedInput(_))));
        let flat = SphereMeasure { dim: 3, atoms: vec![Atom { n: vec![1.0, 0.0, 0.0], w: 1.0 }, Atom { n: vec![-1.0, 0.0, 0.0], w: 1.0 }, Atom { n: vec![0.0, 1.0, 0.0], w: 1.0 }, Atom { n: vec![0.0, -1.0, 0.0], w: 1.0 }], signed: false };
        assert!(matches!(minkowski_solve(&flat, 3), Err(Error::DegenerateNormals(_))));
    }

    #[test]
    fn minkowski_3d_tetrahedron() {
        let tet = Polytope::from_ints(&[&[0, 0, 0], &[3, 0, 0], &[0, 2, 0], &[1, 1, 4]]).unwrap();
        let m = surface_area_measure(&tet);
        let p = minkowski_solve(&m, 3).unwrap();
        assert!(minkowski_residual(&p, &m, 1e-9) < 1e-6);
        assert!((num::to_f64(&p.volume()) - num::to_f64(&tet.volume())).abs() < 1e-6);
    }

    #[test]
    fn pipeline_zero_measure() {
        let b = Mollifier::new(BumpKind::Exp, 1).unwrap();
        let r = gw_pipeline(&DualAtomMeasure::zero(1), &b, &[2, 4], &[abs_on_interval()]).unwrap();
        for row in &r.rows {
            assert_eq!(row.sup_error, 0.0);
            assert_eq!(row.mass_residual, 0.0);
            assert_eq!(row.support_radius, 0.0);
        }
    }

    #[test]
    fn dual_atoms_json() {
        let s = r#"{"n":1,"atoms":[{"x":["-1"],"w":"1"},{"x":[0],"w":"-2"},{"x":["1"],"w":"1/1"}]}"#;
        let m: DualAtomMeasure = serde_json::from_str(s).unwrap();
        assert_eq!(m, DualAtomMeasure::second_difference());
        let bad = r#"{"n":1,"atoms":[{"x":["1"],"w":"1"}]}"#;
        assert!(serde_json::from_str::<DualAtomMeasure>(bad).is_err());
    }
}
