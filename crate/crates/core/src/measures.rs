//! Surface area measures, support measures and Hessian measures of polytopes
//! and piecewise-linear functions, with Monte-Carlo oracles for the local
//! Steiner formulas.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epi::PLConvexFunction;
use crate::error::{Error, Result};
use crate::hull::Halfspace;
use crate::linalg::{addf, dotf, normf, scalef, subf, unitf};
use crate::num::{self, dot, sub, to_f64, vec_to_f64, QVec, Q};
use crate::polytope::{measure_sq, order_cycle, vertex_centroid, Face, Polytope};
use crate::quadrature::{integrate_arc, integrate_segment, integrate_sph_triangle, integrate_triangle, solid_angle, QuadConfig};

/// Per-face density of `Θ_i` in ambient dimension `d`, `1 / ((d − i)·C(d, i))`,
/// fixed so that `μ_t = Σ_i t^{d−i} C(d, i) Θ_i` holds for the local parallel volume.
pub const SUPPORT_DENSITY: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.5, 0.5, 0.0],
    [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0],
];

pub fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

// ---------------------------------------------------------------------------
// Sphere measures
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Atom {
    pub n: Vec<f64>,
    pub w: f64,
}

/// Finite atomic measure on the unit sphere.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SphereMeasure {
    pub dim: usize,
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub signed: bool,
}

impl SphereMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.n.len() != dim {
                return Err(Error::Dimension { expected: dim, got: a.n.len() });
            }
            if (normf(&a.n) - 1.0).abs() > 1e-12 || !a.w.is_finite() {
                return Err(Error::InvalidArgument("atom normal must be unit and weight finite".into()));
            }
        }
        let signed = atoms.iter().any(|a| a.w < 0.0);
        Ok(SphereMeasure { dim, atoms, signed })
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// `Σ w·n`.
    pub fn moment(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for a in &self.atoms {
            for (si, ni) in s.iter_mut().zip(&a.n) {
                *si += a.w * ni;
            }
        }
        s
    }

    pub fn closedness_residual(&self) -> f64 {
        self.moment().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.w * f(&a.n)).sum()
    }

    /// Merges atoms whose normals agree within `tol` and sorts them by normal.
    pub fn merged(&self, tol: f64) -> SphereMeasure {
        let mut out: Vec<Atom> = Vec::new();
        for a in &self.atoms {
            match out.iter_mut().find(|b| normf(&subf(&a.n, &b.n)) <= tol) {
                Some(b) => b.w += a.w,
                None => out.push(a.clone()),
            }
        }
        out.sort_by(|a, b| a.n.partial_cmp(&b.n).unwrap());
        SphereMeasure { dim: self.dim, atoms: out, signed: self.signed }
    }
}

/// Facet normals with facet `(d−1)`-volumes. A polytope of dimension `d − 1`
/// yields the two opposite normals of its hyperplane; lower dimensions give the zero measure.
pub fn surface_area_measure(p: &Polytope) -> SphereMeasure {
    let d = p.ambient_dim();
    let mut atoms = Vec::new();
    if p.is_full_dim() {
        for (f, inc) in p.facets().iter().zip(p.facet_incidence()) {
            let verts: Vec<QVec> = inc.iter().map(|&i| p.vertices()[i].clone()).collect();
            let w = to_f64(&measure_sq(&verts, d - 1)).sqrt();
            atoms.push(Atom { n: unitf(&vec_to_f64(&f.normal)), w });
        }
    } else if p.intrinsic_dim() + 1 == d {
        let e = unitf(&vec_to_f64(&p.equalities()[0].normal));
        let w = p.relative_volume();
        atoms.push(Atom { n: e.clone(), w });
        atoms.push(Atom { n: scalef(&e, -1.0), w });
    }
    SphereMeasure { dim: d, atoms, signed: false }
}

// ---------------------------------------------------------------------------
// Normal regions
// ---------------------------------------------------------------------------

/// Piece of a spherical region small enough for a direct quadrature rule.
#[derive(Clone, Debug)]
pub enum SphCell {
    Point(Vec<f64>),
    Arc(Vec<f64>, Vec<f64>),
    Tri([Vec<f64>; 3]),
}

impl SphCell {
    /// Hausdorff measure of the cell in its own dimension.
    pub fn measure(&self) -> f64 {
        match self {
            SphCell::Point(_) => 1.0,
            SphCell::Arc(a, b) => dotf(a, b).clamp(-1.0, 1.0).acos(),
            SphCell::Tri([a, b, c]) => solid_angle(a, b, c),
        }
    }

    pub fn integrate(&self, cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        match self {
            SphCell::Point(n) => f(n),
            SphCell::Arc(a, b) => integrate_arc(a, b, cfg, f),
            SphCell::Tri([a, b, c]) => integrate_sph_triangle(a, b, c, cfg, f),
        }
    }
}

/// Intersection of a polyhedral normal cone with the unit sphere.
///
/// The cone is split into pointed sub-cones; each is stored as its exact
/// slice by an affine hyperplane `c · p = 1` crossing every ray of the sub-cone.
#[derive(Clone, Debug)]
pub struct NormalRegion {
    /// Bounding halfspaces through the origin: `ξ · h <= 0`.
    pub bounding: Vec<QVec>,
    slices: Vec<(QVec, Polytope)>,
    cells: Vec<SphCell>,
}

impl NormalRegion {
    fn from_face(p: &Polytope, face: &Face) -> Self {
        let c_face = vertex_centroid(&face.vertices);
        let c_poly = p.vertex_centroid();
        let mut bounding: Vec<QVec> = p.vertices().iter().map(|v| sub(v, &c_face)).filter(|h| !num::is_zero_vec(h)).collect();
        bounding.sort_by(|a, b| num::lex_cmp(a, b));
        bounding.dedup();

        // exact Gram–Schmidt so that lines are mutually orthogonal
        let mut lines: Vec<QVec> = Vec::new();
        for l in &face.cone_lines {
            let mut v = l.clone();
            for u in &lines {
                let f = dot(&v, u) / dot(u, u);
                v = sub(&v, &num::scale(u, &f));
            }
            lines.push(v);
        }
        let base = sub(&c_face, &c_poly);
        let mut slices = Vec::new();
        for mask in 0..(1usize << lines.len()) {
            let signed: Vec<QVec> = lines
                .iter()
                .enumerate()
                .map(|(k, l)| if mask >> k & 1 == 1 { l.iter().map(|x| -x).collect() } else { l.clone() })
                .collect();
            let mut c = base.clone();
            for l in &signed {
                c = num::add(&c, l);
            }
            let gens: Vec<QVec> = face.cone_rays.iter().chain(signed.iter()).cloned().collect();
            let pts: Vec<QVec> = gens
                .iter()
                .map(|g| {
                    let s = dot(&c, g);
                    debug_assert!(s.is_positive());
                    g.iter().map(|x| x / &s).collect()
                })
                .collect();
            slices.push((c, Polytope::construct(&pts).expect("non-empty cone")));
        }
        let cells = slices.iter().flat_map(|(c, s)| slice_cells(c, s)).collect();
        NormalRegion { bounding, slices, cells }
    }

    pub fn cells(&self) -> &[SphCell] {
        &self.cells
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().map(SphCell::measure).sum()
    }

    pub fn integrate(&self, cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.cells.iter().map(|c| c.integrate(cfg, &mut f)).sum()
    }

    /// Restriction to the closed halfspace `ξ · w >= 0`, computed exactly.
    pub fn clip(&self, w: &[Q]) -> NormalRegion {
        let mut bounding = self.bounding.clone();
        bounding.push(w.iter().map(|x| -x).collect());
        let slices: Vec<(QVec, Polytope)> = self
            .slices
            .iter()
            .filter_map(|(c, s)| {
                let mut hs = s.halfspaces();
                hs.push(Halfspace { normal: w.iter().map(|x| -x).collect(), offset: Q::zero() });
                // lower-dimensional remnants are null sets of the region
                Polytope::from_halfspaces(s.ambient_dim(), &hs)
                    .filter(|t| t.intrinsic_dim() == s.intrinsic_dim())
                    .map(|t| (c.clone(), t))
            })
            .collect();
        let cells = slices.iter().flat_map(|(c, s)| slice_cells(c, s)).collect();
        NormalRegion { bounding, slices, cells }
    }
}

fn slice_cells(c: &QVec, s: &Polytope) -> Vec<SphCell> {
    let unit = |v: &QVec| unitf(&vec_to_f64(v));
    let vs = s.vertices();
    match s.intrinsic_dim() {
        0 => vec![SphCell::Point(unit(&vs[0]))],
        1 => vec![SphCell::Arc(unit(&vs[0]), unit(&vs[1]))],
        2 => {
            let cyc = order_cycle(vs, Some(c));
            (1..cyc.len() - 1)
                .map(|k| SphCell::Tri([unit(&cyc[0]), unit(&cyc[k]), unit(&cyc[k + 1])]))
                .collect()
        }
        _ => unreachable!("slices are at most two-dimensional"),
    }
}

// ---------------------------------------------------------------------------
// Support measures
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FacePiece {
    pub face: Polytope,
    pub region: NormalRegion,
    pub density: f64,
}

/// `Θ_i(P, ·)` as a sum over `i`-faces of (face measure) × (normal region measure) × density.
#[derive(Clone, Debug)]
pub struct FaceMeasure {
    pub order: usize,
    pub ambient_dim: usize,
    pub pieces: Vec<FacePiece>,
    pub total: f64,
}

impl FaceMeasure {
    /// Exact mass of `A × {ξ : ξ · w >= 0}`, either factor optional.
    pub fn localized(&self, a: Option<&Polytope>, w: Option<&[Q]>) -> f64 {
        self.pieces
            .iter()
            .map(|pc| {
                let face_mass = match a {
                    None => pc.face.relative_volume(),
                    Some(a) => match pc.face.intersect(a) {
                        Some(f) if f.intrinsic_dim() == self.order => f.relative_volume(),
                        _ => 0.0,
                    },
                };
                if face_mass == 0.0 {
                    return 0.0;
                }
                let reg = match w {
                    None => pc.region.measure(),
                    Some(w) => pc.region.clip(w).measure(),
                };
                pc.density * face_mass * reg
            })
            .sum()
    }
}

pub fn support_measure(p: &Polytope, i: usize) -> Result<FaceMeasure> {
    let d = p.ambient_dim();
    if i >= d {
        return Err(Error::OrderOutOfRange { i, max: d - 1 });
    }
    let density = SUPPORT_DENSITY[d][i];
    let pieces: Vec<FacePiece> = p
        .faces()
        .iter()
        .filter(|f| f.dim == i)
        .map(|f| FacePiece {
            face: Polytope::construct(&f.vertices).expect("non-empty"),
            region: NormalRegion::from_face(p, f),
            density,
        })
        .collect();
    let total = pieces.iter().map(|pc| pc.density * pc.face.relative_volume() * pc.region.measure()).sum();
    Ok(FaceMeasure { order: i, ambient_dim: d, pieces, total })
}

/// `∫ f(x) dH^k(x)` over a face of dimension `k <= 2`.
pub fn integrate_face(face: &Polytope, cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let vs = face.vertices_f64();
    match face.intrinsic_dim() {
        0 => f(&vs[0]),
        1 => integrate_segment(&vs[0], &vs[1], cfg, f),
        2 => {
            let cyc: Vec<Vec<f64>> = order_cycle(face.vertices(), None).iter().map(|v| vec_to_f64(v)).collect();
            (1..cyc.len() - 1).map(|k| integrate_triangle(&cyc[0], &cyc[k], &cyc[k + 1], cfg, &mut f)).sum()
        }
        k => unreachable!("face dimension {k}"),
    }
}

/// `∫_Σ f(x, ξ) dΘ_i(P, (x, ξ))` by a product rule over faces and normal regions.
pub fn integrate_support_measure(p: &Polytope, i: usize, cfg: &QuadConfig, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<f64> {
    let m = support_measure(p, i)?;
    Ok(m.pieces
        .iter()
        .map(|pc| pc.density * integrate_face(&pc.face, cfg, |x| pc.region.integrate(cfg, |xi| f(x, xi))))
        .sum())
}

/// `Σ_i t^{d−i} C(d, i) Θ_i(P, A × {ξ·w >= 0})`.
pub fn steiner_polynomial(p: &Polytope, t: f64, a: Option<&Polytope>, w: Option<&[Q]>) -> f64 {
    let d = p.ambient_dim();
    (0..d)
        .map(|i| {
            let th = support_measure(p, i).expect("order in range").localized(a, w);
            t.powi((d - i) as i32) * binom(d, i) * th
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Nearest points in floating point
// ---------------------------------------------------------------------------

struct FloatFace {
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

/// Float nearest-point projection onto a polytope, via projection onto every face.
pub struct Projector {
    faces: Vec<FloatFace>,
    facets: Vec<(Vec<f64>, f64)>,
    full: bool,
}

fn orthonormal(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            w = subf(&w, &scalef(u, dotf(&w, u)));
        }
        let n = normf(&w);
        if n > 1e-12 * (1.0 + normf(v)) {
            out.push(scalef(&w, 1.0 / n));
        }
    }
    out
}

impl Projector {
    pub fn new(p: &Polytope) -> Self {
        let faces = p
            .faces()
            .iter()
            .filter(|f| f.dim < p.ambient_dim())
            .map(|f| {
                let vs: Vec<Vec<f64>> = f.vertices.iter().map(|v| vec_to_f64(v)).collect();
                let diffs: Vec<Vec<f64>> = vs.iter().skip(1).map(|v| subf(v, &vs[0])).collect();
                FloatFace { origin: vs[0].clone(), basis: orthonormal(&diffs) }
            })
            .collect();
        let facets = p.facets().iter().map(|h| (vec_to_f64(&h.normal), to_f64(&h.offset))).collect();
        Projector { faces, facets, full: p.is_full_dim() }
    }

    fn inside(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|(n, b)| dotf(n, x) <= b + tol * (1.0 + normf(n) * (1.0 + normf(x))))
    }

    /// Nearest point and distance; distance zero inside.
    pub fn nearest(&self, x: &[f64]) -> (Vec<f64>, f64) {
        if self.full && self.inside(x, 0.0) {
            return (x.to_vec(), 0.0);
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for f in &self.faces {
            let r = subf(x, &f.origin);
            let mut p = f.origin.clone();
            for b in &f.basis {
                p = addf(&p, &scalef(b, dotf(&r, b)));
            }
            if !self.inside(&p, 1e-10) {
                continue;
            }
            let dist = normf(&subf(x, &p));
            if best.as_ref().map_or(true, |(_, d)| dist < *d) {
                best = Some((p, dist));
            }
        }
        best.expect("vertices always qualify")
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracles
// ---------------------------------------------------------------------------

const MC_CHUNK: usize = 4096;

/// Runs `hit` on `samples` uniform points of a box, in fixed chunks with one
/// seeded stream each, so results do not depend on the thread count.
fn mc_box(lo: &[f64], hi: &[f64], samples: usize, seed: u64, hit: impl Fn(&[f64]) -> bool + Sync) -> (f64, f64) {
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let m = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut k = 0;
            let mut x = vec![0.0; lo.len()];
            for _ in 0..m {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = rng.random_range(lo[i]..hi[i]);
                }
                if hit(&x) {
                    k += 1;
                }
            }
            k
        })
        .sum();
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let p = hits as f64 / samples as f64;
    (vol * p, vol * (p * (1.0 - p) / samples as f64).sqrt())
}

/// Estimate of `μ_t(P, β)`: the volume of points of `P_t ∖ P` whose
/// nearest-point pair `(p(x), (x − p(x))/|x − p(x)|)` lies in `β`.
pub fn local_parallel_volume_mc(
    p: &Polytope,
    region: impl Fn(&[f64], &[f64]) -> bool + Sync,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let proj = Projector::new(p);
    let (lo, hi) = p.bounding_box();
    let lo: Vec<f64> = lo.iter().map(|x| x - t).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x + t).collect();
    Ok(mc_box(&lo, &hi, samples, seed, |x| {
        let (q, dist) = proj.nearest(x);
        dist > 0.0 && dist <= t && region(&q, &scalef(&subf(x, &q), 1.0 / dist))
    }))
}

// ---------------------------------------------------------------------------
// Hessian measures
// ---------------------------------------------------------------------------

/// Region `A × B ⊂ R^n × R^n` for Hessian measures; `B` must be bounded.
#[derive(Clone, Debug)]
pub struct HessianRegion {
    pub x_set: Option<Polytope>,
    pub y_set: Polytope,
}

impl HessianRegion {
    /// `R^n × [−r, r]^n`.
    pub fn gradient_box(n: usize, r: &Q) -> Self {
        let lo = vec![-r.clone(); n];
        let hi = vec![r.clone(); n];
        HessianRegion { x_set: None, y_set: Polytope::cuboid(&lo, &hi).expect("valid box") }
    }

    pub fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        let inside = |p: &Polytope, z: &[f64]| {
            p.halfspaces().iter().all(|h| dotf(&vec_to_f64(&h.normal), z) <= to_f64(&h.offset) + 1e-12)
        };
        self.x_set.as_ref().map_or(true, |a| inside(a, x)) && inside(&self.y_set, y)
    }
}

#[derive(Clone, Debug)]
pub struct HessianPiece {
    /// Face `G` of the cell complex.
    pub base: Polytope,
    /// Subdifferential on the relative interior of `G`, intersected with the region.
    pub gradients: Polytope,
    pub weight: f64,
}

/// `Ξ_i(u, ·)` as a sum over `(n − i)`… faces: each face `G` of dimension `i`
/// contributes `H^i(G ∩ A)·H^{n−i}(∂u(G) ∩ B) / C(n, i)`.
#[derive(Clone, Debug)]
pub struct HessianMeasure {
    pub order: usize,
    pub pieces: Vec<HessianPiece>,
}

impl HessianMeasure {
    pub fn total(&self) -> f64 {
        self.pieces.iter().map(|p| p.weight * p.base.relative_volume() * p.gradients.relative_volume()).sum()
    }
}

/// Faces of the cell complex of `u` keyed by their vertex sets.
fn complex_faces(u: &PLConvexFunction) -> Vec<Polytope> {
    let mut seen: BTreeMap<Vec<String>, Polytope> = BTreeMap::new();
    for c in u.cells() {
        for f in c.polytope.faces() {
            let key: Vec<String> = f.vertices.iter().map(|v| v.iter().map(num::format_q).collect::<Vec<_>>().join(",")).collect();
            seen.entry(key).or_insert_with(|| Polytope::construct(&f.vertices).expect("non-empty"));
        }
    }
    seen.into_values().collect()
}

/// `∂u(x)` for `x` in the relative interior of a face, intersected with `b`.
pub fn subdifferential(u: &PLConvexFunction, x: &[Q], b: &Polytope) -> Option<Polytope> {
    let ux = u.evaluate(x)?;
    let mut hs = b.halfspaces();
    for v in u.complex_vertices() {
        let uv = u.evaluate(&v).unwrap();
        hs.push(Halfspace { normal: sub(&v, x), offset: uv - &ux });
    }
    Polytope::from_halfspaces(u.n(), &hs)
}

pub fn hessian_measure(u: &PLConvexFunction, i: usize, region: &HessianRegion) -> Result<HessianMeasure> {
    let n = u.n();
    if i > n {
        return Err(Error::OrderOutOfRange { i, max: n });
    }
    let weight = 1.0 / binom(n, i);
    let mut pieces = Vec::new();
    for g in complex_faces(u) {
        if g.intrinsic_dim() != i {
            continue;
        }
        let base = match &region.x_set {
            None => g.clone(),
            Some(a) => match g.intersect(a) {
                Some(b) if b.intrinsic_dim() == i => b,
                _ => continue,
            },
        };
        let xg = g.vertex_centroid();
        if let Some(d) = subdifferential(u, &xg, &region.y_set) {
            if d.intrinsic_dim() == n - i {
                pieces.push(HessianPiece { base, gradients: d, weight });
            }
        }
    }
    Ok(HessianMeasure { order: i, pieces })
}

/// `Σ_i C(n, i) t^i Ξ_{n−i}(u, β)`.
pub fn hessian_steiner(u: &PLConvexFunction, t: f64, region: &HessianRegion) -> f64 {
    let n = u.n();
    (0..=n)
        .map(|i| binom(n, i) * t.powi(i as i32) * hessian_measure(u, n - i, region).expect("order in range").total())
        .sum()
}

/// Estimate of `H^n(P_t(u, β))` with `P_t = {x + t y : y ∈ ∂u(x)}`. A point `z`
/// is in the image iff `x = prox_{tu}(z)` and `y = (z − x)/t` satisfy `(x, y) ∈ β`.
pub fn p_t_volume_mc(u: &PLConvexFunction, region: &HessianRegion, t: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let cells: Vec<(Projector, Vec<f64>, f64)> = u
        .cells()
        .iter()
        .map(|c| {
            let pc = &u.pieces()[c.piece];
            (Projector::new(&c.polytope), vec_to_f64(&pc.a), to_f64(&pc.b))
        })
        .collect();
    let (dlo, dhi) = u.domain().bounding_box();
    let (ylo, yhi) = region.y_set.bounding_box();
    let lo: Vec<f64> = dlo.iter().zip(&ylo).map(|(a, b)| a + t * b.min(0.0)).collect();
    let hi: Vec<f64> = dhi.iter().zip(&yhi).map(|(a, b)| a + t * b.max(0.0)).collect();
    Ok(mc_box(&lo, &hi, samples, seed, |z| {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for (proj, a, b) in &cells {
            let (x, _) = proj.nearest(&subf(z, &scalef(a, t)));
            let d = subf(&x, z);
            let obj = dotf(a, &x) + b + dotf(&d, &d) / (2.0 * t);
            if best.as_ref().map_or(true, |(o, _)| obj < *o) {
                best = Some((obj, x));
            }
        }
        let (_, x) = best.expect("at least one cell");
        let y = scalef(&subf(z, &x), 1.0 / t);
        region.contains_f64(&x, &y)
    }))
}

/// `Σ_k ∫_{C_k} f(x, ∇u_k) dx`, the top-order Hessian integral computed cell by cell.
pub fn hessian_cell_sum(u: &PLConvexFunction, cfg: &QuadConfig, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    u.cells()
        .iter()
        .filter(|c| c.polytope.is_full_dim())
        .map(|c| {
            let g = vec_to_f64(&u.pieces()[c.piece].a);
            integrate_full_cell(&c.polytope, cfg, |x| f(x, &g))
        })
        .sum()
}

/// `∫_C f` over a full-dimensional cell in `R^1` or `R^2`.
pub fn integrate_full_cell(c: &Polytope, cfg: &QuadConfig, f: impl FnMut(&[f64]) -> f64) -> f64 {
    match c.ambient_dim() {
        1 => {
            let vs = c.vertices_f64();
            integrate_segment(&vs[0], &vs[1], cfg, f)
        }
        2 => integrate_face(c, cfg, f),
        d => unreachable!("cells live in dimension {d}"),
    }
}

/// Gnomonic chart of the lower hemisphere: `g(N) = pr_H(N) / (−N_{n+1})`,
/// so that `g((y, −1)/√(1+|y|²)) = y`.
pub fn gnomonic(nv: &[f64]) -> Vec<f64> {
    let last = nv[nv.len() - 1];
    nv[..nv.len() - 1].iter().map(|x| x / -last).collect()
}

/// Unit lower normal `(y, −1)/√(1+|y|²)`.
pub fn lower_normal(y: &[f64]) -> Vec<f64> {
    let s = (1.0 + dotf(y, y)).sqrt();
    let mut v: Vec<f64> = y.iter().map(|x| x / s).collect();
    v.push(-1.0 / s);
    v
}

/// `∫ f dΞ_i(u, ·)`.
///
/// For `i = n` the integral runs over the top-order support measure of `K^u`
/// on the lower half `Σ_−`, pulled back through `(pr_H, g)` with the factor
/// `(1 + |y|²)^{−1/2}`; the factor `n + 1` converts the Steiner-normalized
/// support measure to facet area. For `i < n` the face sum over the cell
/// complex is integrated directly, with gradients restricted to `y_set`.
pub fn hessian_integrate(
    u: &PLConvexFunction,
    i: usize,
    y_set: &Polytope,
    cfg: &QuadConfig,
    f: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    let n = u.n();
    if i > n {
        return Err(Error::OrderOutOfRange { i, max: n });
    }
    if i == n {
        let k = u.body_of();
        if k.intrinsic_dim() < n + 1 {
            // flat body: both lower and upper boundary are the graph itself
            return Ok(hessian_cell_sum(u, cfg, |x, y| if y_contains(y_set, y) { f(x, y) } else { 0.0 }));
        }
        let v = integrate_support_measure(&k, n, cfg, |x, xi| {
            if xi[n] >= -1e-12 {
                return 0.0;
            }
            let y = gnomonic(xi);
            if !y_contains(y_set, &y) {
                return 0.0;
            }
            f(&x[..n], &y) / (1.0 + dotf(&y, &y)).sqrt()
        })?;
        return Ok((n + 1) as f64 * v);
    }
    let region = HessianRegion { x_set: None, y_set: y_set.clone() };
    let m = hessian_measure(u, i, &region)?;
    Ok(m.pieces
        .iter()
        .map(|pc| {
            pc.weight
                * integrate_face(&pc.base, cfg, |x| {
                    integrate_face_any(&pc.gradients, cfg, |y| f(x, y))
                })
        })
        .sum())
}

fn y_contains(b: &Polytope, y: &[f64]) -> bool {
    b.halfspaces().iter().all(|h| dotf(&vec_to_f64(&h.normal), y) <= to_f64(&h.offset) + 1e-12)
}

/// Integral over a polytope of any dimension up to 2, in any ambient dimension.
fn integrate_face_any(p: &Polytope, cfg: &QuadConfig, f: impl FnMut(&[f64]) -> f64) -> f64 {
    if p.is_full_dim() && p.ambient_dim() == 1 {
        let vs = p.vertices_f64();
        return integrate_segment(&vs[0], &vs[1], cfg, f);
    }
    integrate_face(p, cfg, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epi::{abs_on_interval, interval_indicator};
    use crate::num::{q, qi, qvec};
    use std::f64::consts::PI;

    fn unit_square() -> Polytope {
        Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    fn unit_cube() -> Polytope {
        Polytope::cuboid(&qvec(&[0, 0, 0]), &qvec(&[1, 1, 1])).unwrap()
    }

    #[test]
    fn surface_area_examples() {
        let s = surface_area_measure(&unit_square());
        assert_eq!(s.atoms.len(), 4);
        assert!(s.atoms.iter().all(|a| (a.w - 1.0).abs() < 1e-15));
        let c = surface_area_measure(&unit_cube());
        assert_eq!(c.atoms.len(), 6);
        let tri = surface_area_measure(&Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap());
        let diag = tri.atoms.iter().find(|a| a.n[0] > 0.5).unwrap();
        assert!((diag.w - 2f64.sqrt()).abs() < 1e-15);
        assert!((diag.n[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(tri.closedness_residual() < 1e-12);
        let seg = surface_area_measure(&Polytope::from_ints(&[&[0, 0], &[3, 4]]).unwrap());
        assert_eq!(seg.atoms.len(), 2);
        assert!((seg.atoms[0].w - 5.0).abs() < 1e-15);
    }

    #[test]
    fn support_measure_totals() {
        let sq = unit_square();
        assert!((support_measure(&sq, 0).unwrap().total - PI).abs() < 1e-14);
        assert!((support_measure(&sq, 1).unwrap().total - 2.0).abs() < 1e-14);
        let pt = Polytope::from_ints(&[&[0, 0]]).unwrap();
        assert!((support_measure(&pt, 0).unwrap().total - PI).abs() < 1e-14);
        assert_eq!(support_measure(&pt, 1).unwrap().total, 0.0);
        let cube = unit_cube();
        assert!((support_measure(&cube, 0).unwrap().total - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((support_measure(&cube, 1).unwrap().total - PI).abs() < 1e-13);
        assert!((support_measure(&cube, 2).unwrap().total - 2.0).abs() < 1e-13);
        assert!(support_measure(&cube, 3).is_err());
    }

    #[test]
    fn integrate_support_measure_examples() {
        let cfg = QuadConfig::default();
        let sq = unit_square();
        let bottom = integrate_support_measure(&sq, 1, &cfg, |_, xi| if xi[1] == -1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!((bottom - 0.5).abs() < 1e-14);
        let one = integrate_support_measure(&unit_cube(), 0, &cfg, |_, _| 1.0).unwrap();
        assert!((one - 4.0 * PI / 3.0).abs() < 1e-9);
        // ∫ ξ_1² over each quarter circle is π/4; four vertices, density 1/2
        let m = integrate_support_measure(&sq, 0, &cfg, |_, xi| xi[0] * xi[0]).unwrap();
        assert!((m - PI / 2.0).abs() < 1e-12);
        // top order against the surface area measure
        let tri = Polytope::from_ints(&[&[0, 0], &[2, 0], &[0, 1]]).unwrap();
        let g = |xi: &[f64]| 1.0 + xi[0] + 2.0 * xi[1] * xi[1];
        let lhs = integrate_support_measure(&tri, 1, &cfg, |_, xi| g(xi)).unwrap();
        let rhs = surface_area_measure(&tri).integrate(g) / 2.0;
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn localized_mass_with_clip() {
        let sq = unit_square();
        let th0 = support_measure(&sq, 0).unwrap();
        // half of the angle at every vertex is in {ξ_1 >= 0} except at the two with outward x-cones
        let right = th0.localized(None, Some(&qvec(&[1, 0])));
        assert!((right - PI / 2.0).abs() < 1e-14, "{right}");
        let left_half = Polytope::cuboid(&vec![qi(-1), qi(-1)], &vec![q(1, 2), qi(2)]).unwrap();
        let th1 = support_measure(&sq, 1).unwrap();
        assert!((th1.localized(Some(&left_half), None) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mc_oracle_examples() {
        let sq = unit_square();
        let (e, se) = local_parallel_volume_mc(&sq, |_, _| true, 1.0, 200_000, 11).unwrap();
        assert!((e - (4.0 + PI)).abs() <= 3.0 * se, "{e} ± {se}");
        let pt = Polytope::from_ints(&[&[0, 0]]).unwrap();
        let (e, se) = local_parallel_volume_mc(&pt, |_, _| true, 1.0, 200_000, 12).unwrap();
        assert!((e - PI).abs() <= 3.0 * se, "{e} ± {se}");
        let (e, se) = local_parallel_volume_mc(&sq, |_, xi| xi[1] < -1.0 + 1e-12, 1.0, 200_000, 13).unwrap();
        assert!((e - 1.0).abs() <= 3.0 * se, "{e} ± {se}");
        assert!(local_parallel_volume_mc(&sq, |_, _| true, 1.0, 0, 1).is_err());
    }

    #[test]
    fn hessian_measure_examples() {
        let r = HessianRegion::gradient_box(1, &qi(1));
        let ind = interval_indicator(-1, 1);
        assert!((hessian_measure(&ind, 1, &r).unwrap().total() - 2.0).abs() < 1e-15);
        assert!((hessian_measure(&ind, 0, &r).unwrap().total() - 2.0).abs() < 1e-15);
        assert!((hessian_steiner(&ind, 1.0, &r) - 4.0).abs() < 1e-15);
        let abs = abs_on_interval();
        assert!((hessian_steiner(&abs, 1.0, &r) - 4.0).abs() < 1e-15);
        let cfg = QuadConfig::default();
        let ybox = r.y_set.clone();
        let total = hessian_integrate(&abs, 1, &ybox, &cfg, |_, _| 1.0).unwrap();
        assert!((total - 2.0).abs() < 1e-12, "{total}");
        let right = hessian_integrate(&abs, 1, &ybox, &cfg, |_, y| if y[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert!((right - 1.0).abs() < 1e-12, "{right}");
        let point = PLConvexFunction::indicator(Polytope::from_ints(&[&[0]]).unwrap());
        let (e, se) = p_t_volume_mc(&point, &r, 1.0, 100_000, 5).unwrap();
        assert!((e - 2.0).abs() <= 3.0 * se.max(1e-12), "{e} ± {se}");
    }

    #[test]
    fn p_t_mc_examples() {
        let r = HessianRegion::gradient_box(1, &qi(1));
        for (u, seed) in [(interval_indicator(-1, 1), 3), (abs_on_interval(), 4)] {
            let (e, se) = p_t_volume_mc(&u, &r, 1.0, 100_000, seed).unwrap();
            assert!((e - 4.0).abs() <= 3.0 * se.max(1e-12), "{e} ± {se}");
        }
    }
}
