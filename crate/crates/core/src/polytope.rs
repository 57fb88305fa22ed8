//! Exact convex polytopes with vertex and halfspace descriptions.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hull::{hull, Halfspace};
use crate::linalg::{rank, solve};
use crate::num::{self, add, dot, lex_cmp, norm2, scale, sub, to_f64, QVec, Q};

#[derive(Clone)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<QVec>,
    facets: Vec<Halfspace>,
    equalities: Vec<Halfspace>,
    intrinsic_dim: usize,
}

/// Motions under which the valuations considered here behave predictably.
#[derive(Clone, Debug)]
pub enum RigidMotion {
    Translate(QVec),
    /// Dilation about the origin by a positive factor.
    Scale(Q),
    /// Reflection across the hyperplane spanned by the first `d - 1` coordinates.
    ReflectH,
}

/// A face of a polytope together with the facet normals that generate its normal cone.
#[derive(Clone, Debug)]
pub struct Face {
    pub vertices: Vec<QVec>,
    pub dim: usize,
    /// Generators of the pointed part of the normal cone.
    pub cone_rays: Vec<QVec>,
    /// Basis of the lineality space of the normal cone (orthogonal complement of the affine hull of the polytope).
    pub cone_lines: Vec<QVec>,
}

impl Polytope {
    /// Convex hull of a finite point set in dimension 1, 2 or 3.
    pub fn construct(points: &[QVec]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let d = first.len();
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::Dimension { expected: d, got: p.len() });
        }
        let h = hull(points);
        Ok(Polytope {
            ambient_dim: d,
            vertices: h.vertices,
            facets: h.facets,
            equalities: h.equalities,
            intrinsic_dim: h.dim,
        })
    }

    pub fn from_ints(points: &[&[i64]]) -> Result<Self> {
        let pts: Vec<QVec> = points.iter().map(|p| num::qvec(p)).collect();
        Self::construct(&pts)
    }

    /// Axis-parallel box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
    pub fn cuboid(lo: &[Q], hi: &[Q]) -> Result<Self> {
        let d = lo.len();
        let mut pts = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            pts.push((0..d).map(|i| if mask >> i & 1 == 1 { hi[i].clone() } else { lo[i].clone() }).collect());
        }
        Self::construct(&pts)
    }

    /// Bounded polytope described by halfspaces; `None` if the intersection is empty.
    pub fn from_halfspaces(dim: usize, hs: &[Halfspace]) -> Option<Self> {
        let mut cons: Vec<Halfspace> = Vec::new();
        for h in hs {
            if num::is_zero_vec(&h.normal) {
                if h.offset.is_negative() {
                    return None;
                }
                continue;
            }
            // rescale so duplicates collapse
            let lead = h.normal.iter().find(|x| !x.is_zero()).unwrap().abs();
            let c = Halfspace { normal: h.normal.iter().map(|x| x / &lead).collect(), offset: &h.offset / &lead };
            if !cons.contains(&c) {
                cons.push(c);
            }
        }
        let m = cons.len();
        let mut pts: Vec<QVec> = Vec::new();
        let mut subset: Vec<usize> = (0..dim).collect();
        if m < dim {
            return None;
        }
        loop {
            let a: Vec<QVec> = subset.iter().map(|&i| cons[i].normal.clone()).collect();
            let b: QVec = subset.iter().map(|&i| cons[i].offset.clone()).collect();
            if let Some(x) = solve(&a, &b) {
                if cons.iter().all(|c| c.contains(&x)) && !pts.contains(&x) {
                    pts.push(x);
                }
            }
            // next combination
            let mut i = dim;
            loop {
                if i == 0 {
                    return Self::construct(&pts).ok();
                }
                i -= 1;
                if subset[i] != i + m - dim {
                    break;
                }
            }
            subset[i] += 1;
            for j in i + 1..dim {
                subset[j] = subset[j - 1] + 1;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn is_full_dim(&self) -> bool {
        self.intrinsic_dim == self.ambient_dim
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| num::vec_to_f64(v)).collect()
    }

    /// Facets relative to the affine hull.
    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn equalities(&self) -> &[Halfspace] {
        &self.equalities
    }

    /// Complete inequality description: facets plus each equality as two halfspaces.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        let mut out = self.facets.clone();
        for e in &self.equalities {
            out.push(e.clone());
            out.push(Halfspace { normal: e.normal.iter().map(|x| -x).collect(), offset: -e.offset.clone() });
        }
        out
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.facets.iter().all(|h| h.contains(x)) && self.equalities.iter().all(|e| e.slack(x).is_zero())
    }

    pub fn support_function(&self, y: &[Q]) -> Q {
        self.vertices.iter().map(|v| dot(v, y)).max().expect("non-empty")
    }

    pub fn support_function_f64(&self, y: &[f64]) -> f64 {
        self.vertices_f64()
            .iter()
            .map(|v| crate::linalg::dotf(v, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn transform(&self, m: &RigidMotion) -> Polytope {
        let pts: Vec<QVec> = self
            .vertices
            .iter()
            .map(|v| match m {
                RigidMotion::Translate(x) => add(v, x),
                RigidMotion::Scale(t) => scale(v, t),
                RigidMotion::ReflectH => {
                    let mut w = v.clone();
                    let last = w.len() - 1;
                    w[last] = -w[last].clone();
                    w
                }
            })
            .collect();
        Polytope::construct(&pts).expect("image of a valid polytope")
    }

    pub fn translate(&self, x: &[Q]) -> Polytope {
        self.transform(&RigidMotion::Translate(x.to_vec()))
    }

    pub fn scale(&self, t: &Q) -> Polytope {
        self.transform(&RigidMotion::Scale(t.clone()))
    }

    pub fn intersect(&self, other: &Polytope) -> Option<Polytope> {
        assert_eq!(self.ambient_dim, other.ambient_dim, "ambient dimensions differ");
        let mut hs = self.halfspaces();
        hs.extend(other.halfspaces());
        Polytope::from_halfspaces(self.ambient_dim, &hs)
    }

    /// Convex hull of the union of two polytopes.
    pub fn hull_with(&self, other: &Polytope) -> Polytope {
        let mut pts = self.vertices.clone();
        pts.extend(other.vertices.iter().cloned());
        Polytope::construct(&pts).expect("non-empty")
    }

    /// Whether `P ∪ Q` is convex. The hull minus `P` is covered by the regions
    /// cut off by violated constraints of `P`; each must lie inside `Q`.
    pub fn is_union_convex(&self, other: &Polytope) -> bool {
        let h = self.hull_with(other);
        let hh = h.halfspaces();
        for c in self.halfspaces() {
            if h.vertices.iter().all(|v| c.contains(v)) {
                continue;
            }
            let mut cut = hh.clone();
            cut.push(Halfspace { normal: c.normal.iter().map(|x| -x).collect(), offset: -c.offset.clone() });
            match Polytope::from_halfspaces(self.ambient_dim, &cut) {
                Some(piece) => {
                    if !piece.vertices.iter().all(|v| other.contains(v)) {
                        return false;
                    }
                }
                None => continue,
            }
        }
        true
    }

    /// Vertices of the facet (relative facet) with the given index.
    pub fn facet_vertices(&self, i: usize) -> Vec<QVec> {
        let f = &self.facets[i];
        self.vertices.iter().filter(|v| f.slack(v).is_zero()).cloned().collect()
    }

    /// Indices of the vertices on each facet. A float pass discards vertices whose
    /// slack is far outside the rounding error; the rest are decided exactly.
    pub fn facet_incidence(&self) -> Vec<Vec<usize>> {
        let vf = self.vertices_f64();
        self.facets
            .iter()
            .map(|f| {
                let nf = num::vec_to_f64(&f.normal);
                let bf = num::to_f64(&f.offset);
                (0..vf.len())
                    .filter(|&i| {
                        let slack: f64 = bf - nf.iter().zip(&vf[i]).map(|(a, b)| a * b).sum::<f64>();
                        let scale: f64 = bf.abs() + nf.iter().zip(&vf[i]).map(|(a, b)| (a * b).abs()).sum::<f64>();
                        !(slack.abs() > 1e-9 * scale) && f.slack(&self.vertices[i]).is_zero()
                    })
                    .collect()
            })
            .collect()
    }

    /// Ambient-dimensional volume (zero for lower-dimensional polytopes).
    pub fn volume(&self) -> Q {
        if !self.is_full_dim() {
            return Q::zero();
        }
        self.relative_volume_exact_full()
    }

    fn relative_volume_exact_full(&self) -> Q {
        match self.ambient_dim {
            1 => &self.vertices[1][0] - &self.vertices[0][0],
            2 => polygon_area_2d(&order_cycle(&self.vertices, None)),
            3 => {
                let c = vertex_centroid(&self.vertices);
                let mut vol = Q::zero();
                for (f, inc) in self.facets.iter().zip(self.facet_incidence()) {
                    let verts: Vec<QVec> = inc.iter().map(|&i| self.vertices[i].clone()).collect();
                    let cyc = order_cycle(&verts, Some(&f.normal));
                    for k in 1..cyc.len() - 1 {
                        vol += det3(&sub(&cyc[0], &c), &sub(&cyc[k], &c), &sub(&cyc[k + 1], &c)).abs();
                    }
                }
                vol / Q::from_integer(6.into())
            }
            _ => unreachable!(),
        }
    }

    /// Square of the `intrinsic_dim`-dimensional Hausdorff measure, exact.
    pub fn relative_volume_sq(&self) -> Q {
        measure_sq(&self.vertices, self.intrinsic_dim)
    }

    /// `intrinsic_dim`-dimensional Hausdorff measure.
    pub fn relative_volume(&self) -> f64 {
        if self.is_full_dim() {
            return to_f64(&self.volume());
        }
        to_f64(&self.relative_volume_sq()).sqrt()
    }

    /// Exact squared distance from `x` to the polytope.
    pub fn dist_sq(&self, x: &[Q]) -> Q {
        if self.contains(x) {
            return Q::zero();
        }
        let v = &self.vertices;
        let mut best: Option<Q> = None;
        let mut consider = |d: Q| {
            if best.as_ref().map_or(true, |b| d < *b) {
                best = Some(d);
            }
        };
        for a in 0..v.len() {
            consider(norm2(&sub(x, &v[a])));
            for b in a + 1..v.len() {
                if let Some(d) = simplex_dist_sq(x, &[&v[a], &v[b]]) {
                    consider(d);
                }
                if self.ambient_dim == 3 {
                    for c in b + 1..v.len() {
                        if let Some(d) = simplex_dist_sq(x, &[&v[a], &v[b], &v[c]]) {
                            consider(d);
                        }
                    }
                }
            }
        }
        best.expect("non-empty")
    }

    pub fn hausdorff_distance_sq(&self, other: &Polytope) -> Q {
        let a = self.vertices.iter().map(|v| other.dist_sq(v)).max().unwrap();
        let b = other.vertices.iter().map(|v| self.dist_sq(v)).max().unwrap();
        a.max(b)
    }

    pub fn hausdorff_distance(&self, other: &Polytope) -> f64 {
        to_f64(&self.hausdorff_distance_sq(other)).sqrt()
    }

    pub fn vertex_centroid(&self) -> QVec {
        vertex_centroid(&self.vertices)
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let vs = self.vertices_f64();
        let d = self.ambient_dim;
        let lo = (0..d).map(|i| vs.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..d).map(|i| vs.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        (lo, hi)
    }

    /// All non-empty faces, including the polytope itself, with their normal cones.
    pub fn faces(&self) -> Vec<Face> {
        let nv = self.vertices.len();
        let incid = self.facet_incidence();
        let mut sets: Vec<Vec<usize>> = vec![(0..nv).collect()];
        let mut frontier: Vec<Vec<usize>> = incid.clone();
        while let Some(s) = frontier.pop() {
            if s.is_empty() || sets.contains(&s) {
                continue;
            }
            for f in &incid {
                let meet: Vec<usize> = s.iter().copied().filter(|i| f.contains(i)).collect();
                if !meet.is_empty() && !sets.contains(&meet) {
                    frontier.push(meet);
                }
            }
            sets.push(s);
        }
        let lines: Vec<QVec> = self.equalities.iter().map(|e| e.normal.clone()).collect();
        let mut faces: Vec<Face> = sets
            .into_iter()
            .map(|s| {
                let verts: Vec<QVec> = s.iter().map(|&i| self.vertices[i].clone()).collect();
                let rays = self
                    .facets
                    .iter()
                    .zip(&incid)
                    .filter(|(_, inc)| s.iter().all(|i| inc.contains(i)))
                    .map(|(f, _)| f.normal.clone())
                    .collect();
                Face { dim: affine_dim(&verts), vertices: verts, cone_rays: rays, cone_lines: lines.clone() }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| lex_cmp(&a.vertices[0], &b.vertices[0])));
        faces
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<Vec<String>> = self.vertices.iter().map(|v| v.iter().map(num::format_q).collect()).collect();
        f.debug_struct("Polytope")
            .field("dim", &self.ambient_dim)
            .field("intrinsic_dim", &self.intrinsic_dim)
            .field("vertices", &vs)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    #[serde(with = "num::serde_qvec")]
    vertices: Vec<QVec>,
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson { dim: self.ambient_dim, vertices: self.vertices.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(d)?;
        if raw.vertices.iter().any(|v| v.len() != raw.dim) {
            return Err(serde::de::Error::custom("vertex dimension does not match \"dim\""));
        }
        Polytope::construct(&raw.vertices).map_err(serde::de::Error::custom)
    }
}

pub fn vertex_centroid(pts: &[QVec]) -> QVec {
    let n = Q::from_integer((pts.len() as i64).into());
    let mut c = vec![Q::zero(); pts[0].len()];
    for p in pts {
        c = add(&c, p);
    }
    c.iter().map(|x| x / &n).collect()
}

pub fn affine_dim(pts: &[QVec]) -> usize {
    let diffs: Vec<QVec> = pts.iter().skip(1).map(|p| sub(p, &pts[0])).collect();
    rank(&diffs)
}

pub fn det3(a: &[Q], b: &[Q], c: &[Q]) -> Q {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0])
        + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

fn cross3q(a: &[Q], b: &[Q]) -> QVec {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn embed3(v: &[Q]) -> QVec {
    let mut w = v.to_vec();
    w.resize(3, Q::zero());
    w
}

/// Orders the vertices of a convex polygon cyclically (counter-clockwise about `normal`).
/// Points may live in the plane or in space; in the plane `normal` defaults to `e_3`.
pub fn order_cycle(pts: &[QVec], normal: Option<&QVec>) -> Vec<QVec> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let p3: Vec<QVec> = pts.iter().map(|p| embed3(p)).collect();
    let nrm = match normal {
        Some(n) => embed3(n),
        None => {
            let n = cross3q(&sub(&p3[1], &p3[0]), &sub(&p3[2], &p3[0]));
            if pts[0].len() == 2 {
                vec![Q::zero(), Q::zero(), Q::one()]
            } else {
                let mut best = n;
                for k in 3..p3.len() {
                    if !num::is_zero_vec(&best) {
                        break;
                    }
                    best = cross3q(&sub(&p3[1], &p3[0]), &sub(&p3[k], &p3[0]));
                }
                best
            }
        }
    };
    let c = vertex_centroid(&p3);
    let r = sub(&p3[0], &c);
    let half = |u: &QVec| -> u8 {
        let s = dot(&nrm, &cross3q(&r, u));
        if s.is_positive() || (s.is_zero() && dot(&r, u).is_positive()) {
            0
        } else {
            1
        }
    };
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let rel: Vec<QVec> = p3.iter().map(|p| sub(p, &c)).collect();
    idx.sort_by(|&i, &j| {
        let (hi, hj) = (half(&rel[i]), half(&rel[j]));
        if hi != hj {
            return hi.cmp(&hj);
        }
        let s = dot(&nrm, &cross3q(&rel[i], &rel[j]));
        if s.is_positive() {
            Ordering::Less
        } else if s.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    idx.into_iter().map(|i| pts[i].clone()).collect()
}

fn polygon_area_2d(cyc: &[QVec]) -> Q {
    let m = cyc.len();
    let mut a = Q::zero();
    for i in 0..m {
        let (p, q) = (&cyc[i], &cyc[(i + 1) % m]);
        a += &p[0] * &q[1] - &p[1] * &q[0];
    }
    (a / Q::from_integer(2.into())).abs()
}

/// Squared `k`-dimensional measure of the convex hull of `verts`, assumed `k`-dimensional.
pub fn measure_sq(verts: &[QVec], k: usize) -> Q {
    match k {
        0 => Q::one(),
        1 => {
            let (lo, hi) = verts
                .iter()
                .fold((&verts[0], &verts[0]), |(lo, hi), v| {
                    (if lex_cmp(v, lo).is_lt() { v } else { lo }, if lex_cmp(v, hi).is_gt() { v } else { hi })
                });
            norm2(&sub(hi, lo))
        }
        2 => {
            let cyc = order_cycle(verts, None);
            let p3: Vec<QVec> = cyc.iter().map(|p| embed3(p)).collect();
            let mut s = vec![Q::zero(); 3];
            for i in 0..p3.len() {
                s = add(&s, &cross3q(&p3[i], &p3[(i + 1) % p3.len()]));
            }
            norm2(&s) / Q::from_integer(4.into())
        }
        3 => {
            let p = Polytope::construct(verts).expect("non-empty");
            let v = p.volume();
            &v * &v
        }
        _ => unreachable!(),
    }
}

/// Squared distance from `x` to the simplex spanned by `s` if the orthogonal
/// projection lands in its relative interior or boundary; `None` otherwise.
fn simplex_dist_sq(x: &[Q], s: &[&QVec]) -> Option<Q> {
    let base = s[0];
    let dirs: Vec<QVec> = s[1..].iter().map(|p| sub(p, base)).collect();
    let gram: Vec<QVec> = dirs.iter().map(|a| dirs.iter().map(|b| dot(a, b)).collect()).collect();
    let rhs: QVec = dirs.iter().map(|a| dot(a, &sub(x, base))).collect();
    let lam = solve(&gram, &rhs)?;
    let total: Q = lam.iter().fold(Q::zero(), |acc, l| acc + l);
    if lam.iter().any(|l| l.is_negative()) || total > Q::one() {
        return None;
    }
    let mut p = base.clone();
    for (l, d) in lam.iter().zip(&dirs) {
        p = add(&p, &scale(d, l));
    }
    Some(norm2(&sub(x, &p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qi, qvec};

    fn unit_square() -> Polytope {
        Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    #[test]
    fn construct_examples() {
        let sq = unit_square();
        assert_eq!(sq.facets().len(), 4);
        assert_eq!(sq.intrinsic_dim(), 2);
        let pt = Polytope::from_ints(&[&[0, 0]]).unwrap();
        assert_eq!(pt.intrinsic_dim(), 0);
        let tri = Polytope::construct(&[qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 1]), vec![q(1, 2), q(1, 4)]]).unwrap();
        assert_eq!(tri.vertices().len(), 3);
        assert!(Polytope::construct(&[]).is_err());
        assert!(Polytope::construct(&[qvec(&[0, 0]), qvec(&[1])]).is_err());
    }

    #[test]
    fn support_function_examples() {
        assert_eq!(unit_square().support_function(&qvec(&[1, 1])), qi(2));
        let cross = Polytope::from_ints(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]).unwrap();
        assert_eq!(cross.support_function(&qvec(&[1, 1])), qi(1));
        assert_eq!(cross.support_function(&qvec(&[0, 0])), qi(0));
    }

    #[test]
    fn transform_examples() {
        let sq = unit_square();
        assert_eq!(sq.translate(&qvec(&[1, 0])), Polytope::from_ints(&[&[1, 0], &[2, 0], &[1, 1], &[2, 1]]).unwrap());
        assert_eq!(sq.scale(&qi(2)), Polytope::from_ints(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]).unwrap());
        let seg = Polytope::from_ints(&[&[0, 0], &[0, 1]]).unwrap();
        assert_eq!(seg.transform(&RigidMotion::ReflectH), Polytope::from_ints(&[&[0, 0], &[0, -1]]).unwrap());
    }

    #[test]
    fn intersect_examples() {
        let sq = unit_square();
        let right = Polytope::from_ints(&[&[1, 0], &[2, 0], &[1, 1], &[2, 1]]).unwrap();
        let seg = sq.intersect(&right).unwrap();
        assert_eq!(seg, Polytope::from_ints(&[&[1, 0], &[1, 1]]).unwrap());
        assert_eq!(seg.intrinsic_dim(), 1);
        let far = Polytope::from_ints(&[&[2, 2], &[3, 2], &[2, 3], &[3, 3]]).unwrap();
        assert!(sq.intersect(&far).is_none());
        let turned = Polytope::construct(&[
            vec![q(1, 2), q(-1, 2)],
            vec![q(3, 2), q(1, 2)],
            vec![q(1, 2), q(3, 2)],
            vec![q(-1, 2), q(1, 2)],
        ])
        .unwrap();
        // the square is inscribed in this diamond, so the intersection is the square itself
        assert_eq!(sq.intersect(&turned).unwrap(), sq);
        let small = Polytope::construct(&[
            vec![q(1, 2), q(-1, 4)],
            vec![q(5, 4), q(1, 2)],
            vec![q(1, 2), q(5, 4)],
            vec![q(-1, 4), q(1, 2)],
        ])
        .unwrap();
        assert_eq!(sq.intersect(&small).unwrap().vertices().len(), 8);
    }

    #[test]
    fn union_convexity() {
        let sq = unit_square();
        let shifted = Polytope::construct(&[
            vec![q(1, 2), qi(0)],
            vec![q(3, 2), qi(0)],
            vec![q(1, 2), qi(1)],
            vec![q(3, 2), qi(1)],
        ])
        .unwrap();
        assert!(sq.is_union_convex(&shifted));
        let far = Polytope::from_ints(&[&[2, 2], &[3, 2], &[2, 3], &[3, 3]]).unwrap();
        assert!(!sq.is_union_convex(&far));
        // two triangles sharing their long edge form a square
        let up = Polytope::from_ints(&[&[0, 0], &[2, 0], &[1, 1]]).unwrap();
        let down = Polytope::from_ints(&[&[0, 0], &[2, 0], &[1, -1]]).unwrap();
        assert!(up.is_union_convex(&down));
        let l_shape = Polytope::from_ints(&[&[1, 0], &[2, 0], &[1, 2], &[2, 2]]).unwrap();
        assert!(!sq.is_union_convex(&l_shape));
    }

    #[test]
    fn volumes_and_distances() {
        let sq = unit_square();
        assert_eq!(sq.volume(), qi(1));
        assert_eq!(Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap().volume(), q(1, 2));
        assert_eq!(sq.hausdorff_distance_sq(&sq), qi(0));
        let big = Polytope::from_ints(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]).unwrap();
        assert_eq!(sq.hausdorff_distance_sq(&big), qi(2));
        let cube = Polytope::cuboid(&qvec(&[0, 0, 0]), &qvec(&[1, 2, 3])).unwrap();
        assert_eq!(cube.volume(), qi(6));
        let flat = Polytope::from_ints(&[&[0, 0, 0], &[3, 0, 4], &[0, 1, 0]]).unwrap();
        assert_eq!(flat.relative_volume_sq(), q(25, 4));
    }

    #[test]
    fn face_lattice_of_cube() {
        let cube = Polytope::cuboid(&qvec(&[0, 0, 0]), &qvec(&[1, 1, 1])).unwrap();
        let faces = cube.faces();
        let count = |d| faces.iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2), count(3)), (8, 12, 6, 1));
        assert!(faces.iter().filter(|f| f.dim == 0).all(|f| f.cone_rays.len() == 3));
    }

    #[test]
    fn json_round_trip() {
        let tri = Polytope::construct(&[vec![q(1, 3), qi(0)], qvec(&[1, 0]), qvec(&[0, 1])]).unwrap();
        let s = serde_json::to_string(&tri).unwrap();
        assert!(s.contains("\"1/3\""));
        let back: Polytope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, tri);
        let parsed: Polytope = serde_json::from_str(r#"{"dim":2,"vertices":[[0,0],[1,"1/2"],[0.5,1]]}"#).unwrap();
        assert_eq!(parsed.vertices().len(), 3);
    }
}
