//! Exact convex hulls of rational point sets in dimension at most 3.
//!
//! Points are first reduced to their affine hull. The full-dimensional hull is
//! then computed there on integer coordinates (scaled by the common
//! denominator) and lifted back. Every predicate is an exact integer sign.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::linalg::{nullspace, project_onto_span, rank, rref};
use crate::num::{dot, integerize, lex_cmp, primitive, sub, QVec, Q};

/// Halfspace `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    pub normal: QVec,
    pub offset: Q,
}

impl Halfspace {
    pub fn slack(&self, x: &[Q]) -> Q {
        &self.offset - dot(&self.normal, x)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        !self.slack(x).is_negative()
    }
}

#[derive(Clone, Debug)]
pub struct Hull {
    /// Extreme points, lexicographically sorted.
    pub vertices: Vec<QVec>,
    /// Facets relative to the affine hull; normals lie in its direction space.
    pub facets: Vec<Halfspace>,
    /// Affine hull as `normal · x = offset`.
    pub equalities: Vec<Halfspace>,
    pub dim: usize,
}

/// Computes the hull of a non-empty point set of uniform dimension `<= 3`.
pub fn hull(points: &[QVec]) -> Hull {
    let mut pts: Vec<QVec> = points.to_vec();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    let d = pts[0].len();
    let p0 = pts[0].clone();

    let diffs: Vec<QVec> = pts.iter().skip(1).map(|p| sub(p, &p0)).collect();
    let (basis, pivots) = if diffs.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        rref(&diffs, d)
    };
    let k = pivots.len();

    let equalities: Vec<Halfspace> = if k == 0 {
        (0..d)
            .map(|i| {
                let mut e = vec![Q::zero(); d];
                e[i] = Q::from_integer(1.into());
                let off = p0[i].clone();
                Halfspace { normal: e, offset: off }
            })
            .collect()
    } else {
        nullspace(&basis, d)
            .into_iter()
            .map(|e| {
                let off = dot(&e, &p0);
                Halfspace { normal: e, offset: off }
            })
            .collect()
    };

    if k == 0 {
        return Hull { vertices: vec![p0], facets: Vec::new(), equalities, dim: 0 };
    }

    // Coordinates at the pivot columns determine a point of the affine hull uniquely.
    let proj: Vec<QVec> = pts.iter().map(|p| pivots.iter().map(|&c| p[c].clone()).collect()).collect();
    let (vert_idx, facets_low) = full_hull(&proj);

    let facets = facets_low
        .into_iter()
        .map(|(c, b)| {
            let mut lifted = vec![Q::zero(); d];
            for (ci, &p) in c.iter().zip(&pivots) {
                lifted[p] = ci.clone();
            }
            if k == d {
                return Halfspace { normal: lifted, offset: b };
            }
            let n = project_onto_span(&lifted, &basis);
            let off = b - dot(&lifted, &p0) + dot(&n, &p0);
            Halfspace { normal: n, offset: off }
        })
        .collect();

    let mut vertices: Vec<QVec> = vert_idx.into_iter().map(|i| pts[i].clone()).collect();
    vertices.sort_by(|a, b| lex_cmp(a, b));
    Hull { vertices, facets, equalities, dim: k }
}

/// Hull of points spanning their ambient space (dimension 1, 2 or 3).
/// Returns vertex indices and facets `(normal, offset)`.
fn full_hull(points: &[QVec]) -> (Vec<usize>, Vec<(QVec, Q)>) {
    let k = points[0].len();
    let ints = integerize(points);
    let scale = crate::num::common_denominator(points.iter().flatten());
    let to_q = |n: &[BigInt], off: &BigInt| -> (QVec, Q) {
        (
            n.iter().map(|x| Q::from_integer(x.clone())).collect(),
            Q::new(off.clone(), scale.clone()),
        )
    };
    match k {
        1 => {
            let (mut lo, mut hi) = (0, 0);
            for (i, p) in ints.iter().enumerate() {
                if p[0] < ints[lo][0] {
                    lo = i;
                }
                if p[0] > ints[hi][0] {
                    hi = i;
                }
            }
            let f = vec![
                to_q(&[BigInt::from(-1)], &-ints[lo][0].clone()),
                to_q(&[BigInt::from(1)], &ints[hi][0]),
            ];
            (vec![lo, hi], f)
        }
        2 => {
            let cyc = hull2(&ints);
            let m = cyc.len();
            let facets = (0..m)
                .map(|i| {
                    let a = &ints[cyc[i]];
                    let b = &ints[cyc[(i + 1) % m]];
                    let n = primitive(&[&b[1] - &a[1], &a[0] - &b[0]]);
                    let off = &n[0] * &a[0] + &n[1] * &a[1];
                    to_q(&n, &off)
                })
                .collect();
            (cyc, facets)
        }
        3 => {
            let (verts, planes) = hull3(&ints);
            let facets = planes.iter().map(|(n, off)| to_q(n, off)).collect();
            (verts, facets)
        }
        _ => unreachable!("hull dimension {k}"),
    }
}

fn cross2(o: &[BigInt], a: &[BigInt], b: &[BigInt]) -> BigInt {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Andrew's monotone chain; returns indices in counter-clockwise order, strictly convex.
pub(crate) fn hull2(pts: &[Vec<BigInt>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i].cmp(&pts[j]));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && !cross2(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]).is_positive()
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && !cross2(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]).is_positive()
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn vsub3(a: &[BigInt], b: &[BigInt]) -> [BigInt; 3] {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross3i(a: &[BigInt; 3], b: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot3i(a: &[BigInt; 3], b: &[BigInt]) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

struct Tri {
    v: [usize; 3],
    n: [BigInt; 3],
    off: BigInt,
}

impl Tri {
    fn new(pts: &[Vec<BigInt>], v: [usize; 3]) -> Self {
        let n = cross3i(&vsub3(&pts[v[1]], &pts[v[0]]), &vsub3(&pts[v[2]], &pts[v[0]]));
        let off = dot3i(&n, &pts[v[0]]);
        Tri { v, n, off }
    }

    fn side(&self, p: &[BigInt]) -> BigInt {
        dot3i(&self.n, p) - &self.off
    }
}

/// Beneath-beyond insertion with strict visibility, followed by merging of
/// coplanar triangles into facets and an exact extreme-point test.
pub(crate) fn hull3(pts: &[Vec<BigInt>]) -> (Vec<usize>, Vec<(Vec<BigInt>, BigInt)>) {
    let n = pts.len();
    let i0 = 0;
    let i1 = (1..n).find(|&i| pts[i] != pts[i0]).expect("spanning set");
    let d01 = vsub3(&pts[i1], &pts[i0]);
    let i2 = (0..n)
        .find(|&i| cross3i(&d01, &vsub3(&pts[i], &pts[i0])).iter().any(|x| !x.is_zero()))
        .expect("spanning set");
    let base = Tri::new(pts, [i0, i1, i2]);
    let i3 = (0..n).find(|&i| !base.side(&pts[i]).is_zero()).expect("spanning set");

    let mut faces: Vec<Tri> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let other = [i0, i1, i2, i3].into_iter().find(|x| !tri.contains(x)).unwrap();
        let t = Tri::new(pts, tri);
        if t.side(&pts[other]).is_positive() {
            faces.push(Tri::new(pts, [tri[0], tri[2], tri[1]]));
        } else {
            faces.push(t);
        }
    }

    for p in 0..n {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.side(&pts[p]).is_positive()).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for e in 0..3 {
                edges.insert((f.v[e], f.v[(e + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        let mut kept: Vec<Tri> = faces
            .into_iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| f)
            .collect();
        for (a, b) in horizon {
            kept.push(Tri::new(pts, [a, b, p]));
        }
        faces = kept;
    }

    let mut planes: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
    let mut seen: HashMap<Vec<BigInt>, ()> = HashMap::new();
    for f in &faces {
        if f.n.iter().all(Zero::is_zero) {
            continue;
        }
        let g = f.n[0].gcd(&f.n[1]).gcd(&f.n[2]);
        let mut key: Vec<BigInt> = f.n.iter().map(|x| x / &g).collect();
        let off = &f.off / &g;
        key.push(off.clone());
        if seen.insert(key.clone(), ()).is_none() {
            key.pop();
            planes.push((key, off));
        }
    }
    debug_assert!(planes
        .iter()
        .all(|(nrm, off)| pts.iter().all(|p| &(&nrm[0] * &p[0] + &nrm[1] * &p[1] + &nrm[2] * &p[2]) <= off)));

    let mut cand: BTreeSet<usize> = BTreeSet::new();
    for f in &faces {
        cand.extend(f.v);
    }
    let verts = cand
        .into_iter()
        .filter(|&i| {
            let active: Vec<QVec> = planes
                .iter()
                .filter(|(nrm, off)| &(&nrm[0] * &pts[i][0] + &nrm[1] * &pts[i][1] + &nrm[2] * &pts[i][2]) == off)
                .map(|(nrm, _)| nrm.iter().map(|x| Q::from_integer(x.clone())).collect())
                .collect();
            rank(&active) == 3
        })
        .collect();
    (verts, planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qi, qvec};

    /// Oracle: a point is extreme iff it is not a convex combination of the
    /// others; in the plane this is checked through every triangle and segment.
    fn brute_extreme_2d(pts: &[QVec]) -> Vec<QVec> {
        let inside_tri = |p: &QVec, a: &QVec, b: &QVec, c: &QVec| {
            let s = |u: &QVec, v: &QVec, w: &QVec| {
                (&v[0] - &u[0]) * (&w[1] - &u[1]) - (&v[1] - &u[1]) * (&w[0] - &u[0])
            };
            let (d1, d2, d3) = (s(a, b, p), s(b, c, p), s(c, a, p));
            let neg = d1.is_negative() || d2.is_negative() || d3.is_negative();
            let pos = d1.is_positive() || d2.is_positive() || d3.is_positive();
            !(neg && pos)
        };
        let mut out = Vec::new();
        'outer: for (i, p) in pts.iter().enumerate() {
            let others: Vec<&QVec> = pts.iter().enumerate().filter(|(j, x)| *j != i && *x != p).map(|(_, x)| x).collect();
            for a in 0..others.len() {
                for b in a + 1..others.len() {
                    let (u, w) = (others[a], others[b]);
                    let col = (&w[0] - &u[0]) * (&p[1] - &u[1]) - (&w[1] - &u[1]) * (&p[0] - &u[0]);
                    let between = (&p[0] - &u[0]) * (&p[0] - &w[0]) + (&p[1] - &u[1]) * (&p[1] - &w[1]);
                    if col.is_zero() && !between.is_positive() {
                        continue 'outer;
                    }
                    for c in b + 1..others.len() {
                        if inside_tri(p, u, w, others[c]) {
                            continue 'outer;
                        }
                    }
                }
            }
            out.push(p.clone());
        }
        out.sort_by(|a, b| lex_cmp(a, b));
        out.dedup();
        out
    }

    #[test]
    fn interior_point_is_dropped() {
        let pts = vec![qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 1]), vec![q(1, 2), q(1, 4)]];
        let h = hull(&pts);
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices, brute_extreme_2d(&pts));
        assert_eq!(h.vertices.len(), 3);
        assert_eq!(h.facets.len(), 3);
    }

    #[test]
    fn collinear_points_in_plane() {
        let pts = vec![qvec(&[0, 0]), qvec(&[1, 1]), qvec(&[2, 2]), qvec(&[3, 3])];
        let h = hull(&pts);
        assert_eq!(h.dim, 1);
        assert_eq!(h.vertices, vec![qvec(&[0, 0]), qvec(&[3, 3])]);
        assert_eq!(h.equalities.len(), 1);
        for f in &h.facets {
            // normals lie along the segment
            assert!((&f.normal[0] - &f.normal[1]).is_zero());
        }
    }

    #[test]
    fn cube_with_face_and_edge_points() {
        let mut pts = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    pts.push(qvec(&[x, y, z]));
                }
            }
        }
        let h = hull(&pts);
        assert_eq!(h.dim, 3);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
        for f in &h.facets {
            assert!(pts.iter().all(|p| f.contains(p)));
        }
    }

    #[test]
    fn flat_polygon_in_space() {
        let pts = vec![qvec(&[0, 0, 1]), qvec(&[1, 0, 1]), qvec(&[0, 1, 1]), qvec(&[1, 1, 1]), vec![q(1, 2), q(1, 2), qi(1)]];
        let h = hull(&pts);
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.equalities.len(), 1);
        for f in &h.facets {
            assert!(f.normal[2].is_zero());
            assert!(pts.iter().all(|p| f.contains(p)));
        }
    }

    #[test]
    fn single_point() {
        let h = hull(&[qvec(&[1, 2, 3])]);
        assert_eq!(h.dim, 0);
        assert_eq!(h.equalities.len(), 3);
    }
}
