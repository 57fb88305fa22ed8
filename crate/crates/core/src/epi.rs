//! Piecewise-linear convex functions with compact polytopal domain, and the
//! dictionary between such functions and convex bodies one dimension up.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hull::Halfspace;
use crate::linalg::{project_onto_span, rref, solve};
use crate::num::{self, dot, lex_cmp, qi, sub, QVec, Q};
use crate::polytope::Polytope;

/// Affine function `a · x + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub a: QVec,
    pub b: Q,
}

impl Piece {
    pub fn eval(&self, x: &[Q]) -> Q {
        dot(&self.a, x) + &self.b
    }

    fn cmp_lex(&self, other: &Piece) -> Ordering {
        lex_cmp(&self.a, &other.a).then_with(|| self.b.cmp(&other.b))
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub polytope: Polytope,
    /// Index of the piece active on this cell.
    pub piece: usize,
}

/// `u(x) = max_k (a_k · x + b_k)` on a compact domain, `+∞` elsewhere.
#[derive(Clone, Debug)]
pub struct PLConvexFunction {
    n: usize,
    domain: Polytope,
    pieces: Vec<Piece>,
    cells: Vec<Cell>,
}

/// Finite convex function `max_k (a_k · y + b_k)` on all of `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePLConvexFunction {
    pub n: usize,
    pub pieces: Vec<Piece>,
}

impl PLConvexFunction {
    /// Builds the canonical form: gradients projected onto the domain's
    /// direction space, dominated pieces removed, cells recomputed.
    pub fn new(domain: Polytope, pieces: Vec<Piece>) -> Result<Self> {
        let n = domain.ambient_dim();
        if pieces.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = pieces.iter().find(|p| p.a.len() != n) {
            return Err(Error::Dimension { expected: n, got: p.a.len() });
        }
        let p0 = domain.vertices()[0].clone();
        let basis: Vec<QVec> = if domain.is_full_dim() {
            Vec::new()
        } else {
            let diffs: Vec<QVec> = domain.vertices().iter().skip(1).map(|v| sub(v, &p0)).collect();
            if diffs.is_empty() {
                Vec::new()
            } else {
                rref(&diffs, n).0
            }
        };
        let mut normed: Vec<Piece> = pieces
            .into_iter()
            .map(|p| {
                if domain.is_full_dim() {
                    return p;
                }
                let a = project_onto_span(&p.a, &basis);
                let b = &p.b + dot(&sub(&p.a, &a), &p0);
                Piece { a, b }
            })
            .collect();
        normed.sort_by(|x, y| x.cmp_lex(y));
        // equal gradients: only the largest offset can be active
        let mut uniq: Vec<Piece> = Vec::new();
        for p in normed {
            match uniq.last_mut() {
                Some(last) if last.a == p.a => *last = p,
                _ => uniq.push(p),
            }
        }

        let dom_hs = domain.halfspaces();
        let k_dim = domain.intrinsic_dim();
        let mut cells: Vec<(Polytope, Piece)> = Vec::new();
        for (k, pk) in uniq.iter().enumerate() {
            let mut hs = dom_hs.clone();
            for (j, pj) in uniq.iter().enumerate() {
                if j != k {
                    hs.push(Halfspace { normal: sub(&pj.a, &pk.a), offset: &pk.b - &pj.b });
                }
            }
            if let Some(c) = Polytope::from_halfspaces(n, &hs) {
                if c.intrinsic_dim() == k_dim {
                    cells.push((c, pk.clone()));
                }
            }
        }
        let mut pieces: Vec<Piece> = cells.iter().map(|(_, p)| p.clone()).collect();
        pieces.sort_by(|x, y| x.cmp_lex(y));
        let mut cells: Vec<Cell> = cells
            .into_iter()
            .map(|(c, p)| Cell { piece: pieces.iter().position(|q| *q == p).unwrap(), polytope: c })
            .collect();
        cells.sort_by(|x, y| lex_cmp(&x.polytope.vertices()[0], &y.polytope.vertices()[0]));
        Ok(PLConvexFunction { n, domain, pieces, cells })
    }

    /// Indicator function of a polytope.
    pub fn indicator(domain: Polytope) -> Self {
        let n = domain.ambient_dim();
        Self::new(domain, vec![Piece { a: vec![Q::zero(); n], b: Q::zero() }]).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// `None` stands for `+∞`.
    pub fn evaluate(&self, x: &[Q]) -> Option<Q> {
        if !self.domain.contains(x) {
            return None;
        }
        self.pieces.iter().map(|p| p.eval(x)).max()
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> f64 {
        let xq: QVec = x.iter().map(|&c| num::from_f64(c).expect("finite")).collect();
        match self.evaluate(&xq) {
            Some(v) => num::to_f64(&v),
            None => f64::INFINITY,
        }
    }

    /// Every vertex of every cell, deduplicated and sorted.
    pub fn complex_vertices(&self) -> Vec<QVec> {
        let mut vs: Vec<QVec> = self.cells.iter().flat_map(|c| c.polytope.vertices().iter().cloned()).collect();
        vs.sort_by(|a, b| lex_cmp(a, b));
        vs.dedup();
        vs
    }

    /// `M_u`, the maximum over the domain.
    pub fn max_value(&self) -> Q {
        self.domain.vertices().iter().map(|v| self.evaluate(v).unwrap()).max().unwrap()
    }

    pub fn min_value(&self) -> Q {
        self.complex_vertices().iter().map(|v| self.evaluate(v).unwrap()).min().unwrap()
    }

    pub fn gradient_cells(&self) -> Vec<(Polytope, QVec)> {
        self.cells.iter().map(|c| (c.polytope.clone(), self.pieces[c.piece].a.clone())).collect()
    }

    pub fn sublevel_set(&self, t: &Q) -> Option<Polytope> {
        let mut hs = self.domain.halfspaces();
        for p in &self.pieces {
            hs.push(Halfspace { normal: p.a.clone(), offset: t - &p.b });
        }
        Polytope::from_halfspaces(self.n, &hs)
    }

    /// Lower boundary of a body: `x ↦ min { t : (x, t) ∈ K }`.
    pub fn lower_envelope(k: &Polytope) -> Self {
        let d = k.ambient_dim();
        assert!(d >= 2, "lower envelope needs a body in dimension >= 2");
        let n = d - 1;
        let proj: Vec<QVec> = k.vertices().iter().map(|v| v[..n].to_vec()).collect();
        let domain = Polytope::construct(&proj).expect("non-empty");
        let pieces = k
            .halfspaces()
            .into_iter()
            .filter(|h| h.normal[n].is_negative())
            .map(|h| {
                let c = h.normal[n].clone();
                Piece { a: h.normal[..n].iter().map(|w| -(w / &c)).collect(), b: &h.offset / &c }
            })
            .collect();
        Self::new(domain, pieces).expect("bounded body has a lower boundary")
    }

    /// `K^u`: the body between the graph of `u` and its reflection about height `M_u`.
    pub fn body_of(&self) -> Polytope {
        let m2 = self.max_value() * qi(2);
        let mut pts = Vec::new();
        for v in self.complex_vertices() {
            let val = self.evaluate(&v).unwrap();
            let mut lo = v.clone();
            lo.push(val.clone());
            let mut hi = v;
            hi.push(&m2 - val);
            pts.push(lo);
            pts.push(hi);
        }
        Polytope::construct(&pts).expect("non-empty")
    }

    /// `u ∨ v`.
    pub fn pointwise_max(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, got: other.n });
        }
        let dom = self.domain.intersect(&other.domain).ok_or(Error::DomainEmpty)?;
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self::new(dom, pieces)
    }

    /// `u ∧ v`, accepted only when it is convex. The candidate is the lower
    /// envelope of the joint hull; it is compared with the true minimum at every
    /// vertex of a refinement on which both sides are affine.
    pub fn pointwise_min(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, got: other.n });
        }
        if !self.domain.is_union_convex(&other.domain) {
            return Err(Error::NotConvex);
        }
        let w = Self::lower_envelope(&self.body_of().hull_with(&other.body_of()));
        let truth = |x: &QVec| match (self.evaluate(x), other.evaluate(x)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        for x in refinement_vertices(&[self, other, &w]) {
            if w.evaluate(&x) != truth(&x) {
                return Err(Error::NotConvex);
            }
        }
        Ok(w)
    }

    /// `t ⊡ u = t u(·/t)`.
    pub fn epi_scale(&self, t: &Q) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let pieces = self.pieces.iter().map(|p| Piece { a: p.a.clone(), b: &p.b * t }).collect();
        Self::new(self.domain.scale(t), pieces)
    }

    /// `u(· − x0) + c`.
    pub fn epi_translate(&self, x0: &[Q], c: &Q) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { a: p.a.clone(), b: &p.b - dot(&p.a, x0) + c })
            .collect();
        Self::new(self.domain.translate(x0), pieces).expect("translation preserves validity")
    }

    /// `u*(y) = max_v (x_v · y − u(x_v))` over the exposed vertices of the graph.
    pub fn fenchel_conjugate(&self) -> FinitePLConvexFunction {
        let lifted: Vec<QVec> = self
            .complex_vertices()
            .into_iter()
            .map(|v| {
                let mut p = v.clone();
                p.push(self.evaluate(&v).unwrap());
                p
            })
            .collect();
        let n = self.n;
        let pieces: Vec<Piece> = if self.domain.intrinsic_dim() == 0 {
            lifted.iter().map(|p| Piece { a: p[..n].to_vec(), b: -p[n].clone() }).collect()
        } else {
            let h = Polytope::construct(&lifted).expect("non-empty");
            let hs = h.halfspaces();
            h.vertices()
                .iter()
                .filter(|p| {
                    hs.iter().any(|f| f.normal[n].is_negative() && f.slack(p).is_zero())
                })
                .map(|p| Piece { a: p[..n].to_vec(), b: -p[n].clone() })
                .collect()
        };
        FinitePLConvexFunction::new(n, pieces)
    }

    /// Exact equality of canonical forms.
    pub fn canonical_eq(&self, other: &Self) -> bool {
        self.n == other.n && self.domain == other.domain && self.pieces == other.pieces
    }

    /// Diagnostic epi-distance: weighted Hausdorff distances of sublevel sets on a fixed grid.
    pub fn epi_distance(&self, other: &Self) -> f64 {
        let m = self.min_value().min(other.min_value());
        let mut total = 0.0;
        for k in 0..EPI_LEVELS {
            let t = &m + Q::new(8.into(), num_traits::pow(num_bigint::BigInt::from(2), k));
            let rho = match (self.sublevel_set(&t), other.sublevel_set(&t)) {
                (None, None) => 0.0,
                (Some(a), Some(b)) => a.hausdorff_distance(&b).min(1.0),
                _ => 1.0,
            };
            total += rho / f64::powi(2.0, k as i32);
        }
        total
    }
}

/// Number of levels `t_k = min + 8·2^{-k}` used by [`PLConvexFunction::epi_distance`].
pub const EPI_LEVELS: usize = 32;

impl FinitePLConvexFunction {
    pub fn new(n: usize, mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by(|x, y| x.cmp_lex(y));
        pieces.dedup();
        FinitePLConvexFunction { n, pieces }
    }

    pub fn evaluate(&self, y: &[Q]) -> Q {
        self.pieces.iter().map(|p| p.eval(y)).max().unwrap()
    }

    pub fn evaluate_f64(&self, y: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.a.iter().zip(y).map(|(a, yi)| num::to_f64(a) * yi).sum::<f64>() + num::to_f64(&p.b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Conjugate, as a function with compact domain `conv{a_k}`.
    pub fn conjugate(&self) -> PLConvexFunction {
        let pts: Vec<QVec> = self
            .pieces
            .iter()
            .map(|p| {
                let mut v = p.a.clone();
                v.push(-p.b.clone());
                v
            })
            .collect();
        if self.n == 0 {
            unreachable!("dimension zero");
        }
        PLConvexFunction::lower_envelope(&Polytope::construct(&pts).expect("non-empty"))
    }

    /// Slopes and breakpoints of the upper envelope for `n = 1`:
    /// returns the active pieces sorted by slope and the breakpoints between them.
    pub fn breakpoints_1d(&self) -> (Vec<Piece>, Vec<Q>) {
        assert_eq!(self.n, 1);
        let mut ps = self.pieces.clone();
        ps.sort_by(|x, y| x.a[0].cmp(&y.a[0]).then_with(|| x.b.cmp(&y.b)));
        let mut stack: Vec<Piece> = Vec::new();
        for p in ps {
            if let Some(last) = stack.last() {
                if last.a[0] == p.a[0] {
                    stack.pop();
                }
            }
            while stack.len() >= 2 {
                let (l1, l2) = (&stack[stack.len() - 2], &stack[stack.len() - 1]);
                // l2 is useless when p overtakes l1 no later than l2 does
                let x12 = (&l1.b - &l2.b) / (&l2.a[0] - &l1.a[0]);
                let x1p = (&l1.b - &p.b) / (&p.a[0] - &l1.a[0]);
                if x1p <= x12 {
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push(p);
        }
        let bps = stack
            .windows(2)
            .map(|w| (&w[0].b - &w[1].b) / (&w[1].a[0] - &w[0].a[0]))
            .collect();
        (stack, bps)
    }
}

/// Vertices of an arrangement refining the cells of every function together
/// with the crossing loci of their pieces, restricted to the union of domains.
fn refinement_vertices(fs: &[&PLConvexFunction]) -> Vec<QVec> {
    let n = fs[0].n;
    let mut hyper: Vec<Halfspace> = Vec::new();
    let mut push = |h: Halfspace| {
        if num::is_zero_vec(&h.normal) {
            return;
        }
        let lead = h.normal.iter().find(|x| !x.is_zero()).unwrap().clone();
        let h = Halfspace { normal: h.normal.iter().map(|x| x / &lead).collect(), offset: &h.offset / &lead };
        if !hyper.contains(&h) {
            hyper.push(h);
        }
    };
    for f in fs {
        for h in f.domain.halfspaces() {
            push(h);
        }
        for c in &f.cells {
            for h in c.polytope.halfspaces() {
                push(h);
            }
        }
    }
    let all: Vec<&Piece> = fs.iter().flat_map(|f| f.pieces.iter()).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            push(Halfspace { normal: sub(&all[i].a, &all[j].a), offset: &all[j].b - &all[i].b });
        }
    }
    let inside = |x: &QVec| fs.iter().any(|f| f.domain.contains(x));
    let mut pts: Vec<QVec> = Vec::new();
    for f in fs {
        for v in f.complex_vertices() {
            pts.push(v);
        }
    }
    let m = hyper.len();
    match n {
        1 => {
            for h in &hyper {
                pts.push(vec![&h.offset / &h.normal[0]]);
            }
        }
        2 => {
            for i in 0..m {
                for j in i + 1..m {
                    let a = vec![hyper[i].normal.clone(), hyper[j].normal.clone()];
                    if let Some(x) = solve(&a, &[hyper[i].offset.clone(), hyper[j].offset.clone()]) {
                        pts.push(x);
                    }
                }
            }
        }
        _ => unreachable!("n must be 1 or 2"),
    }
    pts.retain(|x| inside(x));
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    pts
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    #[serde(with = "num::serde_qvec_flat")]
    a: QVec,
    #[serde(with = "num::serde_q")]
    b: Q,
}

#[derive(Serialize, Deserialize)]
struct FunctionJson {
    n: usize,
    domain: Polytope,
    pieces: Vec<PieceJson>,
}

impl Serialize for PLConvexFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionJson {
            n: self.n,
            domain: self.domain.clone(),
            pieces: self.pieces.iter().map(|p| PieceJson { a: p.a.clone(), b: p.b.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PLConvexFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FunctionJson::deserialize(d)?;
        if raw.domain.ambient_dim() != raw.n {
            return Err(serde::de::Error::custom("domain dimension does not match \"n\""));
        }
        let pieces = raw.pieces.into_iter().map(|p| Piece { a: p.a, b: p.b }).collect();
        PLConvexFunction::new(raw.domain, pieces).map_err(serde::de::Error::custom)
    }
}

/// `|x|` restricted to `[-1, 1]`, used throughout tests and examples.
pub fn abs_on_interval() -> PLConvexFunction {
    let dom = Polytope::from_ints(&[&[-1], &[1]]).unwrap();
    PLConvexFunction::new(
        dom,
        vec![Piece { a: vec![qi(1)], b: Q::zero() }, Piece { a: vec![qi(-1)], b: Q::zero() }],
    )
    .unwrap()
}

pub fn interval_indicator(lo: i64, hi: i64) -> PLConvexFunction {
    PLConvexFunction::indicator(Polytope::from_ints(&[&[lo], &[hi]]).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qvec};

    #[test]
    fn lower_envelope_examples() {
        let sq = Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let u = PLConvexFunction::lower_envelope(&sq);
        assert_eq!(u.pieces(), &[Piece { a: qvec(&[0]), b: qi(0) }]);
        let vee = Polytope::from_ints(&[&[-1, 1], &[1, 1], &[0, 0]]).unwrap();
        let u = PLConvexFunction::lower_envelope(&vee);
        assert!(u.canonical_eq(&abs_on_interval()));
        // translation covariance
        let moved = PLConvexFunction::lower_envelope(&vee.translate(&vec![q(1, 2), qi(3)]));
        assert!(moved.canonical_eq(&abs_on_interval().epi_translate(&[q(1, 2)], &qi(3))));
    }

    #[test]
    fn body_of_examples() {
        let seg = interval_indicator(-1, 1).body_of();
        assert_eq!(seg, Polytope::from_ints(&[&[-1, 0], &[1, 0]]).unwrap());
        let diamond = abs_on_interval().body_of();
        assert_eq!(diamond, Polytope::from_ints(&[&[0, 0], &[-1, 1], &[1, 1], &[0, 2]]).unwrap());
        let flat = PLConvexFunction::indicator(Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()).body_of();
        assert_eq!(flat.intrinsic_dim(), 2);
        assert_eq!(flat.ambient_dim(), 3);
        for u in [abs_on_interval(), interval_indicator(0, 2)] {
            assert!(PLConvexFunction::lower_envelope(&u.body_of()).canonical_eq(&u));
        }
    }

    #[test]
    fn sublevel_examples() {
        let u = abs_on_interval();
        assert_eq!(u.sublevel_set(&q(1, 2)).unwrap(), Polytope::construct(&[vec![q(-1, 2)], vec![q(1, 2)]]).unwrap());
        assert!(u.sublevel_set(&qi(-1)).is_none());
        let z = interval_indicator(0, 1);
        assert_eq!(z.sublevel_set(&qi(0)).unwrap(), *z.domain());
    }

    #[test]
    fn lattice_examples() {
        let a = interval_indicator(-1, 0);
        let b = interval_indicator(0, 1);
        assert!(a.pointwise_min(&b).unwrap().canonical_eq(&interval_indicator(-1, 1)));
        assert_eq!(a.pointwise_min(&interval_indicator(1, 2)).unwrap_err(), Error::NotConvex);
        let m = interval_indicator(-1, 1).pointwise_max(&interval_indicator(0, 2)).unwrap();
        assert!(m.canonical_eq(&interval_indicator(0, 1)));
        assert_eq!(a.pointwise_max(&interval_indicator(1, 2)).unwrap_err(), Error::DomainEmpty);
    }

    #[test]
    fn min_rejects_nonconvex_minimum_on_convex_union() {
        // x and -x on [-1, 1]: min is concave
        let dom = Polytope::from_ints(&[&[-1], &[1]]).unwrap();
        let up = PLConvexFunction::new(dom.clone(), vec![Piece { a: qvec(&[1]), b: qi(0) }]).unwrap();
        let down = PLConvexFunction::new(dom, vec![Piece { a: qvec(&[-1]), b: qi(0) }]).unwrap();
        assert_eq!(up.pointwise_min(&down).unwrap_err(), Error::NotConvex);
        // and max is |x|
        assert!(up.pointwise_max(&down).unwrap().canonical_eq(&abs_on_interval()));
    }

    #[test]
    fn scale_and_translate() {
        let u = abs_on_interval().epi_scale(&qi(2)).unwrap();
        let expect = PLConvexFunction::new(
            Polytope::from_ints(&[&[-2], &[2]]).unwrap(),
            vec![Piece { a: qvec(&[1]), b: qi(0) }, Piece { a: qvec(&[-1]), b: qi(0) }],
        )
        .unwrap();
        assert!(u.canonical_eq(&expect));
        assert!(abs_on_interval().epi_scale(&qi(0)).is_err());
        let t = abs_on_interval().epi_translate(&[qi(3)], &q(1, 2));
        assert_eq!(t.domain(), &Polytope::from_ints(&[&[2], &[4]]).unwrap());
        assert_eq!(t.min_value(), q(1, 2));
    }

    #[test]
    fn conjugate_examples() {
        let c = abs_on_interval().fenchel_conjugate();
        for (y, e) in [(-3, 2), (-1, 0), (0, 0), (1, 0), (5, 4)] {
            assert_eq!(c.evaluate(&[qi(y)]), qi(e));
        }
        let pt = PLConvexFunction::indicator(Polytope::from_ints(&[&[0, 0]]).unwrap()).fenchel_conjugate();
        assert_eq!(pt.evaluate(&qvec(&[3, -7])), qi(0));
        let box_ = Polytope::from_ints(&[&[0, 0], &[2, 0], &[0, 1], &[2, 1]]).unwrap();
        let h = PLConvexFunction::indicator(box_.clone()).fenchel_conjugate();
        for y in [qvec(&[1, 1]), qvec(&[-1, 3]), qvec(&[0, -2])] {
            assert_eq!(h.evaluate(&y), box_.support_function(&y));
        }
    }

    #[test]
    fn gradient_cells_split_along_diagonal() {
        let dom = Polytope::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let u = PLConvexFunction::new(dom, vec![Piece { a: qvec(&[0, 0]), b: qi(0) }, Piece { a: qvec(&[1, 1]), b: qi(-1) }]).unwrap();
        let cells = u.gradient_cells();
        assert_eq!(cells.len(), 2);
        for (c, _) in &cells {
            assert_eq!(c.volume(), q(1, 2));
        }
        assert_eq!(cells.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>().len(), 2);
    }

    #[test]
    fn epi_distance_shrinks_with_shift() {
        let u = abs_on_interval();
        assert_eq!(u.epi_distance(&u), 0.0);
        let d: Vec<f64> = [q(1, 1), q(1, 2), q(1, 4)].iter().map(|c| u.epi_distance(&u.epi_translate(&[qi(0)], c))).collect();
        assert!(d[0] > d[1] && d[1] > d[2] && d[2] > 0.0, "{d:?}");
    }

    #[test]
    fn json_round_trip() {
        let u = abs_on_interval();
        let s = serde_json::to_string(&u).unwrap();
        let back: PLConvexFunction = serde_json::from_str(&s).unwrap();
        assert!(back.canonical_eq(&u));
    }
}
