//! Seeded random cases. Every case draws from its own ChaCha stream, so a
//! case depends only on `(seed, index)` and not on the order of evaluation.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::epi::PLConvexFunction;
use crate::hull::Halfspace;
use crate::measures::{Atom, SphereMeasure};
use crate::num::{dot, q, QVec, Q};
use crate::polytope::Polytope;

/// Generator for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard Gaussian coordinates rounded to multiples of 1/8.
pub fn gaussian_point(rng: &mut impl Rng, dim: usize) -> QVec {
    (0..dim)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            q((x * 8.0).round() as i64, 8)
        })
        .collect()
}

/// Hull of `k` Gaussian points, redrawn until full-dimensional.
pub fn random_polytope(rng: &mut impl Rng, dim: usize, k: usize) -> Polytope {
    loop {
        let pts: Vec<QVec> = (0..k.max(dim + 1)).map(|_| gaussian_point(rng, dim)).collect();
        let p = Polytope::construct(&pts).expect("non-empty");
        if p.is_full_dim() {
            return p;
        }
    }
}

/// Body with `6..=10` (plane) or `8..=12` (space) random points.
pub fn random_body(rng: &mut impl Rng, dim: usize) -> Polytope {
    let k = if dim <= 2 { rng.random_range(6..=10) } else { rng.random_range(8..=12) };
    random_polytope(rng, dim, k)
}

/// `⌊P⌋` for a random body `P ⊂ R^{n+1}`.
pub fn random_pl_function(rng: &mut impl Rng, n: usize) -> PLConvexFunction {
    PLConvexFunction::lower_envelope(&random_body(rng, n + 1))
}

/// Body `P` and the two overlapping pieces `P ∩ {w·x <= c₂}` and `P ∩ {w·x >= c₁}`, `c₁ < c₂`.
pub struct SplitPair {
    pub body: Polytope,
    pub lower: Polytope,
    pub upper: Polytope,
}

pub fn split_pair(rng: &mut impl Rng, dim: usize) -> SplitPair {
    let body = random_body(rng, dim);
    loop {
        let w = gaussian_point(rng, dim);
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        let vals: Vec<Q> = body.vertices().iter().map(|v| dot(&w, v)).collect();
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        let a = rng.random_range(1..=4);
        let b = rng.random_range(a + 1..=7);
        let c1 = &lo + (&hi - &lo) * q(a, 8);
        let c2 = &lo + (&hi - &lo) * q(b, 8);
        let cut = |normal: QVec, offset: Q| Halfspace { normal, offset };
        let mut hs = body.halfspaces();
        hs.push(cut(w.clone(), c2));
        let lower = Polytope::from_halfspaces(dim, &hs).expect("slab meets the body");
        let mut hs = body.halfspaces();
        hs.push(cut(w.iter().map(|x| -x).collect(), -c1));
        let upper = Polytope::from_halfspaces(dim, &hs).expect("slab meets the body");
        return SplitPair { body, lower, upper };
    }
}

/// Uniform random unit vector.
pub fn unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Random balanced atoms: random normals and weights in `[1/2, 2]`, made
/// balanced by the minimal ℓ² weight change; redrawn if a weight turns non-positive.
pub fn random_balanced_measure(rng: &mut impl Rng, dim: usize, atoms: usize) -> SphereMeasure {
    loop {
        let mut a: Vec<Atom> = (0..atoms)
            .map(|_| Atom { n: unit_vector(rng, dim), w: rng.random_range(0.5..2.0) })
            .collect();
        if crate::goodey_weil::balance(&mut a).is_ok() && a.iter().all(|x| x.w > 0.05) {
            return SphereMeasure { dim, atoms: a, signed: false };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = random_body(&mut case_rng(7, 3), 3);
        let b = random_body(&mut case_rng(7, 3), 3);
        let c = random_body(&mut case_rng(7, 4), 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_pairs_cover_the_body() {
        let mut rng = case_rng(1, 0);
        for _ in 0..5 {
            let s = split_pair(&mut rng, 2);
            assert_eq!(s.lower.hull_with(&s.upper), s.body);
            assert!(s.lower.is_union_convex(&s.upper));
        }
    }

    #[test]
    fn balanced_measures_close() {
        let mut rng = case_rng(2, 0);
        let m = random_balanced_measure(&mut rng, 3, 12);
        assert!(m.closedness_residual() < 1e-12);
    }
}
