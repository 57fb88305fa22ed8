//! Fixed quadrature rules on segments, triangles, circular arcs and spherical triangles.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::linalg::{addf, cross3, dotf, normf, scalef, subf, unitf};

/// Resolution knobs shared by all product rules.
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    /// Gauss–Legendre nodes per panel.
    pub gl_order: usize,
    /// Panels per segment or arc.
    pub panels: usize,
    /// Uniform 4-way subdivision depth for (spherical) triangles.
    pub depth: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { gl_order: 8, panels: 4, depth: 4 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn cached_gl(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (0..=32).map(|k| if k == 0 { (vec![], vec![]) } else { gauss_legendre(k) }).collect());
    &table[n.min(32)]
}

/// Composite Gauss–Legendre rule for `∫_a^b f`.
pub fn integrate_interval(a: f64, b: f64, cfg: &QuadConfig, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = cached_gl(cfg.gl_order);
    let h = (b - a) / cfg.panels as f64;
    let mut s = 0.0;
    for p in 0..cfg.panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    0.5 * h * s
}

/// `∫_{[a,b]} f dH^1` for a segment in any dimension.
pub fn integrate_segment(a: &[f64], b: &[f64], cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let d = subf(b, a);
    let len = normf(&d);
    len * integrate_interval(0.0, 1.0, cfg, |t| f(&addf(a, &scalef(&d, t))))
}

/// Seven-point degree-5 rule on the reference triangle: barycentrics and weights summing to 1.
pub fn triangle_rule() -> &'static [([f64; 3], f64); 7] {
    static RULE: OnceLock<[([f64; 3], f64); 7]> = OnceLock::new();
    RULE.get_or_init(|| {
        let s15 = 15f64.sqrt();
        let (a1, b1, w1) = ((6.0 - s15) / 21.0, (9.0 + 2.0 * s15) / 21.0, (155.0 - s15) / 1200.0);
        let (a2, b2, w2) = ((6.0 + s15) / 21.0, (9.0 - 2.0 * s15) / 21.0, (155.0 + s15) / 1200.0);
        [
            ([1.0 / 3.0; 3], 9.0 / 40.0),
            ([a1, a1, b1], w1),
            ([a1, b1, a1], w1),
            ([b1, a1, a1], w1),
            ([a2, a2, b2], w2),
            ([a2, b2, a2], w2),
            ([b2, a2, a2], w2),
        ]
    })
}

fn bary(a: &[f64], b: &[f64], c: &[f64], l: &[f64; 3]) -> Vec<f64> {
    (0..a.len()).map(|i| l[0] * a[i] + l[1] * b[i] + l[2] * c[i]).collect()
}

fn mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn subdivide(tris: Vec<[Vec<f64>; 3]>, depth: usize) -> Vec<[Vec<f64>; 3]> {
    let mut tris = tris;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(4 * tris.len());
        for [a, b, c] in tris {
            let (ab, bc, ca) = (mid(&a, &b), mid(&b, &c), mid(&c, &a));
            next.push([a, ab.clone(), ca.clone()]);
            next.push([ab.clone(), b, bc.clone()]);
            next.push([ca.clone(), bc.clone(), c]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris
}

fn tri_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let (u, v) = (subf(b, a), subf(c, a));
    let (uu, vv, uv) = (dotf(&u, &u), dotf(&v, &v), dotf(&u, &v));
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// `∫_T f dH^2` over a flat triangle in the plane or in space.
pub fn integrate_triangle(a: &[f64], b: &[f64], c: &[f64], cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut s = 0.0;
    for [p, q, r] in subdivide(vec![[a.to_vec(), b.to_vec(), c.to_vec()]], cfg.depth) {
        let area = tri_area(&p, &q, &r);
        for (l, w) in triangle_rule() {
            s += area * w * f(&bary(&p, &q, &r, l));
        }
    }
    s
}

/// `∫ f ds` along the shorter great-circle arc from unit `u` to unit `v` (angle < π).
pub fn integrate_arc(u: &[f64], v: &[f64], cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let c = dotf(u, v).clamp(-1.0, 1.0);
    let w = unitf(&subf(v, &scalef(u, c)));
    let theta = c.acos();
    integrate_interval(0.0, theta, cfg, |phi| f(&addf(&scalef(u, phi.cos()), &scalef(&w, phi.sin()))))
}

/// `∫ f dσ` over the spherical triangle with unit vertices `a, b, c` (contained in an open hemisphere).
/// The flat triangle is projected radially; the surface element is `h/|x|^3 dA`.
pub fn integrate_sph_triangle(a: &[f64], b: &[f64], c: &[f64], cfg: &QuadConfig, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let n = cross3(&subf(b, a), &subf(c, a));
    let nn = normf(&n);
    if nn == 0.0 {
        return 0.0;
    }
    let h = dotf(&n, a).abs() / nn;
    let mut s = 0.0;
    for [p, q, r] in subdivide(vec![[a.to_vec(), b.to_vec(), c.to_vec()]], cfg.depth) {
        let area = tri_area(&p, &q, &r);
        for (l, w) in triangle_rule() {
            let x = bary(&p, &q, &r, l);
            let rx = normf(&x);
            s += area * w * h / (rx * rx * rx) * f(&scalef(&x, 1.0 / rx));
        }
    }
    s
}

/// Exact solid angle of a spherical triangle (Van Oosterom–Strackee).
pub fn solid_angle(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let num = dotf(a, &cross3(b, c));
    let den = 1.0 + dotf(a, b) + dotf(b, c) + dotf(c, a);
    2.0 * num.abs().atan2(den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let cfg = QuadConfig { gl_order: 5, panels: 1, depth: 0 };
        // exact up to degree 9
        let v = integrate_interval(-1.0, 2.0, &cfg, |x| x.powi(9) - 3.0 * x.powi(4));
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-11);
        let (_, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let cfg = QuadConfig { gl_order: 4, panels: 1, depth: 0 };
        // ∫_{unit simplex} x^2 y^3 = 2! 3! / 7! = 12/5040
        let v = integrate_triangle(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &cfg, |p| p[0].powi(2) * p[1].powi(3));
        assert!((v - 12.0 / 5040.0).abs() < 1e-15);
    }

    #[test]
    fn octant_area_and_moment() {
        let cfg = QuadConfig::default();
        let (a, b, c) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        let area = integrate_sph_triangle(&a, &b, &c, &cfg, |_| 1.0);
        assert!((area - PI / 2.0).abs() < 1e-8, "{area}");
        assert!((solid_angle(&a, &b, &c) - PI / 2.0).abs() < 1e-14);
        // ∫_{octant} z dσ = π/4
        let m = integrate_sph_triangle(&a, &b, &c, &cfg, |x| x[2]);
        assert!((m - PI / 4.0).abs() < 1e-8, "{m}");
    }

    #[test]
    fn arc_length() {
        let cfg = QuadConfig::default();
        let s = integrate_arc(&[1.0, 0.0], &[0.0, 1.0], &cfg, |x| x[0] * x[0]);
        assert!((s - PI / 4.0).abs() < 1e-14);
    }
}
