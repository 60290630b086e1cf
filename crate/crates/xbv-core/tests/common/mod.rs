//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;

pub type C = Complex<f64>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Gauss-Legendre integral of `f` over `[a, b]` using `panels` panels of `deg` points.
pub fn gl<F: FnMut(f64) -> C>(a: f64, b: f64, panels: usize, deg: usize, mut f: F) -> C {
    let rule = GaussLegendre::new(deg).unwrap();
    let pairs = rule.as_node_weight_pairs();
    let mut acc = C::new(0.0, 0.0);
    let w = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + w * p as f64;
        for &(x, wt) in pairs {
            acc += f(lo + 0.5 * w * (x + 1.0)) * (0.5 * w * wt);
        }
    }
    acc
}

/// Distance from `z` to the boundary of a convex domain along direction `e`.
pub type RayFn = dyn Fn(C, C) -> f64;

/// Ray length for a disk of radius `r` centered at the origin.
pub fn disk_ray(r: f64) -> impl Fn(C, C) -> f64 {
    move |z: C, e: C| {
        let b = (z.conj() * e).re;
        -b + (b * b - z.norm_sqr() + r * r).sqrt()
    }
}

/// Ray length for the upper (`upper = true`) or lower half-disk of radius `r`.
pub fn half_disk_ray(r: f64, upper: bool) -> impl Fn(C, C) -> f64 {
    let d = disk_ray(r);
    move |z: C, e: C| {
        let mut t = d(z, e);
        let toward = if upper { e.im < 0.0 } else { e.im > 0.0 };
        if toward {
            t = t.min(-z.im / e.im);
        }
        t
    }
}

/// Polar-coordinate oracle for `Tf(z) = (1/π) ∫ f(ζ)/(z − ζ) dA` on a domain star-shaped about `z`.
///
/// `kinks` lists angles where the ray length is not smooth.
pub fn polar_t(f: &dyn Fn(C) -> C, ray: &RayFn, z: C, kinks: &[f64]) -> C {
    polar_theta(z, kinks, |th| {
        let e = C::from_polar(1.0, th);
        let r = ray(z, e);
        let inner = gl(0.0, r, 4, 20, |s| f(z + e * s));
        -inner * e.conj()
    }) / std::f64::consts::PI
}

/// Polar-coordinate oracle for the principal value
/// `Sf(z) = −(1/π) pv ∫ f(ζ)/(z − ζ)² dA`.
pub fn polar_s(f: &dyn Fn(C) -> C, ray: &RayFn, z: C, kinks: &[f64]) -> C {
    let fz = f(z);
    polar_theta(z, kinks, |th| {
        let e = C::from_polar(1.0, th);
        let r = ray(z, e);
        let inner = gl(0.0, r, 4, 20, |s| (f(z + e * s) - fz) / s);
        (inner + fz * r.ln()) * (e.conj() * e.conj())
    }) * (-1.0 / std::f64::consts::PI)
}

fn polar_theta<F: FnMut(f64) -> C>(z: C, kinks: &[f64], mut g: F) -> C {
    let _ = z;
    let tau = std::f64::consts::TAU;
    let mut cuts: Vec<f64> = kinks.iter().map(|k| k.rem_euclid(tau)).collect();
    cuts.push(0.0);
    cuts.push(tau);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = C::new(0.0, 0.0);
    for w in cuts.windows(2) {
        if w[1] - w[0] > 1e-14 {
            acc += gl(w[0], w[1], 16, 16, &mut g);
        }
    }
    acc
}

/// Angles from `z` to the corners `±r` of a half-disk.
pub fn half_disk_kinks(z: C, r: f64) -> Vec<f64> {
    vec![(c(r, 0.0) - z).arg(), (c(-r, 0.0) - z).arg()]
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
