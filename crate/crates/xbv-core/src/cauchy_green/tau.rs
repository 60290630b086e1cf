//! Kernels deformed by a bi-Lipschitz map `τ` of the upper half-disk.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;
use rayon::prelude::*;

use super::kernel::KernelConfig;
use crate::domain_grid::{wirtinger, DomainKind, DomainSpec, GridField, SUBSAMPLES};
use crate::error::{Error, Result};
use crate::Real;

/// Default constant `C` in the separation test `|τ(z′) − τ(z)| ≥ |z′ − z|/C`.
pub const DEFAULT_SEPARATION: f64 = 10.0;

/// A smooth map of a planar domain into the plane.
pub trait Deformation<T: Real>: Sync {
    /// `τ(z)`.
    fn value(&self, z: Complex<T>) -> Complex<T>;

    /// `(∂_z τ, ∂_z̄ τ)` at `z`; central differences by default.
    fn derivatives(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let d = T::epsilon().cbrt() * T::one().max(z.norm());
        let dx = Complex::new(d, T::zero());
        let dy = Complex::new(T::zero(), d);
        let two_d = T::c(2.0) * d;
        let tx = (self.value(z + dx) - self.value(z - dx)) / two_d;
        let ty = (self.value(z + dy) - self.value(z - dy)) / two_d;
        let i = Complex::new(T::zero(), T::one());
        let half = T::c(0.5);
        ((tx - ty * i) * half, (tx + ty * i) * half)
    }

    /// Jacobian `|τ_z|² − |τ_z̄|²` of `(Re τ, Im τ)`.
    fn jacobian(&self, z: Complex<T>) -> T {
        let (a, b) = self.derivatives(z);
        a.norm_sqr() - b.norm_sqr()
    }
}

/// The identity map.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<T: Real> Deformation<T> for Identity {
    fn value(&self, z: Complex<T>) -> Complex<T> {
        z
    }

    fn derivatives(&self, _z: Complex<T>) -> (Complex<T>, Complex<T>) {
        (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))
    }
}

/// A deformation given by a closure, with finite-difference derivatives.
pub struct FnDeformation<F>(pub F);

impl<T: Real, F: Fn(Complex<T>) -> Complex<T> + Sync> Deformation<T> for FnDeformation<F> {
    fn value(&self, z: Complex<T>) -> Complex<T> {
        (self.0)(z)
    }
}

/// A deformation sampled on a grid, evaluated by interpolation.
pub struct GridDeformation<T: Real> {
    field: GridField<T>,
    dz: GridField<T>,
    dzbar: GridField<T>,
}

impl<T: Real> GridDeformation<T> {
    /// Wraps the scalar field `tau`.
    pub fn new(tau: GridField<T>) -> Self {
        let w = wirtinger(&tau);
        Self { field: tau, dz: w.dz, dzbar: w.dzbar }
    }
}

impl<T: Real> Deformation<T> for GridDeformation<T> {
    fn value(&self, z: Complex<T>) -> Complex<T> {
        self.field.interpolate(z, 0).0
    }

    fn derivatives(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        (self.dz.interpolate(z, 0).0, self.dzbar.interpolate(z, 0).0)
    }
}

/// Verifies `|τ(z′) − τ(z)|/|z′ − z| ≥ 1/c` over a deterministic point set of `domain`.
///
/// Returns the smallest observed ratio.
pub fn check_separation<T: Real>(tau: &dyn Deformation<T>, domain: &DomainSpec<T>, c: T) -> Result<T> {
    let (lo, hi) = domain.bounding_box();
    let steps = 24usize;
    let mut pts = Vec::new();
    for q in 0..=steps {
        for p in 0..=steps {
            let z = Complex::new(
                lo.re + (hi.re - lo.re) * T::n(p) / T::n(steps),
                lo.im + (hi.im - lo.im) * T::n(q) / T::n(steps),
            );
            if domain.contains(z) {
                pts.push(z);
            }
        }
    }
    let stride = (domain.boundary.len() / 64).max(1);
    pts.extend(domain.boundary.iter().step_by(stride).map(|b| b.z));
    let vals: Vec<Complex<T>> = pts.iter().map(|&z| tau.value(z)).collect();
    let mut best = (T::infinity(), 0, 0);
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            let d = (pts[a] - pts[b]).norm();
            if d == T::zero() {
                continue;
            }
            let r = (vals[a] - vals[b]).norm() / d;
            if r < best.0 {
                best = (r, a, b);
            }
        }
    }
    if best.0 * c < T::one() {
        return Err(Error::Separation {
            z1: format!("{}", pts[best.1]),
            z2: format!("{}", pts[best.2]),
            ratio: best.0.f64(),
            c: c.f64(),
        });
    }
    Ok(best.0)
}

fn gauss16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16).expect("valid degree").as_node_weight_pairs().to_vec())
}

/// `C₀f(z)` and `∂_z C₀f(z)` at each evaluation point.
#[derive(Clone, Debug)]
pub struct C0Values<T> {
    /// `(1/2πi) ∫ f(s)/(τ(s) − τ(z)) ds`.
    pub values: Vec<Complex<T>>,
    /// `(1/2πi) ∫ f(s) τ_z(z)/(τ(s) − τ(z))² ds`.
    pub dz: Vec<Complex<T>>,
}

/// The deformed segment transform `C₀f(z) = (1/2πi) ∫_{−r}^{r} f(s)/(τ(s) − τ(z)) ds`
/// over the straight boundary segment of a half-disk, with its `z`-derivative.
///
/// Composite 16-point Gauss-Legendre panels are bisected until each panel is
/// no longer than its distance to `z`.
pub fn op_c0_tau<T: Real>(
    f: &(dyn Fn(T) -> Complex<T> + Sync),
    tau: &dyn Deformation<T>,
    domain: &DomainSpec<T>,
    eval: &[Complex<T>],
    separation: T,
) -> Result<C0Values<T>> {
    if !matches!(domain.kind, DomainKind::UpperHalfDisk | DomainKind::LowerHalfDisk) {
        return Err(Error::InvalidInput("C0 needs a half-disk domain".into()));
    }
    check_separation(tau, domain, separation)?;
    let r = domain.radius;
    let two_pi_i = Complex::new(T::zero(), T::TAU());
    let rule: Vec<(T, T)> = gauss16().iter().map(|&(x, w)| (T::c(x), T::c(w))).collect();
    let mut values = Vec::with_capacity(eval.len());
    let mut dz = Vec::with_capacity(eval.len());
    for &z in eval {
        let tz = tau.value(z);
        let (tzz, _) = tau.derivatives(z);
        let mut acc0 = Complex::new(T::zero(), T::zero());
        let mut acc1 = acc0;
        let mut stack = vec![(-r, r, 0usize)];
        while let Some((a, b, depth)) = stack.pop() {
            let dist = if z.re < a {
                (z - Complex::new(a, T::zero())).norm()
            } else if z.re > b {
                (z - Complex::new(b, T::zero())).norm()
            } else {
                z.im.abs()
            };
            if b - a > dist && depth < 60 {
                let m = (a + b) * T::c(0.5);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
                continue;
            }
            let half = (b - a) * T::c(0.5);
            let mid = (b + a) * T::c(0.5);
            for &(x, w) in &rule {
                let s = mid + half * x;
                let q = (tau.value(Complex::new(s, T::zero())) - tz).inv();
                let fv = f(s) * (w * half);
                acc0 += fv * q;
                acc1 += fv * q * q;
            }
        }
        values.push(acc0 / two_pi_i);
        dz.push(acc1 * tzz / two_pi_i);
    }
    Ok(C0Values { values, dz })
}

/// Deformed Cauchy-Green and Beurling transforms at every node of `f`'s grid.
///
/// `T₀f(z) = (1/π) ∫ f(ζ)/(τ(z) − τ(ζ)) dA` and `S₀f` is the pull-back of the
/// desingularized Beurling split through `w = τ(ζ)`:
/// `S₀f(z) = −(1/π) ∫ (F(ζ) − F(z)) J(ζ)/(τ(z) − τ(ζ))² dA − (F(z)/2πi) ∮ conj(dτ)/(τ(ζ) − τ(z))`
/// with `F = f/J`. Thus `T₀f = (T_{τΩ} F)∘τ`, `S₀f = ∂_τ T₀f` and `∂_τ̄ T₀f = f/J`.
pub fn op_t0_s0_tau<T: Real>(
    f: &GridField<T>,
    tau: &dyn Deformation<T>,
    config: &KernelConfig<T>,
    separation: T,
) -> Result<(GridField<T>, GridField<T>)> {
    config.validate()?;
    let g = &f.grid;
    check_separation(tau, &g.domain, separation)?;
    let h = g.h;
    let n = g.len();
    let dim = f.dim;
    let inv_pi = T::FRAC_1_PI();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::c(0.5);
    let sub = T::n(SUBSAMPLES);
    let wsub = h * h / (sub * sub);

    let tvals: Vec<Complex<T>> = g.nodes.par_iter().map(|&z| tau.value(z)).collect();
    let jac: Vec<T> = g.nodes.par_iter().map(|&z| tau.jacobian(z)).collect();
    if let Some(k) = jac.iter().position(|&j| !(j > T::zero())) {
        return Err(Error::NotDiffeomorphism { node: k, jacobian: jac[k].f64() });
    }
    // τ at the 16 subsample points of every node cell, for near-field quadrature.
    let subvals: Vec<Complex<T>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|k| {
            let (i, j) = g.cells[k];
            let mut out = Vec::with_capacity(SUBSAMPLES * SUBSAMPLES);
            for q in 0..SUBSAMPLES {
                for p in 0..SUBSAMPLES {
                    let z = Complex::new(
                        (T::c(i as f64) + (T::n(p) + half) / sub) * h,
                        (T::c(j as f64) + (T::n(q) + half) / sub) * h,
                    );
                    out.push(tau.value(z));
                }
            }
            out
        })
        .collect();
    let irregular: Vec<(usize, Complex<T>, Vec<Complex<T>>)> = g
        .irregular
        .iter()
        .map(|irr| {
            let c = irr.subsamples.iter().fold(zero, |a, &s| a + s) / T::n(irr.subsamples.len());
            (irr.node, tau.value(c), irr.subsamples.iter().map(|&s| tau.value(s)).collect())
        })
        .collect();
    let mut irr_of = vec![usize::MAX; n];
    for (e, (k, _, _)) in irregular.iter().enumerate() {
        irr_of[*k] = e;
    }
    let fine = match g.domain.kind {
        DomainKind::BoundarySampled => g.domain.clone(),
        _ => {
            let perimeter: T = g.domain.boundary.iter().map(|b| b.ds).sum();
            let m = (perimeter / (h * T::c(0.25))).ceil().to_usize().unwrap_or(0);
            g.domain.resampled(m.max(g.domain.boundary.len()))?
        }
    };
    let bdata: Vec<(Complex<T>, Complex<T>)> = fine
        .boundary
        .par_iter()
        .map(|b| {
            let (a, c) = tau.derivatives(b.z);
            (tau.value(b.z), a.conj() * b.dz.conj() + c.conj() * b.dz)
        })
        .collect();
    let two_pi_i = Complex::new(T::zero(), T::TAU());

    let mut tv = vec![zero; n * dim];
    let mut sv = vec![zero; n * dim];
    let out: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)> = (0..n)
        .into_par_iter()
        .map(|t| {
            let (ti, tj) = g.cells[t];
            let tz = tvals[t];
            let mut a_t = vec![zero; dim];
            let mut a_s = vec![zero; dim];
            let ft: Vec<Complex<T>> = (0..dim).map(|c| f.at(t, c) / jac[t]).collect();
            for s in 0..n {
                let (si, sj) = g.cells[s];
                let near = (si - ti).abs() <= 1 && (sj - tj).abs() <= 1;
                let e = irr_of[s];
                let (kt, ks) = if e != usize::MAX {
                    let (_, tc, ref subs) = irregular[e];
                    if (tc - tz).norm() > T::c(3.0) * h {
                        let d = (tz - tc).inv();
                        (d * (g.weights[s] * inv_pi), d * d * (g.weights[s] * inv_pi))
                    } else {
                        let mut kt = zero;
                        let mut ks = zero;
                        for &p in subs {
                            let d = (tz - p).inv();
                            kt += d * (wsub * inv_pi);
                            ks += d * d * (wsub * inv_pi);
                        }
                        (kt, ks)
                    }
                } else if s == t {
                    (zero, zero)
                } else if near {
                    let mut kt = zero;
                    for &p in &subvals[s * SUBSAMPLES * SUBSAMPLES..(s + 1) * SUBSAMPLES * SUBSAMPLES] {
                        kt += (tz - p).inv() * (wsub * inv_pi);
                    }
                    let d = (tz - tvals[s]).inv();
                    (kt, d * d * (g.weights[s] * inv_pi))
                } else {
                    let d = (tz - tvals[s]).inv();
                    let w = g.weights[s] * inv_pi;
                    (d * w, d * d * w)
                };
                for c in 0..dim {
                    let v = f.at(s, c);
                    a_t[c] += v * kt;
                    if s != t {
                        // (F_s − F_t) J_s = f_s − F_t J_s
                        a_s[c] -= (v - ft[c] * jac[s]) * ks;
                    }
                }
            }
            let mut bterm = zero;
            for &(tb, dtb) in &bdata {
                bterm += dtb / (tb - tz);
            }
            for c in 0..dim {
                a_s[c] -= ft[c] * bterm / two_pi_i;
            }
            (a_t, a_s)
        })
        .collect();
    for (t, (a, b)) in out.into_iter().enumerate() {
        for c in 0..dim {
            tv[t * dim + c] = a[c];
            sv[t * dim + c] = b[c];
        }
    }
    Ok((
        GridField { grid: g.clone(), dim, values: tv },
        GridField { grid: g.clone(), dim, values: sv },
    ))
}

/// Derivatives `(∂_τ G, ∂_τ̄ G)` of `g = G∘τ` from its Wirtinger derivatives.
///
/// Solves `∂_z g = G_τ τ_z + G_τ̄ conj(τ_z̄)` and `∂_z̄ g = G_τ τ_z̄ + G_τ̄ conj(τ_z)`.
pub fn tau_wirtinger<T: Real>(field: &GridField<T>, tau: &dyn Deformation<T>) -> (GridField<T>, GridField<T>) {
    let w = wirtinger(field);
    let g = &field.grid;
    let dim = field.dim;
    let zero = Complex::new(T::zero(), T::zero());
    let mut dt = vec![zero; g.len() * dim];
    let mut dtb = vec![zero; g.len() * dim];
    for k in 0..g.len() {
        let (a, b) = tau.derivatives(g.nodes[k]);
        let det = a.norm_sqr() - b.norm_sqr();
        for c in 0..dim {
            let gz = w.dz.at(k, c);
            let gzb = w.dzbar.at(k, c);
            // [a, conj(b); b, conj(a)] [Gt; Gtb] = [gz; gzb]
            dt[k * dim + c] = (gz * a.conj() - gzb * b.conj()) / det;
            dtb[k * dim + c] = (gzb * a - gz * b) / det;
        }
    }
    (
        GridField { grid: g.clone(), dim, values: dt },
        GridField { grid: g.clone(), dim, values: dtb },
    )
}
