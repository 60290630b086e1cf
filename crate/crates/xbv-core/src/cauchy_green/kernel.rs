//! Closed-form cell integrals, boundary terms and kernel configuration.

use num_complex::Complex;

use crate::domain_grid::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::Real;

/// How the principal value of the Beurling kernel is desingularized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Desingularization {
    /// Omit the cell containing the evaluation point.
    SkipCell,
    /// Omit a disk of radius `ε(h)` around the evaluation point, resolving
    /// partially covered cells by subdivision.
    PolarPatch,
}

/// Discretization parameters of the Beurling operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig<T> {
    /// Desingularization strategy.
    pub mode: Desingularization,
    /// Exclusion radius as a multiple of `h`; at least `1/2`.
    pub eps_factor: T,
    /// Subdivision factor for cells near the exclusion disk; between 1 and 16.
    pub refine: usize,
}

impl<T: Real> Default for KernelConfig<T> {
    fn default() -> Self {
        Self { mode: Desingularization::SkipCell, eps_factor: T::c(0.5), refine: 1 }
    }
}

impl<T: Real> KernelConfig<T> {
    /// Polar-patch configuration with the given radius factor and refinement.
    pub fn polar_patch(eps_factor: T, refine: usize) -> Self {
        Self { mode: Desingularization::PolarPatch, eps_factor, refine }
    }

    /// Exclusion radius `ε(h)`.
    pub fn eps(&self, h: T) -> T {
        self.eps_factor * h
    }

    /// Checks the documented parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_factor >= T::c(0.5)) {
            return Err(Error::InvalidInput(format!("eps factor {} below 1/2", self.eps_factor)));
        }
        if self.refine == 0 || self.refine > 16 {
            return Err(Error::InvalidInput(format!("refinement factor {} outside 1..=16", self.refine)));
        }
        Ok(())
    }
}

/// `∫∫_Q dA(ζ) / (z − ζ)` over the axis-aligned square `Q` of side `a` centered at `c`.
///
/// Uses `∫∫ dA/(z − ζ) = −(1/2i) ∮ w̄/w dw` with `w = ζ − z`, whose edge
/// antiderivatives are `2x log w − w` on vertical edges `Re w = x` and
/// `w − 2iy log w` on horizontal edges `Im w = y`. Valid for `z` anywhere,
/// including inside `Q`; the value at the center is zero.
pub fn square_cauchy<T: Real>(z: Complex<T>, c: Complex<T>, a: T) -> Complex<T> {
    let half = a * T::c(0.5);
    let w = [
        c + Complex::new(-half, -half) - z,
        c + Complex::new(half, -half) - z,
        c + Complex::new(half, half) - z,
        c + Complex::new(-half, half) - z,
    ];
    let two = T::c(2.0);
    let i = Complex::new(T::zero(), T::one());
    let mut acc = Complex::new(T::zero(), T::zero());
    for e in 0..4 {
        let (p, q) = (w[e], w[(e + 1) % 4]);
        let horizontal = e % 2 == 0;
        let coef = if horizontal { p.im } else { p.re };
        let lg = if coef != T::zero() { log_ratio(q, p) } else { Complex::new(T::zero(), T::zero()) };
        if horizontal {
            acc = acc + (q - p) - i * lg * (two * coef);
        } else {
            acc = acc + lg * (two * coef) - (q - p);
        }
    }
    // −(1/2i) = i/2
    acc * Complex::new(T::zero(), T::c(0.5))
}

/// `log(q/p)` along the straight segment from `p` to `q`, which must avoid 0.
#[inline]
fn log_ratio<T: Real>(q: Complex<T>, p: Complex<T>) -> Complex<T> {
    let r = q / p;
    Complex::new((q.norm() / p.norm()).ln(), r.im.atan2(r.re))
}

/// `(atanh u − u)/u²`, by series near zero.
fn atanh_remainder<T: Real>(u: Complex<T>) -> Complex<T> {
    if u.norm() < T::c(0.5) {
        let u2 = u * u;
        let mut term = u;
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 1..60 {
            let add = term / T::n(2 * k + 1);
            acc += add;
            if add.norm() < T::epsilon() * acc.norm() {
                break;
            }
            term *= u2;
        }
        acc
    } else {
        (u.atanh() - u) / (u * u)
    }
}

/// `∮_{∂Ω} conj(dζ)/(ζ − z)` for `z` in the open domain.
///
/// Exact for disks (zero) and half-disks (closed form), and exact for the
/// polygon through the samples of a sampled boundary.
pub fn boundary_conj_term<T: Real>(domain: &DomainSpec<T>, z: Complex<T>) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    match domain.kind {
        DomainKind::UnitDisk | DomainKind::Disk => zero,
        DomainKind::UpperHalfDisk => upper_half_term(z / domain.radius),
        DomainKind::LowerHalfDisk => -upper_half_term(z.conj() / domain.radius).conj(),
        DomainKind::BoundarySampled => {
            let m = domain.boundary.len();
            let mut acc = zero;
            for k in 0..m {
                let a = domain.boundary[k].z;
                let b = domain.boundary[(k + 1) % m].z;
                let t = (b - a) / (b - a).norm();
                let tc = t.conj();
                acc += tc * tc * log_ratio(b - z, a - z);
            }
            acc
        }
    }
}

fn upper_half_term<T: Real>(u: Complex<T>) -> Complex<T> {
    let two = T::c(2.0);
    Complex::new(T::zero(), T::PI()) - u.atanh() * two - atanh_remainder(u) * two
}
