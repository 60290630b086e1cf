//! Isothermal coordinates for `∂_z̄ + a ∂_z` near a point.

use std::sync::Arc;

use num_complex::Complex;

use super::neumann::{solve_linear_beltrami, BeltramiCoefficient, NeumannOptions, SolveReport};
use crate::domain_grid::{holder_estimate, wirtinger, DomainSpec, Grid, GridField, DEFAULT_BOUNDARY_SAMPLES};
use crate::error::{Error, Result};
use crate::Real;

/// Largest number of dilation halvings.
pub const MAX_HALVINGS: usize = 8;

/// Parameters of [`isothermal`].
#[derive(Clone, Copy, Debug)]
pub struct IsothermalOptions<T> {
    /// Grid spacing on the unit `ζ`-disk where the Neumann solve runs.
    pub h: T,
    /// Hölder exponent of the norm estimate.
    pub alpha: T,
    /// Series and threshold parameters; `neumann.threshold` bounds `|b|_{α,0}`.
    pub neumann: NeumannOptions<T>,
}

impl<T: Real> Default for IsothermalOptions<T> {
    fn default() -> Self {
        Self { h: T::c(1.0 / 64.0), alpha: T::c(0.5), neumann: NeumannOptions::default() }
    }
}

/// Record of the isothermal construction.
#[derive(Clone, Debug)]
pub struct IsothermalReport<T> {
    /// `a(center)`, removed by the linear preconditioner.
    pub c: Complex<T>,
    /// Final dilation factor `μ`.
    pub mu: T,
    /// Number of halvings applied to the initial dilation.
    pub halvings: usize,
    /// `|b|_{α,0}` of the cut-off coefficient on the `ζ`-disk.
    pub b_norm: T,
    /// Neumann solve on the `ζ`-disk.
    pub solve: SolveReport,
    /// Radius of the output disk around the center.
    pub radius: T,
    /// [`transform_check`] residual on the output disk.
    pub residual: T,
    /// Smallest Jacobian of the output map.
    pub min_jacobian: T,
}

/// `C³` cutoff equal to 1 on `|ζ| ≤ 1/2` and 0 on `|ζ| ≥ 1`.
pub fn cutoff<T: Real>(r: T) -> T {
    let half = T::c(0.5);
    if r <= half {
        return T::one();
    }
    if r >= T::one() {
        return T::zero();
    }
    let s = (r - half) / half;
    let s4 = s * s * s * s;
    T::one() - s4 * (T::c(35.0) - s * (T::c(84.0) - s * (T::c(70.0) - s * T::c(20.0))))
}

/// A map `φ` with `(∂_z̄ + a ∂_z) φ = 0` on a disk around `center`.
///
/// With `c = a(center)` the preconditioner `φ₀(z) = z − c z̄` turns the
/// operator into a multiple of `∂_w̄ + ã ∂_w` with `ã = (a − c)/(1 − c̄ a)`
/// vanishing at `w₀ = φ₀(center)`. Writing `w = w₀ + μζ`, the coefficient
/// `b = χ ã` on the unit `ζ`-disk is pushed below the threshold by halving
/// `μ`, `f = −(I + T b ∂_ζ)^{-1} T b` is computed, and
/// `φ(z) = φ₀(z) + μ f(ζ(z))` is returned on the disk of radius
/// `μ / (2(1 + |c|))`, whose image lies where `χ = 1`.
pub fn isothermal<T: Real>(
    coef: &BeltramiCoefficient<T>,
    center: Complex<T>,
    opts: &IsothermalOptions<T>,
) -> Result<(GridField<T>, IsothermalReport<T>)> {
    if coef.m != 1 {
        return Err(Error::InvalidInput("isothermal coordinates need a scalar coefficient".into()));
    }
    let domain = &coef.a.grid.domain;
    if !domain.contains(center) {
        return Err(Error::InvalidInput(format!("center {center} outside the domain")));
    }
    let a_at = |z: Complex<T>| coef.a.interpolate(z, 0).0;
    let c = a_at(center);
    let one = T::one();
    let phi0 = |z: Complex<T>| z - c * z.conj();
    let inv_det = one / (one - c.norm_sqr());
    let phi0_inv = |w: Complex<T>| (w + c * w.conj()) * inv_det;
    let w0 = phi0(center);
    let tilde = |z: Complex<T>| {
        let v = a_at(z);
        (v - c) / (Complex::new(one, T::zero()) - c.conj() * v)
    };

    let zeta_grid = Arc::new(Grid::build(DomainSpec::unit_disk(), opts.h)?);
    let mut mu = (one - c.norm()) * domain.boundary_distance(center);
    let mut halvings = 0;
    let (b, b_norm) = loop {
        let b = GridField::from_fn(&zeta_grid, |zeta| tilde(phi0_inv(w0 + zeta * mu)) * cutoff(zeta.norm()));
        let report = holder_estimate(&b, 0, opts.alpha)?;
        let norm = report.sup_norms[0] + report.seminorm;
        if norm < opts.neumann.threshold {
            break (b, norm);
        }
        if halvings == MAX_HALVINGS {
            return Err(Error::DilationFailed { norm: norm.f64(), halvings });
        }
        mu *= T::c(0.5);
        halvings += 1;
    };
    let bcoef = BeltramiCoefficient::scalar(b.clone(), opts.alpha)?;
    let (f, solve) = solve_linear_beltrami(&bcoef, &b, &opts.neumann)?;

    let radius = mu / (T::c(2.0) * (one + c.norm()));
    let out_grid = Arc::new(Grid::build(
        DomainSpec::disk(center, radius, DEFAULT_BOUNDARY_SAMPLES),
        T::c(2.0) * radius * opts.h,
    )?);
    let phi = GridField::from_fn(&out_grid, |z| {
        let w = phi0(z);
        w + f.interpolate((w - w0) / mu, 0).0 * mu
    });
    let a_out = GridField::from_fn(&out_grid, a_at);
    let (residual, min_jacobian) = transform_check_with_jacobian(&phi, &a_out)?;
    Ok((phi, IsothermalReport { c, mu, halvings, b_norm, solve, radius, residual, min_jacobian }))
}

/// `‖∂_z̄ φ + a ∂_z φ‖_∞ / ‖∂_z φ‖_∞` after checking that `φ` has positive Jacobian.
pub fn transform_check<T: Real>(phi: &GridField<T>, a: &GridField<T>) -> Result<T> {
    Ok(transform_check_with_jacobian(phi, a)?.0)
}

fn transform_check_with_jacobian<T: Real>(phi: &GridField<T>, a: &GridField<T>) -> Result<(T, T)> {
    if phi.dim != 1 || a.dim != 1 || !Arc::ptr_eq(&phi.grid, &a.grid) {
        return Err(Error::InvalidInput("transform check needs scalar fields on one grid".into()));
    }
    let w = wirtinger(phi);
    let mut min_jac = T::infinity();
    let mut num = T::zero();
    let mut den = T::zero();
    for k in 0..phi.grid.len() {
        let (dz, dzb) = (w.dz.values[k], w.dzbar.values[k]);
        let jac = dz.norm_sqr() - dzb.norm_sqr();
        if !(jac > T::zero()) {
            return Err(Error::NotDiffeomorphism { node: k, jacobian: jac.f64() });
        }
        min_jac = min_jac.min(jac);
        num = num.max((dzb + a.values[k] * dz).norm());
        den = den.max(dz.norm());
    }
    Ok((num / den, min_jac))
}
