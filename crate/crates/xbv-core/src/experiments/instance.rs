//! Two-sided Beltrami instances with known solutions: a holomorphic seed
//! pulled back through diffeomorphisms of each half-disk that fix the real
//! segment pointwise.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::decay::segment_rows;
use crate::domain_grid::{wirtinger, DomainSpec, Grid, GridField, DEFAULT_BOUNDARY_SAMPLES};
use crate::error::{Error, Result};
use crate::C64;

/// Segment samples used to check that `φ` fixes the segment.
pub const SEGMENT_CHECKS: usize = 64;
/// Allowed moving of segment points by `φ`.
pub const FIX_TOL: f64 = 1e-12;

/// A diffeomorphism of a half-disk equal to the identity on the segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSpec {
    /// `φ(z) = z`.
    Identity,
    /// `φ(z) = z − c (Im z)²`.
    Quadratic {
        /// Strength `c`.
        c: f64,
    },
    /// `φ(z) = z + c Re z Im z`.
    Shear {
        /// Strength `c`.
        c: f64,
    },
}

impl PhiSpec {
    /// `(φ, ∂_z φ, ∂_z̄ φ)` at `z`.
    pub fn eval(&self, z: C64) -> (C64, C64, C64) {
        let one = C64::new(1.0, 0.0);
        let i = C64::i();
        let (x, y) = (z.re, z.im);
        match *self {
            PhiSpec::Identity => (z, one, C64::new(0.0, 0.0)),
            // ∂_z y = −i/2 and ∂_z̄ y = i/2.
            PhiSpec::Quadratic { c } => (z - c * y * y, one + i * (c * y), -i * (c * y)),
            // ∂_z (xy) = (y − i x)/2 and ∂_z̄ (xy) = (y + i x)/2.
            PhiSpec::Shear { c } => {
                (z + c * x * y, one + C64::new(y, -x) * (0.5 * c), C64::new(y, x) * (0.5 * c))
            }
        }
    }

    /// `a = −∂_z̄ φ / ∂_z φ`, the coefficient with `∂_z̄ (g∘φ) + a ∂_z (g∘φ) = 0`.
    pub fn coefficient(&self, z: C64) -> C64 {
        let (_, dz, dzbar) = self.eval(z);
        -dzbar / dz
    }
}

/// A holomorphic seed `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedSpec {
    /// `g(z) = Σ_k c_k z^k` with `[re, im]` coefficients.
    Polynomial {
        /// Coefficients from degree 0 up.
        coeffs: Vec<[f64; 2]>,
    },
    /// `g(z) = exp(s z)`.
    Exp {
        /// Scale `s` as `[re, im]`.
        #[serde(default = "unit")]
        scale: [f64; 2],
    },
    /// `g(z) = 1 / (z − p)` for a pole `p` off the disk.
    Ratio {
        /// Pole `p` as `[re, im]`.
        pole: [f64; 2],
    },
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

impl SeedSpec {
    /// `g(z)`.
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            SeedSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + complex(*c)),
            SeedSpec::Exp { scale } => (complex(*scale) * z).exp(),
            SeedSpec::Ratio { pole } => (z - complex(*pole)).inv(),
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

/// Parameters of a two-sided instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Half-disk radius.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Grid spacing.
    pub h: f64,
    /// Diffeomorphism of the upper half-disk.
    pub upper_phi: PhiSpec,
    /// Diffeomorphism of the lower half-disk.
    pub lower_phi: PhiSpec,
    /// Seed on the upper side.
    pub seed: SeedSpec,
    /// Seed on the lower side when it differs.
    #[serde(default)]
    pub lower_seed: Option<SeedSpec>,
}

/// One side of an instance on its half-disk grid.
#[derive(Clone, Debug)]
pub struct Side {
    /// `φ_i` at the nodes.
    pub phi: GridField<f64>,
    /// `a_i = −∂_z̄ φ_i / ∂_z φ_i` at the nodes.
    pub a: GridField<f64>,
    /// `f = g_i ∘ φ_i` at the nodes.
    pub f: GridField<f64>,
    /// `max |a_i|`.
    pub sup_a: f64,
    /// Smallest Jacobian `|∂_z φ|² − |∂_z̄ φ|²`.
    pub min_jacobian: f64,
    /// `max |∂_z̄ f + a ∂_z f|` with grid differences, over nodes with
    /// second-order stencils.
    pub residual: f64,
}

/// A glued instance: `f` solves `∂_z̄ f + a_i ∂_z f = 0` on each half-disk.
#[derive(Clone, Debug)]
pub struct TwoSidedInstance {
    /// The parameters.
    pub spec: InstanceSpec,
    /// Upper half-disk data.
    pub upper: Side,
    /// Lower half-disk data.
    pub lower: Side,
    /// Columns where the traces were compared.
    pub trace_x: Vec<f64>,
    /// `max |f⁺(x, 0) − f⁻(x, 0)|` between the extrapolated traces.
    pub trace_mismatch: f64,
    /// Allowed mismatch `max(1e-8, h²) · max |f(x, 0)|`.
    pub trace_tol: f64,
}

/// Builds both sides and checks the instance.
///
/// Errors when some `φ_i` moves a segment point, when `|a_i| ≥ 1` or the
/// Jacobian is not positive at a node, or when the two traces disagree
/// beyond the interpolation tolerance.
pub fn make_two_sided_instance(spec: &InstanceSpec) -> Result<TwoSidedInstance> {
    let r = spec.radius;
    if !(r > 0.0) || !(spec.h > 0.0) {
        return Err(Error::InvalidInput("instance needs positive radius and spacing".into()));
    }
    let upper_grid = Arc::new(Grid::build(DomainSpec::upper_half_disk(r, DEFAULT_BOUNDARY_SAMPLES), spec.h)?);
    let lower_grid = Arc::new(Grid::build(DomainSpec::lower_half_disk(r, DEFAULT_BOUNDARY_SAMPLES), spec.h)?);
    let lower_seed = spec.lower_seed.as_ref().unwrap_or(&spec.seed);
    let upper = build_side(&upper_grid, &spec.upper_phi, &spec.seed, "upper")?;
    let lower = build_side(&lower_grid, &spec.lower_phi, lower_seed, "lower")?;

    let x_max = 0.9 * r;
    let up = segment_rows(&upper.f, x_max, 0)?;
    let down = segment_rows(&lower.f, x_max, 0)?;
    let trace_mismatch = up.trace().iter().zip(down.trace()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = up.trace().iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let trace_tol = 1e-8f64.max(spec.h * spec.h) * scale;
    if !(trace_mismatch <= trace_tol) {
        return Err(Error::InvalidInput(format!(
            "traces disagree across the segment by {trace_mismatch:e} (tolerance {trace_tol:e}); f is not continuous"
        )));
    }
    Ok(TwoSidedInstance { spec: spec.clone(), upper, lower, trace_x: up.x, trace_mismatch, trace_tol })
}

fn build_side(grid: &Arc<Grid<f64>>, phi: &PhiSpec, seed: &SeedSpec, name: &str) -> Result<Side> {
    let r = grid.domain.radius;
    for k in 0..=SEGMENT_CHECKS {
        let x = -r + 2.0 * r * k as f64 / SEGMENT_CHECKS as f64;
        let z = Complex::new(x, 0.0);
        let moved = (phi.eval(z).0 - z).norm();
        if !(moved <= FIX_TOL) {
            return Err(Error::InvalidInput(format!("{name} diffeomorphism moves the segment point {x} by {moved:e}")));
        }
    }
    let mut sup_a: f64 = 0.0;
    let mut min_jacobian = f64::INFINITY;
    for &z in &grid.nodes {
        let (_, dz, dzbar) = phi.eval(z);
        sup_a = sup_a.max((dzbar / dz).norm());
        min_jacobian = min_jacobian.min(dz.norm_sqr() - dzbar.norm_sqr());
    }
    if !(sup_a < 1.0 && min_jacobian > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{name} coefficient reaches |a| = {sup_a}; the diffeomorphism is not orientation-compatible"
        )));
    }
    let phi_field = GridField::from_fn(grid, |z| phi.eval(z).0);
    let a = GridField::from_fn(grid, |z| phi.coefficient(z));
    let f = GridField::from_fn(grid, |z| seed.eval(phi.eval(z).0));
    let w = wirtinger(&f);
    let degenerate: std::collections::HashSet<usize> = w.degenerate.iter().copied().collect();
    let residual = (0..grid.len())
        .filter(|k| !degenerate.contains(k))
        .map(|k| (w.dzbar.values[k] + a.values[k] * w.dz.values[k]).norm())
        .fold(0.0, f64::max);
    Ok(Side { phi: phi_field, a, f, sup_a, min_jacobian, residual })
}
