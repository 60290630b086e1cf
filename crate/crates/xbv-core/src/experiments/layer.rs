//! The logarithmic single-layer potential of a boundary density and the jump
//! of its normal derivative across the boundary.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain_grid::{BoundarySample, DomainSpec, Grid, GridField};
use crate::error::{Error, Result};
use crate::whitney::fd_weights;
use crate::C64;

/// Offsets, in grid spacings, of the one-sided normal stencils.
pub const NORMAL_OFFSETS: [f64; 3] = [2.0, 4.0, 6.0];
/// Nodes closer than `LAPLACE_MARGIN · h` to the boundary are left out of the
/// harmonicity check.
pub const LAPLACE_MARGIN: f64 = 3.0;

/// `W_f(z) = (1/π) ∫_{∂Ω} f(t) log|γ(t) − z| dt` with its grid samples.
#[derive(Clone, Debug)]
pub struct SingleLayer {
    /// Boundary samples carrying the arclength weights.
    pub boundary: Vec<BoundarySample<f64>>,
    /// Density at the boundary samples.
    pub density: Vec<f64>,
    /// `W_f` at the evaluation nodes (real part; imaginary part zero).
    pub field: GridField<f64>,
    /// Nodes closer than `h/2` to the boundary.
    pub near_boundary: Vec<usize>,
    /// `max |Δ_h W_f|` over nodes with a full five-point stencil at least
    /// [`LAPLACE_MARGIN`]` · h` from the boundary.
    pub laplacian: f64,
}

impl SingleLayer {
    /// `W_f(z)` by the arclength trapezoid rule.
    pub fn eval(&self, z: C64) -> f64 {
        potential(&self.boundary, &self.density, z)
    }
}

fn potential(boundary: &[BoundarySample<f64>], density: &[f64], z: C64) -> f64 {
    let sum: f64 = boundary.iter().zip(density).map(|(b, f)| f * b.ds * (b.z - z).norm().ln()).sum();
    sum / std::f64::consts::PI
}

/// Samples `W_f` on the nodes of `eval` and checks that it is harmonic off
/// the boundary with the five-point Laplacian.
pub fn single_layer(domain: &DomainSpec<f64>, density: &[f64], eval: &Arc<Grid<f64>>) -> Result<SingleLayer> {
    if density.len() != domain.boundary.len() {
        return Err(Error::InvalidInput(format!(
            "{} density samples for {} boundary samples",
            density.len(),
            domain.boundary.len()
        )));
    }
    let boundary = domain.boundary.clone();
    let values: Vec<C64> =
        eval.nodes.par_iter().map(|&z| Complex::new(potential(&boundary, density, z), 0.0)).collect();
    let field = GridField::from_values(eval, values);
    let h = eval.h;
    let distance: Vec<f64> = eval.nodes.iter().map(|&z| boundary_distance(&boundary, z)).collect();
    let near_boundary = (0..eval.len()).filter(|&k| distance[k] < 0.5 * h).collect();
    let mut laplacian: f64 = 0.0;
    for (k, &(i, j)) in eval.cells.iter().enumerate() {
        if distance[k] < LAPLACE_MARGIN * h {
            continue;
        }
        let nbrs = [eval.node_at(i + 1, j), eval.node_at(i - 1, j), eval.node_at(i, j + 1), eval.node_at(i, j - 1)];
        if nbrs.iter().any(Option::is_none) {
            continue;
        }
        let sum: f64 = nbrs.iter().map(|n| field.values[n.unwrap()].re).sum();
        let lap = (sum - 4.0 * field.values[k].re) / (h * h);
        laplacian = laplacian.max(lap.abs());
    }
    Ok(SingleLayer { boundary, density: density.to_vec(), field, near_boundary, laplacian })
}

fn boundary_distance(boundary: &[BoundarySample<f64>], z: C64) -> f64 {
    boundary.iter().map(|b| (b.z - z).norm()).fold(f64::INFINITY, f64::min)
}

/// One-sided normal derivatives of `W_f` and their sum at each boundary sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    /// Arclength parameters.
    pub s: Vec<f64>,
    /// `∂_n W_f` from outside.
    pub exterior: Vec<f64>,
    /// `∂_{−n} W_f` from inside.
    pub interior: Vec<f64>,
    /// `exterior + interior`, expected to equal `2 f(s)`.
    pub jump: Vec<f64>,
    /// Samples whose stencil left the evaluation grid; their entries are NaN.
    pub skipped: Vec<usize>,
    /// `max |jump − 2f|` over the evaluated samples.
    pub max_error: f64,
    /// `max_error / max |2f|`.
    pub relative_error: f64,
}

/// Compares the jump of the normal derivative of `W_f` with `2f`.
///
/// Each one-sided derivative comes from `W_f` at distances
/// [`NORMAL_OFFSETS`]` · h` along `±n`, extrapolated to the boundary through
/// the quadratic interpolant (one Richardson step for the three points).
/// Stencil points off the evaluation grid skip the sample.
pub fn normal_jump_check(layer: &SingleLayer) -> JumpReport {
    let grid = &layer.field.grid;
    let step = grid.h;
    let results: Vec<Option<(f64, f64)>> = (0..layer.boundary.len())
        .into_par_iter()
        .map(|k| {
            let inside = |p: C64| grid.domain.contains(p);
            let ext = one_sided(layer, k, 1.0, step, inside)?;
            let int = one_sided(layer, k, -1.0, step, inside)?;
            Some((ext, int))
        })
        .collect();
    let mut report = JumpReport {
        s: layer.boundary.iter().map(|b| b.s).collect(),
        exterior: Vec::with_capacity(results.len()),
        interior: Vec::with_capacity(results.len()),
        jump: Vec::with_capacity(results.len()),
        skipped: Vec::new(),
        max_error: 0.0,
        relative_error: 0.0,
    };
    let scale = layer.density.iter().fold(0.0f64, |m, f| m.max(2.0 * f.abs()));
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Some((ext, int)) => {
                report.exterior.push(ext);
                report.interior.push(int);
                report.jump.push(ext + int);
                report.max_error = report.max_error.max((ext + int - 2.0 * layer.density[k]).abs());
            }
            None => {
                report.exterior.push(f64::NAN);
                report.interior.push(f64::NAN);
                report.jump.push(f64::NAN);
                report.skipped.push(k);
            }
        }
    }
    report.relative_error = if scale > 0.0 { report.max_error / scale } else { report.max_error };
    report
}

/// `∂_n W_f` from outside at boundary sample `k`, with the stencil of
/// [`normal_jump_check`] scaled to spacing `step` instead of the grid spacing.
pub fn exterior_normal_derivative(layer: &SingleLayer, k: usize, step: f64) -> f64 {
    one_sided(layer, k, 1.0, step, |_| true).unwrap_or(f64::NAN)
}

/// The derivative along `sign · n` at distance zero from `W_f` at
/// [`NORMAL_OFFSETS`]` · step`, or `None` if `admit` rejects a stencil point.
fn one_sided(layer: &SingleLayer, k: usize, sign: f64, step: f64, admit: impl Fn(C64) -> bool) -> Option<f64> {
    let b = &layer.boundary[k];
    let n = b.normal();
    let offsets: Vec<f64> = NORMAL_OFFSETS.iter().map(|d| d * step).collect();
    let w = fd_weights(1, &offsets);
    let mut acc = 0.0;
    for (d, wk) in offsets.iter().zip(&w) {
        let p = b.z + n * (sign * d);
        if !admit(p) {
            return None;
        }
        acc += wk * layer.eval(p);
    }
    Some(acc)
}
