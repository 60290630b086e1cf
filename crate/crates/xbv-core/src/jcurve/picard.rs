//! Pseudoholomorphic discs through a point by Picard iteration of
//! `u = t·ẽ/n + ζ ē + Φ(u) − P₁Φ(u)`, `Φ(u) = T(Aᵗ(u) conj(∂_ζ u))`.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::field::StructureField;
use crate::beltrami::CORE_MARGIN;
use crate::cauchy_green::{CauchyGreen, KernelConfig};
use crate::domain_grid::{wirtinger, DomainSpec, Grid, GridField, DEFAULT_BOUNDARY_SAMPLES};
use crate::error::{Error, Result};
use crate::structures::{complex_norm, CVec};
use crate::C64;

/// Default disc radius.
pub const DEFAULT_RADIUS: f64 = 0.5;
/// Default grid spacing.
pub const DEFAULT_SPACING: f64 = 1.0 / 128.0;
/// Default stopping tolerance on the sup change of successive iterates.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;
/// Largest number of dilations `A(z) ↦ A(z/2)` tried when the iteration stalls.
pub const MAX_DILATIONS: usize = 6;
/// Consecutive change ratios at or above one that stop the iteration.
pub const STALL_RUN: usize = 3;

/// Settings of [`picard_disc`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PicardOptions {
    /// Disc radius `r`.
    pub r: f64,
    /// Grid spacing on `D_r`.
    pub h: f64,
    /// Stop once the sup change falls below this.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Dilations tried after a stall; 0 disables the fallback.
    pub max_dilations: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            r: DEFAULT_RADIUS,
            h: DEFAULT_SPACING,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            max_dilations: MAX_DILATIONS,
        }
    }
}

/// A sampled disc `u: D_r → C^n`.
#[derive(Clone, Debug)]
pub struct DiscMap {
    /// Disc radius.
    pub r: f64,
    /// Family parameter `t ∈ C^{n−1}`.
    pub t: Vec<C64>,
    /// Direction `e` with `∂_ζ u(0) = scale · ē`.
    pub e: Vec<C64>,
    /// Dilation factor `μ`: `u = μ v` with `v` the disc of `A(μ ·)`.
    pub scale: f64,
    /// The disc grid.
    pub grid: Arc<Grid<f64>>,
    /// `u` at the nodes, `n` components.
    pub u: GridField<f64>,
    /// `∂_ζ u` at the nodes from the Beurling transform.
    pub du: GridField<f64>,
    /// `u(0) = scale · t·ẽ/n`.
    pub anchor: Vec<C64>,
    /// Whether the real differential of `ζ ↦ u` has rank two at every node.
    pub embedded: bool,
    density: GridField<f64>,
    t0: Vec<C64>,
    s0: Vec<C64>,
}

impl DiscMap {
    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.u.dim
    }

    /// `u` at arbitrary points of `D_r`, evaluated from the stored density so
    /// that `u(0)` and `∂_ζ u(0)` reproduce the anchor exactly.
    pub fn eval(&self, points: &[C64]) -> Result<Vec<CVec>> {
        let engine = CauchyGreen::new(&self.grid, KernelConfig::default())?;
        let tb = engine.t_points(&self.density, points);
        let n = self.n();
        let base = base_point(&self.t, n);
        Ok(points
            .iter()
            .enumerate()
            .map(|(p, &z)| {
                CVec::from_fn(n, |c, _| {
                    let v = base[c] + z * self.e[c].conj() + tb[p * n + c] - self.t0[c] - self.s0[c] * z;
                    v * self.scale
                })
            })
            .collect())
    }

    /// Smallest Gram determinant of `(∂_x u, ∂_y u)` over the nodes.
    pub fn min_gram(&self) -> f64 {
        min_gram(&self.u)
    }
}

/// Residual of `∂_ζ̄ u = Aᵗ(u) conj(∂_ζ u)`.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// Sup over nodes at distance at least `CORE_MARGIN · r` from the circle.
    pub sup: f64,
    /// `L²` norm over the same nodes.
    pub l2: f64,
    /// Sup over every node, including one-sided stencils at the rim.
    pub sup_all: f64,
    /// Node count of the core.
    pub core_nodes: usize,
    /// Pointwise residual vectors.
    #[serde(skip)]
    pub field: Option<GridField<f64>>,
}

/// Per-run diagnostics of [`picard_disc`].
#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    /// Iterations of the successful run.
    pub iterations: usize,
    /// Sup change of each iterate.
    pub changes: Vec<f64>,
    /// Ratios of successive changes.
    pub ratios: Vec<f64>,
    /// Largest ratio of the successful run.
    pub max_ratio: f64,
    /// Dilations applied before the run converged.
    pub dilations: usize,
    /// `μ = 2^{−dilations}`.
    pub scale: f64,
    /// Largest `‖A(u)‖` over the nodes of the final iterate.
    pub max_a_norm: f64,
    /// `sup |u|` over the nodes.
    pub sup_u: f64,
    /// `sup |∂_ζ u|`.
    pub sup_du: f64,
    /// Final residual.
    pub residual: ResidualReport,
}

/// `t·ẽ/n` as a vector of `C^n`.
fn base_point(t: &[C64], n: usize) -> Vec<C64> {
    let scale = 1.0 / n as f64;
    (0..n).map(|k| if k + 1 < n { t[k] * scale } else { C64::new(0.0, 0.0) }).collect()
}

/// The disc `D_r` gridded with absolute spacing `h`.
pub fn disc_grid(r: f64, h: f64) -> Result<Arc<Grid<f64>>> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("disc radius must be positive".into()));
    }
    Ok(Arc::new(Grid::build(DomainSpec::disk(C64::new(0.0, 0.0), r, DEFAULT_BOUNDARY_SAMPLES), h)?))
}

/// Solves `u = Ψ(u)` on `D_r` for the structure `field`, assumed normalized
/// so that `B ≡ I` (only `A` is read).
///
/// Each iterate carries `u` and `∂_ζ u`, the latter from the Beurling
/// transform of the density `b = Aᵗ(u) conj(∂_ζ u)`, and
/// `P₁Φ(u)(ζ) = (Tb)(0) + (Sb)(0) ζ`. The run stops once the sup change is
/// below `tol`; [`STALL_RUN`] consecutive change ratios at or above one
/// count as a stall. A stalled run is retried on `A(μ ·)` with
/// `μ = 2^{−k}`, `k ≤ max_dilations`, and the result is scaled back by `μ`.
pub fn picard_disc(
    field: &StructureField,
    e: &[C64],
    t: &[C64],
    opts: &PicardOptions,
) -> Result<(DiscMap, PicardReport)> {
    let n = field.n;
    if e.len() != n || t.len() + 1 != n {
        return Err(Error::InvalidInput(format!("need e in C^{n} and t in C^{}", n.saturating_sub(1))));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidInput("tolerance and iteration cap must be positive".into()));
    }
    let grid = disc_grid(opts.r, opts.h)?;
    let engine = CauchyGreen::new(&grid, KernelConfig::default())?;
    let mut last_err = None;
    for k in 0..=opts.max_dilations {
        let mu = 0.5f64.powi(k as i32);
        let scaled = if k == 0 { field.clone() } else { field.dilated(mu) };
        match iterate(&scaled, &engine, e, t, opts) {
            Ok(mut run) => {
                run.disc.scale = mu;
                if k > 0 {
                    run.disc.u = run.disc.u.map(|v| v * mu);
                    run.disc.du = run.disc.du.map(|v| v * mu);
                    run.disc.anchor.iter_mut().for_each(|v| *v *= mu);
                }
                let residual = jholo_residual(&run.disc.u, field)?;
                let report = PicardReport {
                    iterations: run.changes.len(),
                    max_ratio: run.ratios.iter().copied().fold(0.0, f64::max),
                    changes: run.changes,
                    ratios: run.ratios,
                    dilations: k,
                    scale: mu,
                    max_a_norm: max_a_norm(&run.disc.u, field)?,
                    sup_u: run.disc.u.sup_norm(),
                    sup_du: run.disc.du.sup_norm(),
                    residual,
                };
                return Ok((run.disc, report));
            }
            Err(err @ Error::Divergence { .. }) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    Err(last_err.unwrap_or(Error::Divergence { terms: 0, ratios: Vec::new() }))
}

/// Runs [`picard_disc`] for each parameter value in parallel.
pub fn picard_family(
    field: &StructureField,
    e: &[C64],
    ts: &[Vec<C64>],
    opts: &PicardOptions,
) -> Vec<Result<(DiscMap, PicardReport)>> {
    ts.par_iter().map(|t| picard_disc(field, e, t, opts)).collect()
}

struct Run {
    disc: DiscMap,
    changes: Vec<f64>,
    ratios: Vec<f64>,
}

fn iterate(field: &StructureField, engine: &CauchyGreen<f64>, e: &[C64], t: &[C64], opts: &PicardOptions) -> Result<Run> {
    let grid = engine.grid().clone();
    let n = field.n;
    let base = base_point(t, n);
    let ebar: Vec<C64> = e.iter().map(|v| v.conj()).collect();
    let zero = C64::new(0.0, 0.0);
    let origin = [zero];

    let mut u = GridField::from_fn_vec(&grid, n, |z, out| {
        for c in 0..n {
            out[c] = base[c] + z * ebar[c];
        }
    });
    let mut du = GridField::from_fn_vec(&grid, n, |_, out| out.copy_from_slice(&ebar));
    let mut density;
    let (mut t0, mut s0);
    let mut changes = Vec::new();
    let mut ratios = Vec::new();
    let mut run = 0;
    loop {
        density = beltrami_density(field, &u, &du)?;
        let (tb, sb) = engine.ts_nodes(&density);
        t0 = engine.t_points(&density, &origin);
        s0 = engine.s_points(&density, &origin);
        let mut next_u = GridField::zeros(&grid, n);
        let mut next_du = GridField::zeros(&grid, n);
        for k in 0..grid.len() {
            let z = grid.nodes[k];
            for c in 0..n {
                let i = k * n + c;
                next_u.values[i] = base[c] + z * ebar[c] + tb.values[i] - t0[c] - s0[c] * z;
                next_du.values[i] = ebar[c] + sb.values[i] - s0[c];
            }
        }
        let change = u.values.iter().zip(&next_u.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        u = next_u;
        du = next_du;
        if let Some(&prev) = changes.last() {
            let ratio = if prev > 0.0 { change / prev } else { 0.0 };
            ratios.push(ratio);
            run = if ratio >= 1.0 { run + 1 } else { 0 };
        }
        changes.push(change);
        if change < opts.tol {
            break;
        }
        if run >= STALL_RUN || !change.is_finite() || changes.len() >= opts.max_iter {
            let tail = ratios[ratios.len().saturating_sub(STALL_RUN)..].to_vec();
            return Err(Error::Divergence { terms: changes.len(), ratios: tail });
        }
    }
    let embedded = min_gram(&u) > 0.0;
    let anchor = base.clone();
    Ok(Run {
        disc: DiscMap {
            r: opts.r,
            t: t.to_vec(),
            e: e.to_vec(),
            scale: 1.0,
            grid,
            u,
            du,
            anchor,
            embedded,
            density,
            t0,
            s0,
        },
        changes,
        ratios,
    })
}

/// `b = Aᵗ(u) conj(∂_ζ u)` at every node.
fn beltrami_density(field: &StructureField, u: &GridField<f64>, du: &GridField<f64>) -> Result<GridField<f64>> {
    let n = field.n;
    let len = u.grid.len();
    let values: Vec<Vec<C64>> = (0..len)
        .into_par_iter()
        .map(|k| {
            let z = CVec::from_fn(n, |c, _| u.at(k, c));
            if !field.contains(&z) {
                return Err(Error::DomainExit { node: k });
            }
            let w = CVec::from_fn(n, |c, _| du.at(k, c).conj());
            let b = field.a(&z).transpose() * w;
            Ok(b.iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    Ok(GridField::from_values_vec(&u.grid, n, values.concat()))
}

fn max_a_norm(u: &GridField<f64>, field: &StructureField) -> Result<f64> {
    let n = field.n;
    let norms: Vec<f64> = (0..u.grid.len())
        .into_par_iter()
        .map(|k| {
            let z = CVec::from_fn(n, |c, _| u.at(k, c));
            if !field.contains(&z) {
                return Err(Error::DomainExit { node: k });
            }
            Ok(complex_norm(&field.a(&z)))
        })
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Residual `∂_ζ̄ u − Aᵗ(u) conj(∂_ζ u)` with finite-difference Wirtinger
/// derivatives; fails with the offending node when `u` leaves the domain.
pub fn jholo_residual(u: &GridField<f64>, field: &StructureField) -> Result<ResidualReport> {
    let n = field.n;
    if u.dim != n {
        return Err(Error::InvalidInput(format!("map has {} components, structure has {n}", u.dim)));
    }
    let w = wirtinger(u);
    let grid = &u.grid;
    let res: Vec<Vec<C64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = CVec::from_fn(n, |c, _| u.at(k, c));
            if !field.contains(&z) {
                return Err(Error::DomainExit { node: k });
            }
            let conj_dz = CVec::from_fn(n, |c, _| w.dz.at(k, c).conj());
            let rhs = field.a(&z).transpose() * conj_dz;
            Ok((0..n).map(|c| w.dzbar.at(k, c) - rhs[c]).collect())
        })
        .collect::<Result<_>>()?;
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let margin = CORE_MARGIN * grid.domain.radius;
    let core = grid.interior_nodes(margin);
    let sup = core.iter().map(|&k| norm(&res[k])).fold(0.0, f64::max);
    let l2 = core.iter().map(|&k| grid.weights[k] * norm(&res[k]).powi(2)).sum::<f64>().sqrt();
    let sup_all = res.iter().map(|r| norm(r)).fold(0.0, f64::max);
    let field = GridField::from_values_vec(grid, n, res.concat());
    Ok(ResidualReport { sup, l2, sup_all, core_nodes: core.len(), field: Some(field) })
}

/// Smallest Gram determinant `|u_x|²|u_y|² − (u_x·u_y)²` over the nodes.
fn min_gram(u: &GridField<f64>) -> f64 {
    let w = wirtinger(u);
    let i = Complex::new(0.0, 1.0);
    (0..u.grid.len())
        .map(|k| {
            let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
            for c in 0..u.dim {
                let (p, q) = (w.dz.at(k, c), w.dzbar.at(k, c));
                let ux = p + q;
                let uy = (p - q) * i;
                xx += ux.norm_sqr();
                yy += uy.norm_sqr();
                xy += ux.re * uy.re + ux.im * uy.im;
            }
            xx * yy - xy * xy
        })
        .fold(f64::INFINITY, f64::min)
}
