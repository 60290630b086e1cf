//! Partial derivatives from one-dimensional derivatives along curve families
//! whose velocities at the base point are the directions of a
//! [`DirectionSet`].

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;

use super::curves::{chain_coefficients, stencil_len, stencil_weights};
use super::directions::{degree_indices, perturb_coefficients, DirectionSet, PerturbedTable};
use crate::error::{Error, Result};
use crate::whitney::TensorField;

/// Tolerance of the check `∂_{t₁}R_j(0) = v_j`.
pub const BASE_TOL: f64 = 1e-6;
/// Default parameter step of the curve differences.
pub const DEFAULT_CURVE_STEP: f64 = 1.0 / 32.0;
/// Default bound on `max_j |u_j − v_j|` for the perturbed coefficients.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Difference quotients above this size mark the output as unbounded.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// A family `t ↦ R(t)` of curves in `t₁` parametrized by `t′ = (t₂, …, t_n)`,
/// a local diffeomorphism of `R^n` with `R(0)` the base point.
pub trait CurveFamily: Sync {
    /// Dimension `n`.
    fn dim(&self) -> usize;
    /// `R(t)`.
    fn point(&self, t: &DVector<f64>) -> DVector<f64>;
    /// `t` with `R(t) = x`.
    fn preimage(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
}

/// `R(t) = t₁ v + (0, t′)` for a direction `v` with `v₁ ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFamily {
    /// The direction `v`.
    pub v: DVector<f64>,
}

impl AffineFamily {
    /// One affine family per direction of `ds`.
    pub fn for_directions(ds: &DirectionSet) -> Vec<Self> {
        ds.vectors.iter().map(|v| Self { v: v.clone() }).collect()
    }
}

impl CurveFamily for AffineFamily {
    fn dim(&self) -> usize {
        self.v.len()
    }

    fn point(&self, t: &DVector<f64>) -> DVector<f64> {
        let mut x = &self.v * t[0];
        for i in 1..x.len() {
            x[i] += t[i];
        }
        x
    }

    fn preimage(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.v[0] == 0.0 {
            return Err(Error::Singular("affine family needs v_1 != 0".into()));
        }
        let t1 = x[0] / self.v[0];
        let mut t = x - &self.v * t1;
        t[0] = t1;
        Ok(t)
    }
}

/// One-dimensional data of one curve through the target point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveDatum {
    /// `∂_{t₁}R_j(0)`.
    pub base_velocity: DVector<f64>,
    /// `∂_{t₁}^o R_j` at the target, `o = 1, …, m`.
    pub derivs: Vec<DVector<f64>>,
    /// `∂_{t₁}^i (f ∘ R_j)` at the target, `i = 1, …, m`.
    pub f_derivs: Vec<f64>,
}

/// Partial derivatives `∂^α f`, `1 ≤ |α| ≤ m`, at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Partials {
    /// Highest order `m`.
    pub order: usize,
    /// `∂^α f` keyed by `α`.
    pub values: BTreeMap<Vec<usize>, f64>,
    /// Perturbed coefficients used at the target.
    pub table: PerturbedTable,
}

impl Partials {
    /// `∂^α f`, if `1 ≤ |α| ≤ m`.
    pub fn get(&self, alpha: &[usize]) -> Option<f64> {
        self.values.get(alpha).copied()
    }
}

/// Combines per-curve derivative data into all partials up to order `m`.
///
/// With `u_j = ∂_{t₁}R_j` at the target, the chain rule gives
/// `(u_j · ∂)^m f = ∂_{t₁}^m (f ∘ R_j) − Σ_{|β| < m} Q_{m,β} ∂^β f`, and the
/// perturbed coefficients turn these into `∂^α f = Σ_j Q_{α,j}(u) (u_j · ∂)^m f`.
/// Orders are resolved from `1` upward so the lower terms are known.
pub fn reconstruct_from_data(ds: &DirectionSet, data: &[CurveDatum], delta: f64) -> Result<Partials> {
    if data.len() != ds.len() {
        return Err(Error::InvalidInput(format!("need data for {} curves, got {}", ds.len(), data.len())));
    }
    let order = data.iter().map(|d| d.derivs.len().min(d.f_derivs.len())).min().unwrap_or(0);
    if order == 0 || order > ds.k {
        return Err(Error::InvalidInput(format!("curve data must cover orders 1..=m with m <= {}", ds.k)));
    }
    for (j, (d, v)) in data.iter().zip(&ds.vectors).enumerate() {
        let err = (&d.base_velocity - v).norm();
        if !(err <= BASE_TOL * (1.0 + v.norm())) {
            return Err(Error::InvalidInput(format!(
                "curve {j}: base velocity differs from the direction set by {err:e}"
            )));
        }
    }
    let u: Vec<DVector<f64>> = data.iter().map(|d| d.derivs[0].clone()).collect();
    let table = perturb_coefficients(ds, &u, delta)?;
    let mut values: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for m in 1..=order {
        let principal: Vec<f64> = data
            .iter()
            .map(|d| {
                let mut lower = 0.0;
                for (beta, q) in chain_coefficients(m, &d.derivs[..m]) {
                    if beta.iter().sum::<usize>() < m {
                        lower += q * values[&beta];
                    }
                }
                d.f_derivs[m - 1] - lower
            })
            .collect();
        let q = &table.q[m - 1];
        for (row, alpha) in ds.tables[m - 1].alphas.iter().enumerate() {
            let value: f64 = principal.iter().enumerate().map(|(j, p)| q[(row, j)] * p).sum();
            values.insert(alpha.clone(), value);
        }
    }
    Ok(Partials { order, values, table })
}

/// Options of [`reconstruct_partials`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructOptions {
    /// Parameter step of the differences in `t₁`.
    pub step: f64,
    /// Bound on the perturbation of the velocities.
    pub delta: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { step: DEFAULT_CURVE_STEP, delta: DEFAULT_DELTA }
    }
}

/// All `∂^α f`, `1 ≤ |α| ≤ order`, at `point` from differences of `f` along
/// the curve families, one per direction of `ds`.
///
/// The families' base velocities `∂_{t₁}R_j(0)` are checked against the
/// directions before any differences are taken.
pub fn reconstruct_partials(
    ds: &DirectionSet,
    families: &[&dyn CurveFamily],
    f: &(dyn Fn(&DVector<f64>) -> f64 + Sync),
    point: &DVector<f64>,
    order: usize,
    opts: &ReconstructOptions,
) -> Result<Partials> {
    if families.len() != ds.len() || families.iter().any(|r| r.dim() != ds.n) || point.len() != ds.n {
        return Err(Error::InvalidInput(format!("need {} curve families in R^{}", ds.len(), ds.n)));
    }
    if order == 0 || order > ds.k {
        return Err(Error::InvalidInput(format!("order must lie in 1..={}", ds.k)));
    }
    let h = opts.step;
    let half = stencil_len(order) / 2;
    let data = families
        .par_iter()
        .map(|family| {
            let along = |t0: &DVector<f64>| -> Vec<DVector<f64>> {
                (0..=2 * half)
                    .map(|s| {
                        let mut t = t0.clone();
                        t[0] += (s as f64 - half as f64) * h;
                        family.point(&t)
                    })
                    .collect()
            };
            let diff = |samples: &[DVector<f64>], o: usize| -> DVector<f64> {
                let w = stencil_weights(o);
                let pad = half - w.len() / 2;
                let mut d = DVector::zeros(ds.n);
                for (s, ws) in w.iter().enumerate() {
                    d.axpy(*ws, &samples[pad + s], 1.0);
                }
                d / h.powi(o as i32)
            };
            let origin = DVector::zeros(ds.n);
            let base_velocity = diff(&along(&origin), 1);
            let t = family.preimage(point)?;
            let samples = along(&t);
            let values: Vec<f64> = samples.iter().map(f).collect();
            let derivs = (1..=order).map(|o| diff(&samples, o)).collect();
            let f_derivs = (1..=order)
                .map(|o| {
                    let w = stencil_weights(o);
                    let pad = half - w.len() / 2;
                    w.iter().enumerate().map(|(s, ws)| ws * values[pad + s]).sum::<f64>() / h.powi(o as i32)
                })
                .collect();
            Ok(CurveDatum { base_velocity, derivs, f_derivs })
        })
        .collect::<Result<Vec<_>>>()?;
    reconstruct_from_data(ds, &data, opts.delta)
}

/// Derivative fields from difference quotients along straight lines.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineReconstruction {
    /// Line step `h`.
    pub h: f64,
    /// Subgrid points where every line stencil stays inside the grid.
    pub points: Vec<DVector<f64>>,
    /// `∂^α f` at the points for every `1 ≤ |α| < k`.
    pub partials: BTreeMap<Vec<usize>, Vec<f64>>,
    /// `max_{j, x} |Δ_{h v_j}^m f(x)| / h^m` for `m = 1, …, k`.
    pub max_quotient: Vec<f64>,
    /// Largest difference quotient of the order `k − 1` partials between
    /// neighbouring subgrid points (of `f` itself when `k = 1`).
    pub lipschitz: f64,
    /// Whether the order `k` quotients exceed [`BLOWUP_THRESHOLD`].
    pub unbounded: bool,
}

impl AffineReconstruction {
    /// Index of the subgrid point nearest to `p`.
    pub fn nearest(&self, p: &[f64]) -> Option<usize> {
        let p = DVector::from_column_slice(p);
        (0..self.points.len()).min_by(|&a, &b| {
            let da = (&self.points[a] - &p).norm();
            let db = (&self.points[b] - &p).norm();
            da.total_cmp(&db)
        })
    }
}

/// Partials of a gridded `f` from difference quotients of order up to `k`
/// along the lines `x + t v_j`, combined with the coefficient tables of `ds`.
///
/// Off-grid line samples use the cubic interpolation of the field. Points are
/// taken every `stride` nodes, keeping two cells between each line stencil
/// and the grid boundary.
pub fn affine_family_reconstruct(
    f: &TensorField<f64>,
    ds: &DirectionSet,
    h: f64,
    stride: usize,
) -> Result<AffineReconstruction> {
    let n = ds.n;
    let k = ds.k;
    if f.dim() != n {
        return Err(Error::InvalidInput(format!("field has {} axes, direction set {n}", f.dim())));
    }
    if !(h > 0.0) || stride == 0 {
        return Err(Error::InvalidInput("need h > 0 and stride >= 1".into()));
    }
    let half = stencil_len(k) / 2;
    let spacing = f.spacing();
    let shape = f.shape();
    let reach: Vec<f64> = (0..n)
        .map(|a| ds.vectors.iter().map(|v| v[a].abs()).fold(0.0, f64::max) * h * half as f64)
        .collect();
    let lattice: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            let lo = f.axes[a][0] + 2.0 * spacing[a] + reach[a];
            let hi = f.axes[a][shape[a] - 1] - 2.0 * spacing[a] - reach[a];
            (0..shape[a]).step_by(stride).filter(|&i| f.axes[a][i] >= lo && f.axes[a][i] <= hi).collect()
        })
        .collect();
    if lattice.iter().any(Vec::is_empty) {
        return Err(Error::Resolution("no grid point keeps the line stencils inside the grid".into()));
    }
    let dims: Vec<usize> = lattice.iter().map(Vec::len).collect();
    let count: usize = dims.iter().product();
    let coords = |flat: usize| -> Vec<usize> {
        let mut c = vec![0; n];
        let mut r = flat;
        for a in (0..n).rev() {
            c[a] = r % dims[a];
            r /= dims[a];
        }
        c
    };
    let points: Vec<DVector<f64>> =
        (0..count).map(|flat| DVector::from_iterator(n, coords(flat).iter().enumerate().map(|(a, &c)| f.axes[a][lattice[a][c]]))).collect();

    let weights: Vec<Vec<f64>> = (1..=k).map(stencil_weights).collect();
    // quotients[x][m − 1][j] = Δ_{h v_j}^m f(x) / h^m.
    let quotients: Vec<Vec<Vec<f64>>> = points
        .par_iter()
        .map(|x| {
            let lines: Vec<Vec<f64>> = ds
                .vectors
                .iter()
                .map(|v| {
                    (0..=2 * half)
                        .map(|s| {
                            let p = x + v * ((s as f64 - half as f64) * h);
                            f.interpolate(p.as_slice())
                        })
                        .collect()
                })
                .collect();
            weights
                .iter()
                .enumerate()
                .map(|(o, w)| {
                    let pad = half - w.len() / 2;
                    lines
                        .iter()
                        .map(|line| {
                            w.iter().enumerate().map(|(s, ws)| ws * line[pad + s]).sum::<f64>() / h.powi(o as i32 + 1)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let max_quotient: Vec<f64> = (0..k)
        .map(|m| quotients.iter().flat_map(|q| q[m].iter()).fold(0.0, |acc: f64, v| acc.max(v.abs())))
        .collect();
    let mut partials: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for m in 1..k {
        let table = &ds.tables[m - 1];
        for (row, alpha) in table.alphas.iter().enumerate() {
            let values =
                quotients.iter().map(|q| q[m - 1].iter().enumerate().map(|(j, d)| table.c[(row, j)] * d).sum()).collect();
            partials.insert(alpha.clone(), values);
        }
    }
    let top: Vec<Vec<f64>> = if k == 1 {
        vec![points.iter().map(|p| f.interpolate(p.as_slice())).collect()]
    } else {
        degree_indices(n, k - 1).iter().map(|a| partials[a].clone()).collect()
    };
    let mut lipschitz: f64 = 0.0;
    for flat in 0..count {
        let c = coords(flat);
        let mut stride_flat = 1;
        for a in (0..n).rev() {
            if c[a] + 1 < dims[a] {
                let other = flat + stride_flat;
                let dist = (&points[other] - &points[flat]).norm();
                for field in &top {
                    lipschitz = lipschitz.max((field[other] - field[flat]).abs() / dist);
                }
            }
            stride_flat *= dims[a];
        }
    }
    let unbounded = !(max_quotient[k - 1] <= BLOWUP_THRESHOLD);
    Ok(AffineReconstruction { h, points, partials, max_quotient, lipschitz, unbounded })
}
