//! Fourier transforms of windowed boundary traces along the real segment,
//! their path representation through the adjacent half-disk, and fitted
//! algebraic decay exponents.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain_grid::{DomainKind, GridField};
use crate::error::{Error, Result};
use crate::whitney::fd_weights;
use crate::C64;

/// Rows of the half-disk grid used to extrapolate the trace to `y = 0`.
pub const TRACE_ROWS: usize = 4;
/// Largest path height `η`.
pub const ETA_MAX: f64 = 0.1;
/// Fits with `R²` below this value are marked unreliable.
pub const MIN_R2: f64 = 0.8;
/// Samples per oscillation period taken for the envelope of `|λ|`.
pub const ENVELOPE_SAMPLES: usize = 8;
/// Design tolerance between the path value and the direct value of `λ(ξ, 0)`.
pub const PATH_TOL: f64 = 0.1;

/// Shape of the window `χ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// `(1 − (x/r)²)^5`, a `C⁴` polynomial bump.
    Bump,
    /// `exp(−(6x/r)²)` cut at `|x| = r`.
    Gaussian,
}

/// A window `χ` supported in `[−r, r]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Shape.
    pub kind: WindowKind,
    /// Support radius.
    pub r: f64,
}

impl Window {
    /// The `C⁴` bump of radius `r`.
    pub fn bump(r: f64) -> Self {
        Self { kind: WindowKind::Bump, r }
    }

    /// `χ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let s = x / self.r;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        match self.kind {
            WindowKind::Bump => (1.0 - s * s).powi(5),
            WindowKind::Gaussian => (-36.0 * s * s).exp(),
        }
    }
}

/// `Σ_k w_k χ(x_k) v_k e^{−i x_k ξ}`: the quadrature of `∫ χ v e^{−ixξ} dx`.
pub fn windowed_transform(x: &[f64], weights: &[f64], values: &[C64], window: &Window, xi: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for ((&xk, &wk), &vk) in x.iter().zip(weights).zip(values) {
        let chi = window.eval(xk);
        if chi != 0.0 {
            acc += vk * Complex::from_polar(wk * chi, -xk * xi);
        }
    }
    acc
}

/// Samples of a half-disk field on the lattice columns over a segment, with
/// the trace at `y = 0` extrapolated column by column.
#[derive(Clone, Debug)]
pub struct SegmentRows {
    /// `+1` above the segment, `−1` below.
    pub sign: f64,
    /// Column abscissae.
    pub x: Vec<f64>,
    /// Signed heights: `0` for the trace, then the row centers.
    pub y: Vec<f64>,
    /// `values[k][i]` at height `y[k]` and column `x[i]`.
    pub values: Vec<Vec<C64>>,
}

impl SegmentRows {
    /// The extrapolated trace `f(x, 0)`.
    pub fn trace(&self) -> &[C64] {
        &self.values[0]
    }
}

/// Collects the columns with `|x| < x_max` and `rows` lattice rows next to
/// the segment of a half-disk field.
///
/// The trace uses cubic extrapolation from the [`TRACE_ROWS`] nearest rows,
/// whose error is a smooth function of `x` for smooth fields.
pub fn segment_rows(field: &GridField<f64>, x_max: f64, rows: usize) -> Result<SegmentRows> {
    let grid = &field.grid;
    let sign = match grid.domain.kind {
        DomainKind::UpperHalfDisk => 1.0,
        DomainKind::LowerHalfDisk => -1.0,
        _ => return Err(Error::InvalidInput("segment traces need a half-disk grid".into())),
    };
    let radius = grid.domain.radius;
    let h = grid.h;
    if !(x_max + 2.0 * h < radius) {
        return Err(Error::InvalidInput(format!(
            "window support {x_max} exceeds the segment of radius {radius} at spacing {h}"
        )));
    }
    let rows = rows.max(TRACE_ROWS);
    let row_index = |k: usize| if sign > 0.0 { k as i32 } else { -(k as i32) - 1 };
    let i_lo = (-x_max / h).floor() as i32 - 1;
    let i_hi = (x_max / h).ceil() as i32 + 1;
    let mut x = Vec::new();
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for i in i_lo..=i_hi {
        let xi = grid.cell_center(i, 0).re;
        if xi.abs() >= x_max {
            continue;
        }
        let mut col = Vec::with_capacity(rows);
        for k in 0..rows {
            let node = grid.node_at(i, row_index(k)).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "column x = {xi} has fewer than {rows} rows; the window support exceeds the segment"
                ))
            })?;
            col.push(field.at(node, 0));
        }
        x.push(xi);
        cols.push(col);
    }
    let offsets: Vec<f64> = (0..TRACE_ROWS).map(|k| k as f64 + 0.5).collect();
    let w0 = fd_weights(0, &offsets);
    let mut y = vec![0.0];
    y.extend((0..rows).map(|k| sign * (k as f64 + 0.5) * h));
    let mut values = vec![Vec::with_capacity(x.len()); rows + 1];
    for col in &cols {
        let t: C64 = w0.iter().zip(col).map(|(w, v)| v * *w).sum();
        values[0].push(t);
        for (k, v) in col.iter().enumerate() {
            values[k + 1].push(*v);
        }
    }
    Ok(SegmentRows { sign, x, y, values })
}

/// Options of [`fourier_trace_decay`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    /// The window `χ`.
    pub window: Window,
    /// Largest `|ξ|`.
    pub xi_max: f64,
    /// Smallest `|ξ|` of the geometric grid.
    pub xi_min: f64,
    /// Grid points per octave.
    pub per_octave: usize,
}

impl DecayOptions {
    /// Bump window of radius `window_r` up to `xi_max`.
    pub fn new(window_r: f64, xi_max: f64) -> Self {
        Self { window: Window::bump(window_r), xi_max, xi_min: 1.0, per_octave: 8 }
    }

    /// The geometric magnitudes `|ξ|` from `xi_min` to `xi_max`.
    pub fn magnitudes(&self) -> Vec<f64> {
        let octaves = (self.xi_max / self.xi_min).log2();
        let count = (octaves * self.per_octave as f64).round() as usize;
        (0..=count).map(|k| self.xi_min * 2f64.powf(k as f64 / self.per_octave as f64)).collect()
    }
}

/// Least-squares fit `log A ≈ c − p log(1 + |ξ|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Exponent `p`.
    pub exponent: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Smallest `|ξ|` in the fit window.
    pub lo: f64,
    /// Largest `|ξ|` in the fit window.
    pub hi: f64,
    /// `r2 ≥ MIN_R2`.
    pub reliable: bool,
}

/// Fits the exponent on `|ξ| ∈ [xi_max / 16, xi_max]`, ignoring zero samples.
/// Identically zero data yields an infinite exponent marked unreliable.
pub fn fit_decay(xi: &[f64], amplitude: &[f64], xi_max: f64) -> DecayFit {
    let lo = xi_max / 16.0;
    let pts: Vec<(f64, f64)> = xi
        .iter()
        .zip(amplitude)
        .filter(|(x, a)| x.abs() >= lo * (1.0 - 1e-12) && x.abs() <= xi_max * (1.0 + 1e-12) && **a > 0.0)
        .map(|(x, a)| ((1.0 + x.abs()).ln(), a.ln()))
        .collect();
    if pts.len() < 2 {
        return DecayFit { exponent: f64::INFINITY, r2: 0.0, lo, hi: xi_max, reliable: false };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    DecayFit { exponent: -slope, r2, lo, hi: xi_max, reliable: r2 >= MIN_R2 }
}

/// Decay of `λ(ξ, 0) = ∫ χ f(x, 0) e^{−ixξ} dx` along one ray of `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// `+1` for `ξ > 0` (upper data), `−1` for `ξ < 0` (lower data).
    pub direction: f64,
    /// Signed frequencies.
    pub xi: Vec<f64>,
    /// `|λ(ξ, 0)|` from the extrapolated trace.
    pub direct: Vec<f64>,
    /// Largest `|λ(ξ′, 0)|` over one oscillation period `ξ′ ∈ [ξ, ξ ± π/r)`.
    pub envelope: Vec<f64>,
    /// `|λ(ξ, η) − ∫₀^η ∂_y λ(ξ, y) dy|` with `η = ±min(0.1, 1/|ξ|)`.
    pub path: Vec<f64>,
    /// `|path − direct| / |direct|`.
    pub path_deviation: Vec<f64>,
    /// Fit of the envelope.
    pub fit: DecayFit,
}

impl DecayReport {
    /// Largest path deviation over `|ξ| ≤ xi`.
    pub fn max_path_deviation_below(&self, xi: f64) -> f64 {
        self.xi
            .iter()
            .zip(&self.path_deviation)
            .filter(|(x, _)| x.abs() <= xi)
            .fold(0.0, |m, (_, d)| m.max(*d))
    }
}

/// Fourier decay of the windowed trace of a half-disk field.
///
/// Upper half-disk data give the ray `ξ > 0` and lower data `ξ < 0`, where
/// `e^{−i(x−iy)ξ}` decays into the domain. `λ(ξ, y) = e^{−yξ} μ(ξ, y)` with
/// `μ = ∫ χ f(x, y) e^{−ixξ} dx` by the midpoint rule on the lattice
/// columns; `∂_y λ = e^{−yξ} (∫ χ ∂_y f e^{−ixξ} − ξ μ)` with `∂_y f` from
/// five-point stencils over the heights. The path integral uses four-point
/// Gauss-Legendre panels of width `h` on cubic interpolants in `y`.
pub fn fourier_trace_decay(field: &GridField<f64>, opts: &DecayOptions) -> Result<DecayReport> {
    let h = field.grid.h;
    let rows = (ETA_MAX / h).ceil() as usize + 4;
    let seg = segment_rows(field, opts.window.r, rows)?;
    let sign = seg.sign;
    let weights = vec![h; seg.x.len()];
    let dy = y_derivative(&seg);
    let xi: Vec<f64> = opts.magnitudes().into_iter().map(|m| sign * m).collect();
    let period = std::f64::consts::PI / opts.window.r;

    let per_xi: Vec<(f64, f64, f64)> = xi
        .par_iter()
        .map(|&xi| {
            let mu: Vec<C64> = seg.values.iter().map(|row| windowed_transform(&seg.x, &weights, row, &opts.window, xi)).collect();
            let nu: Vec<C64> = dy.iter().map(|row| windowed_transform(&seg.x, &weights, row, &opts.window, xi)).collect();
            let lambda: Vec<C64> = seg.y.iter().zip(&mu).map(|(y, m)| m * (-y * xi).exp()).collect();
            let lambda_y: Vec<C64> =
                seg.y.iter().zip(mu.iter().zip(&nu)).map(|(y, (m, n))| (n - m * xi) * (-y * xi).exp()).collect();
            let direct = lambda[0].norm();
            let eta = sign * ETA_MAX.min(1.0 / xi.abs());
            let path = (lagrange4(&seg.y, &lambda, eta) - integrate(&seg.y, &lambda_y, eta, h)).norm();
            let envelope = (0..ENVELOPE_SAMPLES)
                .map(|m| {
                    let xm = xi + sign * period * m as f64 / ENVELOPE_SAMPLES as f64;
                    windowed_transform(&seg.x, &weights, seg.trace(), &opts.window, xm).norm()
                })
                .fold(0.0, f64::max);
            (direct, envelope, path)
        })
        .collect();
    let direct: Vec<f64> = per_xi.iter().map(|v| v.0).collect();
    let envelope: Vec<f64> = per_xi.iter().map(|v| v.1).collect();
    let path: Vec<f64> = per_xi.iter().map(|v| v.2).collect();
    let path_deviation = direct
        .iter()
        .zip(&path)
        .map(|(d, p)| if *d > 0.0 { (p - d).abs() / d } else if *p == 0.0 { 0.0 } else { f64::INFINITY })
        .collect();
    let fit = fit_decay(&xi, &envelope, opts.xi_max);
    Ok(DecayReport { direction: sign, xi, direct, envelope, path, path_deviation, fit })
}

/// `∂_y f` at every height by five-point stencils on the nearest heights.
fn y_derivative(seg: &SegmentRows) -> Vec<Vec<C64>> {
    let m = seg.y.len();
    (0..m)
        .map(|k| {
            let start = k.saturating_sub(2).min(m - 5);
            let offsets: Vec<f64> = (start..start + 5).map(|q| seg.y[q] - seg.y[k]).collect();
            let w = fd_weights(1, &offsets);
            (0..seg.x.len()).map(|i| (0..5).map(|q| seg.values[start + q][i] * w[q]).sum()).collect()
        })
        .collect()
}

/// Cubic interpolation through the four heights nearest `y`.
fn lagrange4(ys: &[f64], vals: &[C64], y: f64) -> C64 {
    let m = ys.len();
    let nearest = (0..m).min_by(|&a, &b| (ys[a] - y).abs().total_cmp(&(ys[b] - y).abs())).unwrap_or(0);
    let start = nearest.saturating_sub(1).min(m - 4);
    let offsets: Vec<f64> = (start..start + 4).map(|q| ys[q] - y).collect();
    let w = fd_weights(0, &offsets);
    (0..4).map(|q| vals[start + q] * w[q]).sum()
}

/// `∫₀^η` of the cubic interpolant, by four-point Gauss-Legendre panels.
fn integrate(ys: &[f64], vals: &[C64], eta: f64, h: f64) -> C64 {
    let rule = GaussLegendre::new(4).expect("valid degree");
    let panels = (eta.abs() / h).ceil().max(1.0) as usize;
    let width = eta / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = width * (p as f64 + 0.5);
        for &(t, w) in rule.as_node_weight_pairs() {
            acc += lagrange4(ys, vals, mid + 0.5 * width * t) * (0.5 * width * w);
        }
    }
    acc
}
