//! Formal jets of curves attached to a line and their extension to
//! approximately pseudoholomorphic half-discs.
//!
//! Points of `C^n` are real vectors `(x₁, …, x_n, y₁, …, y_n)` and the
//! structure `J(p)` acts on them as in [`crate::structures`]. A map
//! `u(x, y)` is pseudoholomorphic when `∂_y u = J(u) ∂_x u`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::field::{to_complex, StructureField};
use crate::error::{Error, Result};
use crate::structures::{CMat, CVec, RMat};
use crate::whitney::{
    fd_weights, smooth_bump, LayerExtension, TensorField, WhitneyOptions, DEFAULT_MOLLIFIER,
    DEFAULT_QUAD_POINTS,
};

/// Default step in `y` for the Taylor coefficients of `J(u(x, y))`.
pub const DEFAULT_JET_STEP: f64 = 1e-2;
/// Points of the one-dimensional difference stencils in `x`.
const X_STENCIL: usize = 5;

/// A curve `u₀: (a, b) → R^{2n}` sampled on a uniform axis.
#[derive(Clone, Debug)]
pub struct CurveSamples {
    /// Uniform, increasing sample positions.
    pub x: Vec<f64>,
    /// `u₀(x)` in real components.
    pub values: Vec<DVector<f64>>,
}

impl CurveSamples {
    /// Samples `f` at `x`.
    pub fn from_fn(x: Vec<f64>, f: impl Fn(f64) -> DVector<f64>) -> Self {
        let values = x.iter().map(|&s| f(s)).collect();
        Self { x, values }
    }

    /// Real dimension `2n`.
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    fn spacing(&self) -> Result<f64> {
        let m = self.x.len();
        if m < X_STENCIL || self.values.len() != m {
            return Err(Error::Resolution(format!("need at least {X_STENCIL} curve samples")));
        }
        let dim = self.dim();
        if dim == 0 || dim % 2 == 1 || self.values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("curve values must share an even real dimension".into()));
        }
        let h = (self.x[m - 1] - self.x[0]) / (m - 1) as f64;
        if !(h > 0.0) || self.x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::InvalidInput("curve samples must be uniform and increasing".into()));
        }
        Ok(h)
    }
}

/// Settings of [`approx_jet`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JetOptions {
    /// Step `η` of the stencils in `y` applied to `J(u(x, y))`.
    pub step: f64,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self { step: DEFAULT_JET_STEP }
    }
}

/// Coefficients of `u(x, y) = u₀(x) + Σ_{i=1}^{l+1} a_i(x) y^i`.
#[derive(Clone, Debug)]
pub struct JetCoefficients {
    /// Sample positions.
    pub x: Vec<f64>,
    /// `u₀` at the samples.
    pub u0: Vec<DVector<f64>>,
    /// `a[i − 1][k] = a_i(x_k)` for `i = 1, …, l + 1`.
    pub a: Vec<Vec<DVector<f64>>>,
}

impl JetCoefficients {
    /// Order `l`.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    /// The truncated series at sample `k`.
    pub fn series(&self, k: usize, y: f64) -> DVector<f64> {
        let mut out = self.u0[k].clone();
        let mut p = 1.0;
        for a in &self.a {
            p *= y;
            out += &a[k] * p;
        }
        out
    }
}

/// Solves `∂_y u = J(u) ∂_x u` formally in powers of `y` up to `y^l`.
///
/// Writing `u = u₀ + Σ a_i y^i`, the coefficient of `y^m` gives
/// `(m + 1) a_{m+1} = Σ_{p ≤ m} J_p P_{m−p}`, where `P_q = ∂_x a_q`
/// (five-point differences on the samples, `a₀ = u₀`) and `J_p` is the `p`-th
/// Taylor coefficient in `y` of `J(u₀ + Σ_{i ≤ p} a_i y^i)`, taken with a
/// central stencil of step `opts.step`. So `a₁ = J(u₀) ∂_x u₀`.
pub fn approx_jet<F>(j: F, u0: &CurveSamples, l: usize, opts: &JetOptions) -> Result<JetCoefficients>
where
    F: Fn(&DVector<f64>) -> Result<RMat> + Sync,
{
    let h = u0.spacing()?;
    if u0.x.len() < X_STENCIL + l {
        return Err(Error::Resolution(format!("order {l} needs at least {} curve samples", X_STENCIL + l)));
    }
    if !(opts.step > 0.0) {
        return Err(Error::InvalidInput("jet step must be positive".into()));
    }
    let m = u0.x.len();
    let mut a: Vec<Vec<DVector<f64>>> = Vec::with_capacity(l + 1);
    let mut dx: Vec<Vec<DVector<f64>>> = vec![x_derivative(&u0.values, h)];
    // Taylor coefficients J_p of J(u(x, ·)) per sample, filled one order at a time.
    let mut jc: Vec<Vec<RMat>> = Vec::with_capacity(l + 1);
    for i in 1..=l + 1 {
        let p = i - 1;
        let coeff_p: Vec<RMat> = (0..m)
            .into_par_iter()
            .map(|k| taylor_coefficient(&j, &u0.values[k], &a, k, p, opts.step))
            .collect::<Result<_>>()?;
        jc.push(coeff_p);
        let next: Vec<DVector<f64>> = (0..m)
            .map(|k| {
                let mut g = DVector::zeros(u0.dim());
                for q in 0..=p {
                    g += &jc[q][k] * &dx[p - q][k];
                }
                g / i as f64
            })
            .collect();
        dx.push(x_derivative(&next, h));
        a.push(next);
    }
    Ok(JetCoefficients { x: u0.x.clone(), u0: u0.values.clone(), a })
}

/// `(1/p!) ∂_y^p J(u₀ + Σ_{i ≤ p} a_i y^i)` at `y = 0`.
fn taylor_coefficient<F>(j: &F, u0: &DVector<f64>, a: &[Vec<DVector<f64>>], k: usize, p: usize, step: f64) -> Result<RMat>
where
    F: Fn(&DVector<f64>) -> Result<RMat>,
{
    if p == 0 {
        return j(u0);
    }
    let radius = (p / 2 + 2) as isize;
    let offsets: Vec<f64> = (-radius..=radius).map(|s| s as f64).collect();
    let weights = fd_weights(p, &offsets);
    let dim = u0.len();
    let mut acc = DMatrix::zeros(dim, dim);
    for (s, w) in offsets.iter().zip(&weights) {
        if *w == 0.0 {
            continue;
        }
        let y = s * step;
        let mut point = u0.clone();
        let mut pow = 1.0;
        for ai in a.iter().take(p) {
            pow *= y;
            point += &ai[k] * pow;
        }
        acc += j(&point)? * *w;
    }
    let factorial: f64 = (1..=p).map(|v| v as f64).product();
    Ok(acc / (step.powi(p as i32) * factorial))
}

/// Five-point first differences, shifted one-sided near the ends.
fn x_derivative(values: &[DVector<f64>], h: f64) -> Vec<DVector<f64>> {
    let m = values.len();
    let half = X_STENCIL / 2;
    (0..m)
        .map(|k| {
            let start = k.saturating_sub(half).min(m - X_STENCIL);
            let offsets: Vec<f64> = (start..start + X_STENCIL).map(|s| s as f64 - k as f64).collect();
            let weights = fd_weights(1, &offsets);
            let mut d = DVector::zeros(values[k].len());
            for (s, w) in (start..start + X_STENCIL).zip(&weights) {
                d += &values[s] * *w;
            }
            d / h
        })
        .collect()
}

/// Settings of [`attach_half_disc`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfDiscOptions {
    /// Half-width `r` of the output rectangle `[−r, r] × [0, δ]`.
    pub r: f64,
    /// Height `δ`.
    pub delta: f64,
    /// Intervals of the uniform output axis in `y`.
    pub ny: usize,
    /// Dyadic bands reported below `δ`.
    pub bands: usize,
    /// Sample rows per band.
    pub band_samples: usize,
    /// Cutoff widths `δ_i`, `l + 2` of them; `None` gives
    /// `δ_i = 2δ(1 + 2^{−i})`, so that every cutoff is 1 on `[0, δ]`.
    pub schedule: Option<Vec<f64>>,
    /// Mollifier half-width of the coefficients.
    pub mollifier: f64,
    /// Gauss-Legendre points of the mollifier rule.
    pub quad_points: usize,
    /// Jet solver settings.
    pub jet: JetOptions,
    /// Largest step of the difference quotients of `u` used for `F`.
    pub fd_step: f64,
}

impl Default for HalfDiscOptions {
    fn default() -> Self {
        Self {
            r: 0.5,
            delta: 0.25,
            ny: 32,
            bands: 6,
            band_samples: 8,
            schedule: None,
            mollifier: DEFAULT_MOLLIFIER,
            quad_points: DEFAULT_QUAD_POINTS,
            jet: JetOptions::default(),
            fd_step: 1e-3,
        }
    }
}

/// `sup |F|` on one dyadic band `y ∈ [lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    /// Band index `j` with `hi = 2^{−j}`.
    pub j: usize,
    /// Lower edge `2^{−j−1}`.
    pub lo: f64,
    /// Upper edge `2^{−j}`.
    pub hi: f64,
    /// `sup |F|` over the band samples.
    pub sup_f: f64,
    /// `sup |F| / y^l`.
    pub ratio: f64,
    /// `sup |F| / y^{l+1}`.
    pub ratio_next: f64,
}

/// An extended half-disc with its defect report.
#[derive(Clone, Debug)]
pub struct HalfDisc {
    /// Order `l` of the matched jet.
    pub l: usize,
    /// Output positions in `x`: midpoints of the curve samples inside `[−r, r]`.
    pub x: Vec<f64>,
    /// Uniform output axis on `[0, δ]`.
    pub y: Vec<f64>,
    /// Real components of `u` on the `x × y` grid.
    pub u: Vec<Vec<DVector<f64>>>,
    /// Formal jet coefficients.
    pub jet: JetCoefficients,
    /// Per-band defect.
    pub bands: Vec<BandReport>,
    /// `sup |F|` over the output grid.
    pub sup_f: f64,
    layers: Vec<LayerExtension<f64>>,
}

impl HalfDisc {
    /// `u(x, y)` in real components.
    pub fn eval(&self, x: f64, y: f64) -> DVector<f64> {
        DVector::from_iterator(self.layers.len(), self.layers.iter().map(|layer| layer.eval(&[x], y)))
    }

    /// `(D, F)` with `du(∂_z̄) = D·X(u) + F·conj(X(u))`, difference step `s`.
    pub fn defect(&self, field: &StructureField, x: f64, y: f64, s: f64) -> Result<(CVec, CVec)> {
        let n = field.n;
        let u = to_complex(&self.eval(x, y));
        if !field.contains(&u) {
            return Err(Error::InvalidInput(format!(
                "half-disc leaves the coefficient domain at ({x}, {y}); use a smaller height"
            )));
        }
        let dxu = central(|t| self.eval(x + t, y), s);
        let dyu = central(|t| self.eval(x, y + t), s);
        let i = Complex::new(0.0, 1.0);
        let (zx, zy) = (to_complex(&dxu), to_complex(&dyu));
        let dzbar = (&zx + zy.map(|v| v * i)) * Complex::new(0.5, 0.0);
        let dz = (&zx - zy.map(|v| v * i)) * Complex::new(0.5, 0.0);
        let (a, b) = field.ab(&u);
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, n)).copy_from(&b);
        m.view_mut((n, 0), (n, n)).copy_from(&b.map(|v| v.conj()));
        m.view_mut((n, n), (n, n)).copy_from(&a.map(|v| v.conj()));
        let rhs = CVec::from_fn(2 * n, |k, _| if k < n { dzbar[k] } else { dz[k - n].conj() });
        let sol = m
            .transpose()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("structure block is singular at ({x}, {y})")))?;
        Ok((sol.rows(0, n).into_owned(), sol.rows(n, n).into_owned()))
    }
}

/// Fourth-order central difference of a vector function at 0.
fn central(f: impl Fn(f64) -> DVector<f64>, s: f64) -> DVector<f64> {
    let (p1, m1, p2, m2) = (f(s), f(-s), f(2.0 * s), f(-2.0 * s));
    ((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * s)
}

/// Builds `u = u₀ + Σ a_i y^i g(y/δ_i)` from the jet of order `l` through
/// Whitney layers with data `f_i = i!·a_i`, samples it on `[−r, r] × [0, δ]`,
/// and reports `sup |F|` on the dyadic bands `[2^{−j−1}, 2^{−j}] ⊂ (0, δ]`.
///
/// The curve samples must cover `[−r, r]` with room for the stencils and the
/// mollifier.
pub fn attach_half_disc(
    field: &StructureField,
    u0: &CurveSamples,
    l: usize,
    opts: &HalfDiscOptions,
) -> Result<HalfDisc> {
    let dim = u0.dim();
    if dim != 2 * field.n {
        return Err(Error::InvalidInput(format!("curve has {dim} real components, structure needs {}", 2 * field.n)));
    }
    if !(opts.r > 0.0 && opts.delta > 0.0 && opts.delta < 1.0) || opts.ny == 0 || opts.band_samples == 0 {
        return Err(Error::InvalidInput("need r > 0, 0 < delta < 1 and positive sample counts".into()));
    }
    let hx = u0.spacing()?;
    let reach = opts.delta * opts.mollifier + 3.0 * hx;
    if u0.x[0] > -opts.r - reach || u0.x[u0.x.len() - 1] < opts.r + reach {
        return Err(Error::InvalidInput(format!("curve samples must cover [-{0}, {0}] with margin {reach}", opts.r + reach)));
    }
    let jet = approx_jet(|p| field.j_at(p), u0, l, &opts.jet)?;
    let order = l + 2;
    let schedule = opts
        .schedule
        .clone()
        .unwrap_or_else(|| (0..order).map(|i| 2.0 * opts.delta * (1.0 + 0.5f64.powi(i as i32))).collect());
    let wopts: WhitneyOptions<f64> = WhitneyOptions {
        schedule,
        mollifier: opts.mollifier,
        quad_points: opts.quad_points,
        y_axis: vec![0.0],
    };
    let axes = vec![jet.x.clone()];
    let layers: Vec<LayerExtension<f64>> = (0..dim)
        .map(|c| {
            let mut jets = Vec::with_capacity(order);
            jets.push(TensorField::new(axes.clone(), jet.u0.iter().map(|v| v[c]).collect())?);
            let mut factorial = 1.0;
            for (i, ai) in jet.a.iter().enumerate() {
                factorial *= (i + 1) as f64;
                jets.push(TensorField::new(axes.clone(), ai.iter().map(|v| v[c] * factorial).collect())?);
            }
            LayerExtension::new(&jets, smooth_bump, &wopts)
        })
        .collect::<Result<_>>()?;

    let x: Vec<f64> = jet.x.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|v| v.abs() <= opts.r).collect();
    let y: Vec<f64> = (0..=opts.ny).map(|k| opts.delta * k as f64 / opts.ny as f64).collect();
    let mut disc = HalfDisc { l, x, y, u: Vec::new(), jet, bands: Vec::new(), sup_f: 0.0, layers };

    let rows: Vec<Result<Vec<DVector<f64>>>> = disc
        .y
        .par_iter()
        .map(|&yv| {
            disc.x
                .iter()
                .map(|&xv| {
                    let u = disc.eval(xv, yv);
                    if !field.contains(&to_complex(&u)) {
                        return Err(Error::InvalidInput(format!(
                            "half-disc leaves the coefficient domain at ({xv}, {yv}); use a smaller height"
                        )));
                    }
                    Ok(u)
                })
                .collect()
        })
        .collect();
    disc.u = rows.into_iter().collect::<Result<_>>()?;

    let defect_sup = |yv: f64| -> Result<f64> {
        let s = opts.fd_step.min(0.25 * yv);
        let vals: Vec<f64> = disc
            .x
            .par_iter()
            .map(|&xv| disc.defect(field, xv, yv, s).map(|(_, f)| f.norm()))
            .collect::<Result<_>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    };
    let mut sup_f: f64 = 0.0;
    for &yv in disc.y.iter().skip(1) {
        sup_f = sup_f.max(defect_sup(yv)?);
    }
    let j0 = (1.0 / opts.delta).log2().ceil().max(0.0) as usize;
    let mut bands = Vec::with_capacity(opts.bands);
    for j in j0..j0 + opts.bands {
        let hi = 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        let mut band_sup: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        let mut ratio_next: f64 = 0.0;
        for s in 0..opts.band_samples {
            let yv = lo + (hi - lo) * (s as f64 + 0.5) / opts.band_samples as f64;
            let f = defect_sup(yv)?;
            band_sup = band_sup.max(f);
            ratio = ratio.max(f / yv.powi(l as i32));
            ratio_next = ratio_next.max(f / yv.powi(l as i32 + 1));
        }
        bands.push(BandReport { j, lo, hi, sup_f: band_sup, ratio, ratio_next });
    }
    disc.bands = bands;
    disc.sup_f = sup_f;
    Ok(disc)
}
