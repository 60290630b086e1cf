//! Jet families and their Whitney extension off `{y = 0}`.

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tensor::{multi_indices, uniform_axis, TensorField, MAX_DIM};
use crate::error::{Error, Result};
use crate::Real;

/// Half-width of the default mollifier support.
pub const DEFAULT_MOLLIFIER: f64 = 0.125;
/// First entry of the default cutoff-width schedule.
pub const DEFAULT_DELTA0: f64 = 0.25;
/// Gauss-Legendre points per axis for the mollifier integral.
pub const DEFAULT_QUAD_POINTS: usize = 8;

/// One prescribed normal derivative `∂_y^I Ef(x, 0) = f_I(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetEntry<T> {
    /// Multi-index `I` over the `y` variables.
    pub index: Vec<usize>,
    /// Samples of `f_I` on the tensor grid of [`JetFamily::x_axes`].
    pub values: Vec<T>,
}

/// A finite jet on `{y = 0} ⊂ R^n × R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetFamily<T> {
    /// Number of `x` variables.
    pub n: usize,
    /// Number of `y` variables.
    pub m: usize,
    /// Smoothness budget; every listed `|I|` is below it.
    pub order: usize,
    /// Uniform axes of the `x` grid.
    pub x_axes: Vec<Vec<T>>,
    /// Listed entries; unlisted indices with `|I| < order` are zero.
    pub entries: Vec<JetEntry<T>>,
    /// Every `f_I` vanishes at `|x| > support_radius`.
    pub support_radius: T,
}

impl<T: Real> JetFamily<T> {
    /// Validates dimensions, distinct indices, `|I| < order` and support.
    pub fn new(
        m: usize,
        order: usize,
        x_axes: Vec<Vec<T>>,
        entries: Vec<JetEntry<T>>,
        support_radius: T,
    ) -> Result<Self> {
        let n = x_axes.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("jets need at least one x and one y variable".into()));
        }
        if !(support_radius > T::zero() && support_radius < T::one()) {
            return Err(Error::InvalidInput(format!("support radius {support_radius} must lie in (0, 1)")));
        }
        let probe = TensorField::new(x_axes.clone(), vec![T::zero(); x_axes.iter().map(Vec::len).product()])?;
        let mut point = vec![T::zero(); n];
        for (k, e) in entries.iter().enumerate() {
            if e.index.len() != m {
                return Err(Error::InvalidInput(format!("entry {k}: index {:?} is not in {m} variables", e.index)));
            }
            if e.index.iter().sum::<usize>() >= order {
                return Err(Error::InvalidInput(format!("entry {k}: |I| must be below {order}")));
            }
            if entries[..k].iter().any(|p| p.index == e.index) {
                return Err(Error::InvalidInput(format!("entry {k}: duplicate index {:?}", e.index)));
            }
            if e.values.len() != probe.values.len() {
                return Err(Error::InvalidInput(format!("entry {k}: wrong sample count")));
            }
            for (flat, v) in e.values.iter().enumerate() {
                probe.point(flat, &mut point);
                let r = point.iter().map(|&x| x * x).sum::<T>().sqrt();
                if !v.is_finite() || (r > support_radius && *v != T::zero()) {
                    return Err(Error::InvalidInput(format!("entry {k}: sample {flat} violates support or finiteness")));
                }
            }
        }
        Ok(Self { n, m, order, x_axes, entries, support_radius })
    }

    /// Samples of `f_I`, `None` when the index is not listed.
    pub fn get(&self, index: &[usize]) -> Option<&[T]> {
        self.entries.iter().find(|e| e.index == index).map(|e| e.values.as_slice())
    }

    /// `f_I` as a field on the `x` grid, zero when unlisted.
    pub fn field(&self, index: &[usize]) -> TensorField<T> {
        let len = self.x_axes.iter().map(Vec::len).product();
        let values = self.get(index).map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); len]);
        TensorField { axes: self.x_axes.clone(), values }
    }
}

/// Parameters of [`whitney_extend`].
#[derive(Clone, Debug)]
pub struct WhitneyOptions<T> {
    /// Strictly decreasing cutoff widths; entry `i` scales the terms of order `i`.
    pub schedule: Vec<T>,
    /// Half-width `δ` of the quartic mollifier on `[-δ, δ]^n`.
    pub mollifier: T,
    /// Gauss-Legendre points per axis for the mollified coefficients.
    pub quad_points: usize,
    /// Samples of each `y` variable; must contain 0.
    pub y_axis: Vec<T>,
}

impl<T: Real> WhitneyOptions<T> {
    /// Geometric schedule `δ_i = 4^{-i}/4`, the default mollifier and a `y`
    /// axis on `[-1, 1]` with `2n` intervals.
    pub fn standard(order: usize, n: usize) -> Self {
        Self {
            schedule: geometric_schedule(order, T::c(DEFAULT_DELTA0)),
            mollifier: T::c(DEFAULT_MOLLIFIER),
            quad_points: DEFAULT_QUAD_POINTS,
            y_axis: uniform_axis(-T::one(), T::one(), 2 * n),
        }
    }
}

/// `δ_i = 4^{-i} δ₀` for `i < order`.
pub fn geometric_schedule<T: Real>(order: usize, delta0: T) -> Vec<T> {
    (0..order).map(|i| delta0 / T::c(4f64.powi(i as i32))).collect()
}

/// Smooth bump equal to 1 on `[-1/2, 1/2]` and supported in `[-1, 1]`.
pub fn smooth_bump<T: Real>(y: T) -> T {
    let t = T::c(2.0) * y.abs() - T::one();
    if t <= T::zero() {
        return T::one();
    }
    if t >= T::one() {
        return T::zero();
    }
    let a = (-T::one() / t).exp();
    let b = (-T::one() / (T::one() - t)).exp();
    b / (a + b)
}

/// Unnormalized quartic bump `(1 - (z/δ)²)²` on `[-δ, δ]`.
pub fn quartic_bump<T: Real>(z: T, delta: T) -> T {
    let s = z / delta;
    if s.abs() >= T::one() {
        return T::zero();
    }
    let u = T::one() - s * s;
    u * u
}

/// The `m = 1` extension `Σ_i (y^i/i!) g_i(x, y) g(y/δ_i)` of the jets
/// `f_0, ..., f_{N-1}`, with `g_i(x, y) = ∫ a_i(x - yz) φ(z) dz`.
///
/// The coefficients `a_i` are chosen so that `∂_y^k Ef(x, 0) = f_k(x)`:
/// differentiating the product at `y = 0` gives
/// `f_k = Σ_{i ≤ k} C(k, i) (-1)^{k-i} Σ_{|β| = k-i} ((k-i)!/β!) M_β ∂^β a_i`
/// with the mollifier moments `M_β`, which is solved for `a_k`.
#[derive(Clone, Debug)]
pub struct LayerExtension<T> {
    coeffs: Vec<TensorField<T>>,
    schedule: Vec<T>,
    nodes: Vec<Vec<T>>,
    weights: Vec<T>,
    cutoff: fn(T) -> T,
}

impl<T: Real> LayerExtension<T> {
    /// Builds the coefficients for jets `f_0, ..., f_{N-1}` sharing one grid.
    pub fn new(jets: &[TensorField<T>], cutoff: fn(T) -> T, opts: &WhitneyOptions<T>) -> Result<Self> {
        let order = jets.len();
        if order == 0 {
            return Err(Error::InvalidInput("empty jet".into()));
        }
        check_schedule(&opts.schedule, order)?;
        if !(opts.mollifier > T::zero()) || opts.quad_points == 0 {
            return Err(Error::InvalidInput("mollifier width and quadrature size must be positive".into()));
        }
        let n = jets[0].dim();
        if n > MAX_DIM {
            return Err(Error::InvalidInput(format!("at most {MAX_DIM} x variables are supported")));
        }
        if jets.iter().any(|j| j.axes != jets[0].axes) {
            return Err(Error::InvalidInput("jets must share one grid".into()));
        }
        let (nodes, weights) = mollifier_rule(n, opts.mollifier, opts.quad_points);
        let moment = |beta: &[usize]| -> T {
            nodes
                .iter()
                .zip(&weights)
                .map(|(z, &w)| w * beta.iter().zip(z).fold(T::one(), |acc, (&b, &zk)| acc * zk.powi(b as i32)))
                .sum()
        };
        let mut coeffs: Vec<TensorField<T>> = Vec::with_capacity(order);
        for k in 0..order {
            let mut a = jets[k].values.clone();
            for (i, ai) in coeffs.iter().enumerate() {
                let p = k - i;
                let sign = if p % 2 == 0 { T::one() } else { -T::one() };
                let outer = T::c(binomial(k, i)) * sign;
                for beta in multi_indices(n, p).into_iter().filter(|b| b.iter().sum::<usize>() == p) {
                    let mb = moment(&beta);
                    if mb == T::zero() {
                        continue;
                    }
                    let c = outer * T::c(multinomial(&beta)) * mb;
                    for (slot, d) in a.iter_mut().zip(ai.derivative(&beta)) {
                        *slot -= c * d;
                    }
                }
            }
            coeffs.push(TensorField { axes: jets[k].axes.clone(), values: a });
        }
        Ok(Self { coeffs, schedule: opts.schedule[..order].to_vec(), nodes, weights, cutoff })
    }

    /// The recursively determined coefficients `a_i`.
    pub fn coefficients(&self) -> &[TensorField<T>] {
        &self.coeffs
    }

    /// `Ef(x, y)`.
    pub fn eval(&self, x: &[T], y: T) -> T {
        let mut shifted = vec![T::zero(); x.len()];
        let mut total = T::zero();
        let mut power = T::one();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = power * y / T::n(i);
            }
            let cut = (self.cutoff)(y / self.schedule[i]);
            if cut == T::zero() || power == T::zero() {
                continue;
            }
            let g = if y == T::zero() {
                a.interpolate(x)
            } else {
                let mut acc = T::zero();
                for (z, &w) in self.nodes.iter().zip(&self.weights) {
                    for k in 0..x.len() {
                        shifted[k] = x[k] - y * z[k];
                    }
                    acc += w * a.interpolate(&shifted);
                }
                acc
            };
            total += power * g * cut;
        }
        total
    }
}

/// The Whitney extension of `jets` to the grid `x_axes × y_axis^m`.
///
/// For `m = 1` this is [`LayerExtension`] evaluated on the grid. For `m > 1`
/// the last variable is split off: for each `i < N` the jets `f_{(I', i)}`
/// are extended in the first `m - 1` variables to `f̃_i` with budget `N - i`,
/// and the `f̃_i` are then extended in the last variable.
pub fn whitney_extend<T: Real>(
    jets: &JetFamily<T>,
    cutoff: fn(T) -> T,
    opts: &WhitneyOptions<T>,
) -> Result<TensorField<T>> {
    check_schedule(&opts.schedule, jets.order)?;
    let layer_jets: Vec<TensorField<T>> = if jets.m == 1 {
        (0..jets.order).map(|i| jets.field(&[i])).collect()
    } else {
        let mut out = Vec::with_capacity(jets.order);
        for i in 0..jets.order {
            let entries = jets
                .entries
                .iter()
                .filter(|e| e.index[jets.m - 1] == i)
                .map(|e| JetEntry { index: e.index[..jets.m - 1].to_vec(), values: e.values.clone() })
                .collect();
            let sub = JetFamily {
                n: jets.n,
                m: jets.m - 1,
                order: jets.order - i,
                x_axes: jets.x_axes.clone(),
                entries,
                support_radius: jets.support_radius,
            };
            out.push(whitney_extend(&sub, cutoff, opts)?);
        }
        out
    };
    extend_layer(&layer_jets, cutoff, opts)
}

/// [`whitney_extend`] applied to each parameter slice.
pub fn whitney_extend_slices<T: Real>(
    slices: &[JetFamily<T>],
    cutoff: fn(T) -> T,
    opts: &WhitneyOptions<T>,
) -> Result<Vec<TensorField<T>>> {
    slices.iter().map(|j| whitney_extend(j, cutoff, opts)).collect()
}

fn extend_layer<T: Real>(jets: &[TensorField<T>], cutoff: fn(T) -> T, opts: &WhitneyOptions<T>) -> Result<TensorField<T>> {
    let ext = LayerExtension::new(jets, cutoff, opts)?;
    let mut axes_out = jets[0].axes.clone();
    axes_out.push(opts.y_axis.clone());
    let ny = opts.y_axis.len();
    let len = jets[0].values.len() * ny;
    let xdim = jets[0].dim();
    let x_field = &jets[0];
    let values: Vec<T> = (0..len)
        .into_par_iter()
        .map(|flat| {
            let mut x = vec![T::zero(); xdim];
            x_field.point(flat / ny, &mut x);
            ext.eval(&x, opts.y_axis[flat % ny])
        })
        .collect();
    TensorField::new(axes_out, values)
}

fn check_schedule<T: Real>(schedule: &[T], order: usize) -> Result<()> {
    if schedule.len() < order {
        return Err(Error::InvalidInput(format!("schedule has {} widths for order {order}", schedule.len())));
    }
    if schedule.iter().any(|&d| !(d > T::zero())) {
        return Err(Error::InvalidInput("schedule widths must be positive".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("schedule must be strictly decreasing".into()));
    }
    Ok(())
}

/// Product Gauss-Legendre nodes on `[-δ, δ]^n` with weights `w·φ(z)`
/// normalized to unit mass.
fn mollifier_rule<T: Real>(n: usize, delta: T, points: usize) -> (Vec<Vec<T>>, Vec<T>) {
    let rule = GaussLegendre::new(points.max(2)).expect("valid degree");
    let one_d: Vec<(T, T)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| {
            let z = delta * T::c(x);
            (z, T::c(w) * quartic_bump(z, delta))
        })
        .collect();
    let mass: T = one_d.iter().map(|p| p.1).sum();
    let mut nodes = vec![Vec::new()];
    let mut weights = vec![T::one()];
    for _ in 0..n {
        let mut nn = Vec::with_capacity(nodes.len() * one_d.len());
        let mut nw = Vec::with_capacity(nodes.len() * one_d.len());
        for (z, w) in nodes.iter().zip(&weights) {
            for &(zk, wk) in &one_d {
                let mut p = z.clone();
                p.push(zk);
                nn.push(p);
                nw.push(*w * wk / mass);
            }
        }
        nodes = nn;
        weights = nw;
    }
    (nodes, weights)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn multinomial(beta: &[usize]) -> f64 {
    let total: usize = beta.iter().sum();
    let fact = |k: usize| (1..=k).fold(1.0, |a, j| a * j as f64);
    fact(total) / beta.iter().map(|&b| fact(b)).product::<f64>()
}
