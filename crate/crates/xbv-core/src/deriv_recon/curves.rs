//! The chain rule for `∂_t^k f(γ(t))`: a principal term `(γ′ · ∂)^k f` plus
//! lower-order terms `Σ_{|β| < k} Q_{k,β}(γ′, …, γ^{(k)}) ∂^β f`.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::whitney::{fd_weights, TensorField};

/// Points of the symmetric stencil used for an `order`-th derivative: five
/// up to order four, then the smallest odd count above `order`.
pub fn stencil_len(order: usize) -> usize {
    let s = (order + 1).max(5);
    s + (1 - s % 2)
}

/// Unit-spacing weights of the symmetric stencil of [`stencil_len`] points.
pub fn stencil_weights(order: usize) -> Vec<f64> {
    let half = (stencil_len(order) / 2) as isize;
    let offsets: Vec<f64> = (-half..=half).map(|s| s as f64).collect();
    fd_weights(order, &offsets)
}

/// Terms of Faà di Bruno's formula as sorted lists of block sizes with their
/// multiplicity: `∂_t^k f(γ) = Σ c_L D^{|L|} f[γ^{(L_1)}, …, γ^{(L_r)}]`.
pub fn chain_terms(k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    if k == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    terms.insert(vec![1], 1.0);
    for _ in 1..k {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (blocks, c) in &terms {
            // Differentiating D^r f adds a new block of size one.
            let mut grown = blocks.clone();
            grown.push(1);
            grown.sort_unstable();
            *next.entry(grown).or_default() += c;
            // Differentiating γ^{(L_i)} raises that block by one.
            for i in 0..blocks.len() {
                let mut raised = blocks.clone();
                raised[i] += 1;
                raised.sort_unstable();
                *next.entry(raised).or_default() += c;
            }
        }
        terms = next;
    }
    terms.into_iter().collect()
}

/// `Q_{k,β}` for every `1 ≤ |β| ≤ k` at a point where `derivs[o − 1] = γ^{(o)}`.
/// The entries with `|β| = k` form the principal term `(k!/β!) γ′^β`.
pub fn chain_coefficients(k: usize, derivs: &[DVector<f64>]) -> BTreeMap<Vec<usize>, f64> {
    let n = derivs.first().map_or(0, |d| d.len());
    let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (blocks, c) in chain_terms(k) {
        let r = blocks.len();
        // Expand the multilinear form over all index tuples.
        let mut idx = vec![0usize; r];
        loop {
            let mut prod = c;
            let mut beta = vec![0usize; n];
            for (s, &i) in idx.iter().enumerate() {
                prod *= derivs[blocks[s] - 1][i];
                beta[i] += 1;
            }
            if prod != 0.0 {
                *out.entry(beta).or_default() += prod;
            }
            let mut pos = 0;
            while pos < r {
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == r {
                break;
            }
        }
    }
    out
}

/// A curve sampled at uniformly spaced parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    /// Parameters.
    pub t: Vec<f64>,
    /// `γ(t_i)`.
    pub points: Vec<DVector<f64>>,
}

impl SampledCurve {
    /// Samples `γ` at `t_i = t0 + i·dt`, `i < count`.
    pub fn from_fn(t0: f64, dt: f64, count: usize, gamma: impl Fn(f64) -> DVector<f64>) -> Self {
        let t: Vec<f64> = (0..count).map(|i| t0 + dt * i as f64).collect();
        let points = t.iter().map(|&s| gamma(s)).collect();
        Self { t, points }
    }

    fn spacing(&self) -> Result<f64> {
        if self.t.len() < 2 || self.points.len() != self.t.len() {
            return Err(Error::InvalidInput("curve needs matching parameters and points".into()));
        }
        let dt = self.t[1] - self.t[0];
        let uniform = self.t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
        if !(dt > 0.0) || !uniform {
            return Err(Error::InvalidInput("curve parameters must be increasing and uniform".into()));
        }
        Ok(dt)
    }
}

/// One lower-order term `Q_{k,β} ∂^β f` at a curve sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTerm {
    /// `β`, `1 ≤ |β| < k`.
    pub beta: Vec<usize>,
    /// `Q_{k,β}`.
    pub q: f64,
    /// `∂^β f(γ(t))`.
    pub partial: f64,
}

/// Both sides of the chain rule at the curve samples whose stencil fits.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveExpansion {
    /// Order `k`.
    pub order: usize,
    /// Parameters of the evaluated samples.
    pub t: Vec<f64>,
    /// `∂_t^k f(γ(t))` by differences along the curve.
    pub lhs: Vec<f64>,
    /// `(γ′ · ∂)^k f(γ(t))`.
    pub principal: Vec<f64>,
    /// `Σ_β Q_{k,β} ∂^β f(γ(t))`.
    pub lower: Vec<f64>,
    /// The individual lower-order terms per sample.
    pub terms: Vec<Vec<LowerTerm>>,
    /// `lhs − principal − lower`.
    pub residual: Vec<f64>,
    /// Largest `|residual|`.
    pub max_residual: f64,
}

/// Evaluates both sides of the chain rule for `f` along a sampled curve.
///
/// Curve derivatives and `∂_t^k (f ∘ γ)` use the stencils of [`stencil_len`]
/// in `t`; `f ∘ γ` and the partials `∂^β f`, taken by the grid differences of
/// [`TensorField::derivative`], are interpolated at the curve points.
pub fn curve_derivative_expand(curve: &SampledCurve, f: &TensorField<f64>, k: usize) -> Result<CurveExpansion> {
    if k == 0 {
        return Err(Error::InvalidInput("chain rule needs k >= 1".into()));
    }
    let dt = curve.spacing()?;
    let n = f.dim();
    if curve.points.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidInput(format!("curve points must lie in R^{n}")));
    }
    let half = stencil_len(k) / 2;
    if curve.t.len() < 2 * half + 1 {
        return Err(Error::Resolution(format!(
            "{} curve samples cannot resolve order {k}; need at least {}",
            curve.t.len(),
            2 * half + 1
        )));
    }
    if f.shape().iter().any(|&s| s < 2 * k + 1) {
        return Err(Error::Resolution(format!("grid too coarse for derivatives of order {k}")));
    }
    let weights: Vec<Vec<f64>> = (1..=k)
        .map(|o| {
            let w = stencil_weights(o);
            let pad = half - w.len() / 2;
            let mut full = vec![0.0; 2 * half + 1];
            full[pad..pad + w.len()].copy_from_slice(&w);
            full
        })
        .collect();
    let composed: Vec<f64> = curve.points.iter().map(|p| f.interpolate(p.as_slice())).collect();
    let mut partial_fields: BTreeMap<Vec<usize>, TensorField<f64>> = BTreeMap::new();
    for beta in crate::whitney::multi_indices(n, k).into_iter().skip(1) {
        let values = f.derivative(&beta);
        partial_fields.insert(beta, TensorField { axes: f.axes.clone(), values });
    }

    let mut out = CurveExpansion {
        order: k,
        t: Vec::new(),
        lhs: Vec::new(),
        principal: Vec::new(),
        lower: Vec::new(),
        terms: Vec::new(),
        residual: Vec::new(),
        max_residual: 0.0,
    };
    for i in half..curve.t.len() - half {
        let derivs: Vec<DVector<f64>> = weights
            .iter()
            .enumerate()
            .map(|(o, w)| {
                let mut d = DVector::zeros(n);
                for (s, ws) in w.iter().enumerate() {
                    d.axpy(*ws, &curve.points[i + s - half], 1.0);
                }
                d / dt.powi(o as i32 + 1)
            })
            .collect();
        let lhs: f64 =
            weights[k - 1].iter().enumerate().map(|(s, ws)| ws * composed[i + s - half]).sum::<f64>() / dt.powi(k as i32);
        let p = curve.points[i].as_slice();
        let mut principal = 0.0;
        let mut lower = 0.0;
        let mut terms = Vec::new();
        for (beta, q) in chain_coefficients(k, &derivs) {
            let partial = partial_fields[&beta].interpolate(p);
            if beta.iter().sum::<usize>() == k {
                principal += q * partial;
            } else {
                lower += q * partial;
                terms.push(LowerTerm { beta, q, partial });
            }
        }
        let residual = lhs - principal - lower;
        out.max_residual = out.max_residual.max(residual.abs());
        out.t.push(curve.t[i]);
        out.lhs.push(lhs);
        out.principal.push(principal);
        out.lower.push(lower);
        out.terms.push(terms);
        out.residual.push(residual);
    }
    Ok(out)
}
