//! Neumann-series inversion of `I + T a D` and the linear Beltrami solve.

use std::sync::Arc;

use num_complex::Complex;

use crate::cauchy_green::{op_c_boundary, CauchyGreen, KernelConfig};
use crate::domain_grid::{holder_estimate, trace_component, wirtinger, Grid, GridField};
use crate::error::{Error, Result};
use crate::Real;

/// Default acceptance threshold for `|a|_{α,0}`.
pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Default term tolerance of the Neumann series.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default maximal number of Neumann terms.
pub const DEFAULT_MAX_TERMS: usize = 200;
/// Consecutive ratios at or above one that signal divergence.
pub const DIVERGENCE_RUN: usize = 3;
/// Number of Cauchy-condition probe points.
pub const PROBES: usize = 16;
/// Probe circle radius relative to the domain radius.
pub const PROBE_RADIUS: f64 = 0.5;
/// Boundary distance, relative to the domain radius, of nodes used in PDE residuals.
pub const CORE_MARGIN: f64 = 0.2;

/// Derivative appearing in the operator `I + T a D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// `D f = ∂_z f`.
    Dz,
    /// `D f = conj(∂_z f)`.
    ConjDz,
}

/// A scalar or `m × m` matrix coefficient field with its Hölder data.
#[derive(Clone, Debug)]
pub struct BeltramiCoefficient<T: Real> {
    /// Coefficient values; `m²` components per node stored row-major.
    pub a: GridField<T>,
    /// Matrix size; 1 for scalar coefficients.
    pub m: usize,
    /// Hölder exponent used for the norm estimate.
    pub alpha: T,
    /// Largest pointwise operator norm.
    pub sup_norm: T,
    /// Estimated `|a|_{α,0}`: sup norm plus α-seminorm.
    pub holder_norm: T,
}

impl<T: Real> BeltramiCoefficient<T> {
    /// Scalar coefficient; requires `|a| < 1` at every node.
    pub fn scalar(a: GridField<T>, alpha: T) -> Result<Self> {
        Self::matrix(a, 1, alpha)
    }

    /// Matrix coefficient with `m²` components per node; requires operator norm below one.
    pub fn matrix(a: GridField<T>, m: usize, alpha: T) -> Result<Self> {
        if m == 0 || a.dim != m * m {
            return Err(Error::InvalidInput(format!("coefficient has {} components, expected {}", a.dim, m * m)));
        }
        if !a.is_finite() {
            return Err(Error::InvalidInput("coefficient has non-finite values".into()));
        }
        let mut sup = T::zero();
        for k in 0..a.grid.len() {
            let norm = matrix_norm(&a.values[k * m * m..(k + 1) * m * m], m);
            if !(norm < T::one()) {
                return Err(Error::InvalidInput(format!(
                    "coefficient norm {norm} at node {k} is not below one"
                )));
            }
            sup = sup.max(norm);
        }
        let report = holder_estimate(&a, 0, alpha)?;
        Ok(Self { a, m, alpha, sup_norm: sup, holder_norm: sup + report.seminorm })
    }

    /// Same coefficient multiplied by the real factor `s`.
    pub fn scaled(&self, s: T) -> Result<Self> {
        Self::matrix(self.a.map(|v| v * s), self.m, self.alpha)
    }

    /// `a · v` at node `k` for an `m`-vector `v`.
    fn apply(&self, k: usize, v: &[Complex<T>], out: &mut [Complex<T>]) {
        let m = self.m;
        if m == 1 {
            let a = self.a.values[k];
            for (o, &x) in out.iter_mut().zip(v) {
                *o = a * x;
            }
            return;
        }
        let row = &self.a.values[k * m * m..(k + 1) * m * m];
        for i in 0..m {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..m {
                acc += row[i * m + j] * v[j];
            }
            out[i] = acc;
        }
    }

    /// The field `a · D`-input, with `D` selecting conjugation.
    fn times(&self, d: &GridField<T>, which: Derivative) -> GridField<T> {
        let dim = d.dim;
        let n = d.grid.len();
        let mut values = vec![Complex::new(T::zero(), T::zero()); n * dim];
        let mut buf = vec![Complex::new(T::zero(), T::zero()); dim];
        for k in 0..n {
            let src = &d.values[k * dim..(k + 1) * dim];
            match which {
                Derivative::Dz => buf.copy_from_slice(src),
                Derivative::ConjDz => {
                    for (b, s) in buf.iter_mut().zip(src) {
                        *b = s.conj();
                    }
                }
            }
            self.apply(k, &buf, &mut values[k * dim..(k + 1) * dim]);
        }
        GridField { grid: d.grid.clone(), dim, values }
    }
}

/// Spectral norm of a complex row-major `m × m` matrix.
pub fn matrix_norm<T: Real>(a: &[Complex<T>], m: usize) -> T {
    if m == 1 {
        return a[0].norm();
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut v = vec![Complex::new(T::one(), T::zero()); m];
    let mut sigma = T::zero();
    for _ in 0..100 {
        let av: Vec<Complex<T>> = (0..m).map(|i| (0..m).fold(zero, |acc, j| acc + a[i * m + j] * v[j])).collect();
        let w: Vec<Complex<T>> = (0..m).map(|j| (0..m).fold(zero, |acc, i| acc + a[i * m + j].conj() * av[i])).collect();
        let nw = w.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        if nw == T::zero() {
            return T::zero();
        }
        let next = nw.sqrt();
        v = w.iter().map(|x| x / nw).collect();
        if (next - sigma).abs() <= T::epsilon() * next {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma
}

/// Truncation and acceptance parameters of the Neumann series.
#[derive(Clone, Copy, Debug)]
pub struct NeumannOptions<T> {
    /// Stop once a term's sup norm falls below this value.
    pub tol: T,
    /// Largest number of terms.
    pub max_terms: usize,
    /// Acceptance threshold for `|a|_{α,0}`, recorded in the report.
    pub threshold: T,
    /// Beurling discretization.
    pub kernel: KernelConfig<T>,
}

impl<T: Real> Default for NeumannOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::c(DEFAULT_TOL),
            max_terms: DEFAULT_MAX_TERMS,
            threshold: T::c(DEFAULT_THRESHOLD),
            kernel: KernelConfig::default(),
        }
    }
}

/// Convergence and residual record of a Neumann solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    /// Number of series terms summed, including the zeroth.
    pub iterations: usize,
    /// Ratios of consecutive term sup norms.
    pub ratios: Vec<f64>,
    /// Sup norm of each summed term.
    pub term_norms: Vec<f64>,
    /// `|a|_{α,0}` estimate of the coefficient.
    pub holder_norm: f64,
    /// Whether `holder_norm` is below the acceptance threshold.
    pub within_threshold: bool,
    /// `‖∂_z̄ f + a ∂_z f + b‖_∞` over the interior core, when computed.
    pub pde_residual: f64,
    /// `max |C(trace f)|` over the probe points, when computed.
    pub cauchy_residual: f64,
}

impl SolveReport {
    /// Whether the last observed ratio is below one.
    pub fn contracting(&self) -> bool {
        self.ratios.last().is_none_or(|&r| r < 1.0)
    }
}

/// `(I + T a D)^{-1} g` by the factored Neumann series `Σ (−1)ⁿ T a (S a)^{n−1} D g`,
/// with `D g` taken by finite differences.
pub fn neumann_invert<T: Real>(
    coef: &BeltramiCoefficient<T>,
    g: &GridField<T>,
    which: Derivative,
    opts: &NeumannOptions<T>,
) -> Result<(GridField<T>, SolveReport)> {
    let dg = wirtinger(g).dz;
    neumann_invert_with(coef, g, &dg, which, opts)
}

/// [`neumann_invert`] with a supplied `∂_z g`.
///
/// Each term costs one combined `T`/`S` pass: with `d₀ = ∂_z g` and
/// `xₙ = a D dₙ₋₁` (conjugating for [`Derivative::ConjDz`]), the `n`-th term
/// is `T xₙ` and `dₙ = S xₙ`.
pub fn neumann_invert_with<T: Real>(
    coef: &BeltramiCoefficient<T>,
    g: &GridField<T>,
    dg: &GridField<T>,
    which: Derivative,
    opts: &NeumannOptions<T>,
) -> Result<(GridField<T>, SolveReport)> {
    if !Arc::ptr_eq(&coef.a.grid, &g.grid) || !Arc::ptr_eq(&g.grid, &dg.grid) {
        return Err(Error::InvalidInput("coefficient and data must share one grid".into()));
    }
    if g.dim != coef.m || dg.dim != coef.m {
        return Err(Error::InvalidInput(format!("data must have {} components", coef.m)));
    }
    let engine = CauchyGreen::new(&g.grid, opts.kernel)?;
    let mut report = SolveReport {
        holder_norm: coef.holder_norm.f64(),
        within_threshold: coef.holder_norm < opts.threshold,
        ..SolveReport::default()
    };
    let mut sum = g.clone();
    let mut prev = g.sup_norm();
    report.term_norms.push(prev.f64());
    report.iterations = 1;
    let mut d = dg.clone();
    let mut run = 0;
    for n in 1..opts.max_terms {
        let x = coef.times(&d, which);
        let (term, next) = engine.ts_nodes(&x);
        let norm = term.sup_norm();
        if norm < opts.tol {
            break;
        }
        let ratio = if prev > T::zero() { (norm / prev).f64() } else { f64::INFINITY };
        report.ratios.push(ratio);
        report.term_norms.push(norm.f64());
        run = if ratio >= 1.0 { run + 1 } else { 0 };
        if run >= DIVERGENCE_RUN {
            return Err(Error::Divergence { terms: n + 1, ratios: report.ratios.clone() });
        }
        let sign = if n % 2 == 1 { -T::one() } else { T::one() };
        sum = sum.zip(&term, |s, t| s + t * sign);
        report.iterations = n + 1;
        prev = norm;
        d = next;
    }
    Ok((sum, report))
}

/// Solves `f + T(a ∂_z f) + T b = 0`, then records both residuals of
/// [`verify_equivalence`] in the report.
pub fn solve_linear_beltrami<T: Real>(
    coef: &BeltramiCoefficient<T>,
    b: &GridField<T>,
    opts: &NeumannOptions<T>,
) -> Result<(GridField<T>, SolveReport)> {
    let engine = CauchyGreen::new(&b.grid, opts.kernel)?;
    let (tb, sb) = engine.ts_nodes(b);
    let g = tb.map(|v| -v);
    let dg = sb.map(|v| -v);
    let (f, mut report) = neumann_invert_with(coef, &g, &dg, Derivative::Dz, opts)?;
    let (pde, cauchy) = verify_equivalence(&f, coef, b)?;
    report.pde_residual = pde.f64();
    report.cauchy_residual = cauchy.f64();
    Ok((f, report))
}

/// Nodes at boundary distance at least `CORE_MARGIN` times the domain radius.
pub fn core_nodes<T: Real>(grid: &Grid<T>) -> Vec<usize> {
    let margin = T::c(CORE_MARGIN) * domain_radius(grid);
    grid.interior_nodes(margin)
}

fn domain_radius<T: Real>(grid: &Grid<T>) -> T {
    grid.domain.diameter() * T::c(0.5)
}

/// Probe points on the circle of radius `PROBE_RADIUS · R` around the domain center.
pub fn probe_points<T: Real>(grid: &Grid<T>) -> Vec<Complex<T>> {
    let (lo, hi) = grid.domain.bounding_box();
    let center = (lo + hi) * T::c(0.5);
    let r = T::c(PROBE_RADIUS) * domain_radius(grid);
    (0..PROBES)
        .map(|k| center + Complex::from_polar(r, T::TAU() * T::n(k) / T::n(PROBES)))
        .collect()
}

/// `(‖∂_z̄ f + a ∂_z f + b‖_∞ on the core, max |C(trace f)| at the probes)`.
///
/// The first vanishes when `f` solves the differential equation and the second
/// when the trace of `f` extends holomorphically to the exterior with limit zero.
pub fn verify_equivalence<T: Real>(
    f: &GridField<T>,
    coef: &BeltramiCoefficient<T>,
    b: &GridField<T>,
) -> Result<(T, T)> {
    if f.dim != coef.m || b.dim != coef.m {
        return Err(Error::InvalidInput(format!("fields must have {} components", coef.m)));
    }
    let g = &f.grid;
    let w = wirtinger(f);
    let adz = coef.times(&w.dz, Derivative::Dz);
    let mut pde = T::zero();
    for k in core_nodes(g) {
        for c in 0..f.dim {
            pde = pde.max((w.dzbar.at(k, c) + adz.at(k, c) + b.at(k, c)).norm());
        }
    }
    let probes = probe_points(g);
    let mut cauchy = T::zero();
    for c in 0..f.dim {
        let trace: Vec<Complex<T>> = trace_component(f, &g.domain, c).iter().map(|s| s.value).collect();
        let cv = op_c_boundary(&g.domain, &trace, &probes)?;
        for v in cv.values {
            cauchy = cauchy.max(v.norm());
        }
    }
    Ok((pde, cauchy))
}
