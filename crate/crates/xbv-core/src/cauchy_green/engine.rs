//! Lattice-table evaluation of the Cauchy-Green operator `T` and the
//! Beurling operator `S` on grid fields.

use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;

use super::kernel::{boundary_conj_term, square_cauchy, Desingularization, KernelConfig};
use super::lattice::LatticeConvolution;
use crate::domain_grid::{Grid, GridField, SUBSAMPLES};
use crate::error::{Error, Result};
use crate::Real;

/// Offsets up to this many lattice steps use exact cell integrals for `T`.
const NEAR_STEPS: i32 = 1;

/// Subsamples omitted from the Beurling sum of an irregular source.
#[derive(Clone, Copy, Debug)]
enum Exclusion<T> {
    Nothing,
    Disk(T),
    Cell(i32, i32),
}

#[derive(Clone, Debug)]
struct IrregularSource<T> {
    node: usize,
    centroid: Complex<T>,
    weight: T,
    subsamples: Vec<Complex<T>>,
}

/// Precomputed kernels for `T` and `S` on one grid.
///
/// `Tf(z) = (1/π) ∫ f(ζ)/(z − ζ) dA` integrates cellwise-constant `f`
/// exactly over the 3×3 block of cells around `z` and by the midpoint rule
/// elsewhere. `Sf(z) = −(1/π) ∫ (f(ζ) − f(z))/(z − ζ)² dA − (f(z)/2πi) ∮ conj(dζ)/(ζ − z)`
/// uses the desingularized split with the configured exclusion.
///
/// Node-to-node passes read both kernels from tables indexed by lattice
/// offset. The regular-cell part of a pass is a lattice convolution,
/// evaluated by FFT in [`Self::ts_nodes`] and by direct row dot products in
/// [`Self::ts_nodes_direct`]. Nodes whose cells are clipped by the boundary
/// are integrated through their subsamples.
pub struct CauchyGreen<T: Real> {
    grid: Arc<Grid<T>>,
    config: KernelConfig<T>,
    width: usize,
    nx: usize,
    ny: usize,
    k1r: Vec<T>,
    k1i: Vec<T>,
    k2r: Vec<T>,
    k2i: Vec<T>,
    k2_prefix: Vec<Complex<T>>,
    conv: LatticeConvolution<T>,
    k1_spectrum: Vec<Complex<T>>,
    k2_spectrum: Vec<Complex<T>>,
    irregular: Vec<IrregularSource<T>>,
    sigma: OnceLock<Vec<Complex<T>>>,
}

impl<T: Real> CauchyGreen<T> {
    /// Builds the kernel tables for `grid`.
    pub fn new(grid: &Arc<Grid<T>>, config: KernelConfig<T>) -> Result<Self> {
        config.validate()?;
        if grid.domain.boundary.is_empty() {
            return Err(Error::MissingBoundary);
        }
        let (_, _, nx, ny) = grid.extent();
        let width = 2 * nx - 1;
        let height = 2 * ny - 1;
        let h = grid.h;
        let inv_pi = T::FRAC_1_PI();
        let zero = Complex::new(T::zero(), T::zero());
        let mut k1 = vec![zero; width * height];
        let mut k2 = vec![zero; width * height];
        let eps = config.eps(h);
        let reach = h * T::c(std::f64::consts::FRAC_1_SQRT_2);
        for row in 0..height {
            let ej = row as i32 - (ny as i32 - 1);
            for col in 0..width {
                let ei = col as i32 - (nx as i32 - 1);
                // z − ζ = −e h
                let d = Complex::new(T::c(-ei as f64), T::c(-ej as f64));
                let idx = row * width + col;
                if ei.abs() <= NEAR_STEPS && ej.abs() <= NEAR_STEPS {
                    k1[idx] = square_cauchy(d * h, zero, h) * inv_pi;
                } else {
                    k1[idx] = (d * h).inv() * (h * h * inv_pi);
                }
                k2[idx] = beurling_cell(&config, d * h, h, eps, reach, ei == 0 && ej == 0);
            }
        }
        let mut k2_prefix = Vec::with_capacity(height * (width + 1));
        for row in 0..height {
            let mut acc = zero;
            k2_prefix.push(acc);
            for col in 0..width {
                acc += k2[row * width + col];
                k2_prefix.push(acc);
            }
        }
        let irregular = grid
            .irregular
            .iter()
            .map(|irr| {
                let n = T::n(irr.subsamples.len());
                let centroid =
                    irr.subsamples.iter().fold(zero, |acc, &s| acc + s) / n;
                IrregularSource {
                    node: irr.node,
                    centroid,
                    weight: grid.weights[irr.node],
                    subsamples: irr.subsamples.clone(),
                }
            })
            .collect();
        let conv = LatticeConvolution::new(nx, ny);
        let k1_spectrum = conv.kernel_spectrum(&k1);
        let k2_spectrum = conv.kernel_spectrum(&k2);
        Ok(Self {
            grid: grid.clone(),
            config,
            conv,
            k1_spectrum,
            k2_spectrum,
            width,
            nx,
            ny,
            k1r: k1.iter().map(|v| v.re).collect(),
            k1i: k1.iter().map(|v| v.im).collect(),
            k2r: k2.iter().map(|v| v.re).collect(),
            k2i: k2.iter().map(|v| v.im).collect(),
            k2_prefix,
            irregular,
            sigma: OnceLock::new(),
        })
    }

    /// The grid these kernels belong to.
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// The Beurling discretization parameters.
    pub fn config(&self) -> &KernelConfig<T> {
        &self.config
    }

    #[inline]
    fn table_base(&self, ti: i32, tj: i32, run_j: i32, run_i: i32) -> usize {
        let row = (run_j - tj + self.ny as i32 - 1) as usize;
        let col = (run_i - ti + self.nx as i32 - 1) as usize;
        row * self.width + col
    }

    /// Per-node coefficient of `f(z)` in the split form of `S`:
    /// `−Σ_ζ w K₂(z − ζ) − B(z)/(2πi)`.
    fn sigma(&self) -> &[Complex<T>] {
        self.sigma.get_or_init(|| {
            let g = &self.grid;
            let two_pi_i = Complex::new(T::zero(), T::TAU());
            (0..g.len())
                .into_par_iter()
                .map(|t| {
                    let (ti, tj) = g.cells[t];
                    let z = g.nodes[t];
                    let mut w2 = Complex::new(T::zero(), T::zero());
                    for run in &g.rows {
                        let base = self.table_base(ti, tj, run.j, run.i_start);
                        let row = base / self.width;
                        let c0 = base % self.width;
                        let p = row * (self.width + 1);
                        w2 = w2 + self.k2_prefix[p + c0 + run.len] - self.k2_prefix[p + c0];
                    }
                    for s in &self.irregular {
                        let (si, sj) = g.cells[s.node];
                        let idx = self.table_base(ti, tj, sj, si);
                        w2 -= Complex::new(self.k2r[idx], self.k2i[idx]);
                        if s.node != t {
                            w2 += self.irregular_s(s, z, self.node_exclusion());
                        }
                    }
                    -w2 - boundary_conj_term(&g.domain, z) / two_pi_i
                })
                .collect()
        })
    }

    /// `Tf` at every node.
    pub fn t_nodes(&self, f: &GridField<T>) -> GridField<T> {
        self.pass(f, true, false, false).0
    }

    /// `Sf` at every node.
    pub fn s_nodes(&self, f: &GridField<T>) -> GridField<T> {
        self.pass(f, false, true, false).1
    }

    /// `(Tf, Sf)` at every node from one sweep.
    pub fn ts_nodes(&self, f: &GridField<T>) -> (GridField<T>, GridField<T>) {
        self.pass(f, true, true, false)
    }

    /// [`Self::ts_nodes`] with the lattice sums taken directly instead of by FFT.
    pub fn ts_nodes_direct(&self, f: &GridField<T>) -> (GridField<T>, GridField<T>) {
        self.pass(f, true, true, true)
    }

    fn pass(&self, f: &GridField<T>, want_t: bool, want_s: bool, direct: bool) -> (GridField<T>, GridField<T>) {
        let g = &self.grid;
        let n = g.len();
        let dim = f.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let sigma = if want_s { Some(self.sigma()) } else { None };
        let mut tv = vec![zero; if want_t { n * dim } else { 0 }];
        let mut sv = vec![zero; if want_s { n * dim } else { 0 }];
        let (i0, j0, _, _) = g.extent();
        let lattice_index = |k: usize| {
            let (i, j) = g.cells[k];
            (j - j0) as usize * self.nx + (i - i0) as usize
        };
        for c in 0..dim {
            let (lat_t, lat_s) = if direct {
                self.lattice_direct(f, c, want_t, want_s)
            } else {
                let mut lat = vec![zero; self.nx * self.ny];
                for k in 0..n {
                    if g.is_regular(k) {
                        lat[lattice_index(k)] = f.at(k, c);
                    }
                }
                let spec = self.conv.data_spectrum(&lat);
                let full_t = if want_t { self.conv.apply(&spec, &self.k1_spectrum) } else { Vec::new() };
                let full_s = if want_s { self.conv.apply(&spec, &self.k2_spectrum) } else { Vec::new() };
                let pick = |full: &[Complex<T>]| {
                    if full.is_empty() {
                        Vec::new()
                    } else {
                        (0..n).map(|k| full[lattice_index(k)]).collect()
                    }
                };
                (pick(&full_t), pick(&full_s))
            };
            let irr_vals: Vec<Complex<T>> = self.irregular.iter().map(|s| f.at(s.node, c)).collect();
            let out: Vec<(Complex<T>, Complex<T>)> = (0..n)
                .into_par_iter()
                .map(|t| {
                    let z = g.nodes[t];
                    let mut a1 = if want_t { lat_t[t] } else { zero };
                    let mut a2 = if want_s { lat_s[t] } else { zero };
                    for (s, &v) in self.irregular.iter().zip(&irr_vals) {
                        if want_t {
                            a1 += v * self.irregular_t(s, z);
                        }
                        if want_s && s.node != t {
                            a2 += v * self.irregular_s(s, z, self.node_exclusion());
                        }
                    }
                    if let Some(sig) = sigma {
                        a2 += f.at(t, c) * sig[t];
                    }
                    (a1, a2)
                })
                .collect();
            for (t, (a1, a2)) in out.into_iter().enumerate() {
                if want_t {
                    tv[t * dim + c] = a1;
                }
                if want_s {
                    sv[t * dim + c] = a2;
                }
            }
        }
        (
            GridField { grid: g.clone(), dim, values: tv },
            GridField { grid: g.clone(), dim, values: sv },
        )
    }

    /// Regular-cell table sums of component `c` by row dot products.
    fn lattice_direct(
        &self,
        f: &GridField<T>,
        c: usize,
        want_t: bool,
        want_s: bool,
    ) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let g = &self.grid;
        let n = g.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut fr = vec![T::zero(); n];
        let mut fi = vec![T::zero(); n];
        for k in 0..n {
            if g.is_regular(k) {
                let v = f.at(k, c);
                fr[k] = v.re;
                fi[k] = v.im;
            }
        }
        let out: Vec<(Complex<T>, Complex<T>)> = (0..n)
            .into_par_iter()
            .map(|t| {
                let (ti, tj) = g.cells[t];
                let (mut a1, mut a2) = (zero, zero);
                for run in &g.rows {
                    let base = self.table_base(ti, tj, run.j, run.i_start);
                    let src = run.first..run.first + run.len;
                    let ks = base..base + run.len;
                    let (x1, x2) = match (want_t, want_s) {
                        (true, true) => dot2(
                            &fr[src.clone()],
                            &fi[src],
                            &self.k1r[ks.clone()],
                            &self.k1i[ks.clone()],
                            &self.k2r[ks.clone()],
                            &self.k2i[ks],
                        ),
                        (true, false) => {
                            (dot(&fr[src.clone()], &fi[src], &self.k1r[ks.clone()], &self.k1i[ks]), zero)
                        }
                        _ => (zero, dot(&fr[src.clone()], &fi[src], &self.k2r[ks.clone()], &self.k2i[ks])),
                    };
                    a1 += x1;
                    a2 += x2;
                }
                (a1, a2)
            })
            .collect();
        out.into_iter().unzip()
    }

    /// `(1/π) ∫_{cell of s} dA/(z − ζ)` for an irregular source.
    fn irregular_t(&self, s: &IrregularSource<T>, z: Complex<T>) -> Complex<T> {
        let h = self.grid.h;
        let inv_pi = T::FRAC_1_PI();
        if (z - s.centroid).norm() > T::c(3.0) * h {
            return (z - s.centroid).inv() * (s.weight * inv_pi);
        }
        let a = h / T::n(SUBSAMPLES);
        let w = a * a * inv_pi;
        let mut acc = Complex::new(T::zero(), T::zero());
        for &p in &s.subsamples {
            let d = z - p;
            if d.norm() < T::c(2.0) * h {
                acc += square_cauchy(z, p, a) * inv_pi;
            } else {
                acc += d.inv() * w;
            }
        }
        acc
    }

    /// `−(1/π) ∫_{cell of s} dA/(z − ζ)²` for an irregular source, omitting
    /// subsamples rejected by `exclude`.
    fn irregular_s(&self, s: &IrregularSource<T>, z: Complex<T>, exclude: Exclusion<T>) -> Complex<T> {
        let h = self.grid.h;
        let inv_pi = T::FRAC_1_PI();
        if (z - s.centroid).norm() > T::c(3.0) * h {
            let d = z - s.centroid;
            return -(d * d).inv() * (s.weight * inv_pi);
        }
        let a = h / T::n(SUBSAMPLES);
        let w = a * a * inv_pi;
        let mut acc = Complex::new(T::zero(), T::zero());
        for &p in &s.subsamples {
            let skip = match exclude {
                Exclusion::Nothing => false,
                Exclusion::Disk(eps) => (z - p).norm() < eps,
                Exclusion::Cell(ci, cj) => self.grid.cell_of(p) == (ci, cj),
            };
            if skip {
                continue;
            }
            let d = z - p;
            acc -= (d * d).inv() * w;
        }
        acc
    }

    fn node_exclusion(&self) -> Exclusion<T> {
        match self.config.mode {
            Desingularization::SkipCell => Exclusion::Nothing,
            Desingularization::PolarPatch => Exclusion::Disk(self.config.eps(self.grid.h)),
        }
    }

    /// `Tf` at arbitrary points, node-major in the components of `f`.
    pub fn t_points(&self, f: &GridField<T>, points: &[Complex<T>]) -> Vec<Complex<T>> {
        let g = &self.grid;
        let h = g.h;
        let dim = f.dim;
        let inv_pi = T::FRAC_1_PI();
        let near = T::c(1.5) * h;
        let zero = Complex::new(T::zero(), T::zero());
        points
            .par_iter()
            .flat_map_iter(|&z| {
                let mut acc = vec![zero; dim];
                for k in 0..g.len() {
                    if !g.is_regular(k) {
                        continue;
                    }
                    let d = z - g.nodes[k];
                    let ker = if d.re.abs() < near && d.im.abs() < near {
                        square_cauchy(z, g.nodes[k], h) * inv_pi
                    } else {
                        d.inv() * (h * h * inv_pi)
                    };
                    for c in 0..dim {
                        acc[c] += f.at(k, c) * ker;
                    }
                }
                for s in &self.irregular {
                    let ker = self.irregular_t(s, z);
                    for c in 0..dim {
                        acc[c] += f.at(s.node, c) * ker;
                    }
                }
                acc
            })
            .collect()
    }

    /// `Sf` at arbitrary points of the open domain, node-major in the components.
    ///
    /// `f(z)` is obtained by interpolation.
    pub fn s_points(&self, f: &GridField<T>, points: &[Complex<T>]) -> Vec<Complex<T>> {
        let g = &self.grid;
        let h = g.h;
        let dim = f.dim;
        let eps = self.config.eps(h);
        let reach = h * T::c(std::f64::consts::FRAC_1_SQRT_2);
        let two_pi_i = Complex::new(T::zero(), T::TAU());
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::c(0.5);
        points
            .par_iter()
            .flat_map_iter(|&z| {
                let fz: Vec<Complex<T>> = (0..dim).map(|c| f.interpolate(z, c).0).collect();
                let (zi, zj) = g.cell_of(z);
                let exclude = match self.config.mode {
                    Desingularization::SkipCell => Exclusion::Cell(zi, zj),
                    Desingularization::PolarPatch => Exclusion::Disk(eps),
                };
                let mut acc = vec![zero; dim];
                for k in 0..g.len() {
                    if !g.is_regular(k) {
                        continue;
                    }
                    let d = z - g.nodes[k];
                    let own = d.re.abs() <= h * half && d.im.abs() <= h * half;
                    let ker = beurling_cell(&self.config, d, h, eps, reach, own);
                    for c in 0..dim {
                        acc[c] += (f.at(k, c) - fz[c]) * ker;
                    }
                }
                for s in &self.irregular {
                    let ker = self.irregular_s(s, z, exclude);
                    for c in 0..dim {
                        acc[c] += (f.at(s.node, c) - fz[c]) * ker;
                    }
                }
                let b = boundary_conj_term(&g.domain, z) / two_pi_i;
                for c in 0..dim {
                    acc[c] -= fz[c] * b;
                }
                acc
            })
            .collect()
    }
}

/// `−(1/π) ∫_cell dA/(z − ζ)²` over a full cell at displacement `d = z − ζ_center`
/// under the configured exclusion rule.
fn beurling_cell<T: Real>(config: &KernelConfig<T>, d: Complex<T>, h: T, eps: T, reach: T, own: bool) -> Complex<T> {
    let inv_pi = T::FRAC_1_PI();
    let zero = Complex::new(T::zero(), T::zero());
    match config.mode {
        Desingularization::SkipCell => {
            if own {
                zero
            } else {
                -(d * d).inv() * (h * h * inv_pi)
            }
        }
        Desingularization::PolarPatch => {
            if d.norm() >= eps + reach {
                return -(d * d).inv() * (h * h * inv_pi);
            }
            let r = config.refine;
            let a = h / T::n(r);
            let half = T::c(0.5);
            let mut acc = zero;
            for q in 0..r {
                for p in 0..r {
                    let off = Complex::new((T::n(p) + half) * a - half * h, (T::n(q) + half) * a - half * h);
                    let w = d - off;
                    if w.norm() >= eps && w.norm() > T::zero() {
                        acc -= (w * w).inv() * (a * a * inv_pi);
                    }
                }
            }
            acc
        }
    }
}

const LANES: usize = 8;

/// `Σ (fr + i fi)(kr + i ki)` with lane-parallel accumulators.
#[inline(always)]
fn dot<T: Real>(fr: &[T], fi: &[T], kr: &[T], ki: &[T]) -> Complex<T> {
    let n = fr.len();
    let (fi, kr, ki) = (&fi[..n], &kr[..n], &ki[..n]);
    let mut ar = [T::zero(); LANES];
    let mut ai = [T::zero(); LANES];
    let full = n / LANES * LANES;
    let mut b = 0;
    while b < full {
        for l in 0..LANES {
            let (x, y, u, v) = (fr[b + l], fi[b + l], kr[b + l], ki[b + l]);
            ar[l] += x * u - y * v;
            ai[l] += x * v + y * u;
        }
        b += LANES;
    }
    let mut sr = T::zero();
    let mut si = T::zero();
    for l in 0..LANES {
        sr += ar[l];
        si += ai[l];
    }
    for k in full..n {
        sr += fr[k] * kr[k] - fi[k] * ki[k];
        si += fr[k] * ki[k] + fi[k] * kr[k];
    }
    Complex::new(sr, si)
}

/// Two simultaneous dot products sharing the field loads.
#[inline(always)]
fn dot2<T: Real>(fr: &[T], fi: &[T], ar_: &[T], ai_: &[T], br_: &[T], bi_: &[T]) -> (Complex<T>, Complex<T>) {
    let n = fr.len();
    let (fi, ar_, ai_, br_, bi_) = (&fi[..n], &ar_[..n], &ai_[..n], &br_[..n], &bi_[..n]);
    let mut xr = [T::zero(); LANES];
    let mut xi = [T::zero(); LANES];
    let mut yr = [T::zero(); LANES];
    let mut yi = [T::zero(); LANES];
    let full = n / LANES * LANES;
    let mut b = 0;
    while b < full {
        for l in 0..LANES {
            let (x, y) = (fr[b + l], fi[b + l]);
            let (u, v) = (ar_[b + l], ai_[b + l]);
            let (p, q) = (br_[b + l], bi_[b + l]);
            xr[l] += x * u - y * v;
            xi[l] += x * v + y * u;
            yr[l] += x * p - y * q;
            yi[l] += x * q + y * p;
        }
        b += LANES;
    }
    let (mut s1r, mut s1i, mut s2r, mut s2i) = (T::zero(), T::zero(), T::zero(), T::zero());
    for l in 0..LANES {
        s1r += xr[l];
        s1i += xi[l];
        s2r += yr[l];
        s2i += yi[l];
    }
    for k in full..n {
        s1r += fr[k] * ar_[k] - fi[k] * ai_[k];
        s1i += fr[k] * ai_[k] + fi[k] * ar_[k];
        s2r += fr[k] * br_[k] - fi[k] * bi_[k];
        s2i += fr[k] * bi_[k] + fi[k] * br_[k];
    }
    (Complex::new(s1r, s1i), Complex::new(s2r, s2i))
}
