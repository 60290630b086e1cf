//! Cell-centered lattices clipped to a domain, and complex fields on them.

use std::sync::Arc;

use num_complex::Complex;

use super::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::Real;

/// Number of subsamples per axis used to estimate clipped cell areas.
pub const SUBSAMPLES: usize = 4;

/// A node whose cell is clipped by the boundary or absorbs an orphan cell.
///
/// Operators integrate against such nodes through their inside subsamples,
/// each carrying weight `h²/16`.
#[derive(Clone, Debug)]
pub struct IrregularNode<T> {
    /// Index of the node.
    pub node: usize,
    /// Inside subsample points attributed to this node.
    pub subsamples: Vec<Complex<T>>,
}

/// A run of consecutive lattice cells in one row that are all nodes.
#[derive(Clone, Copy, Debug)]
pub struct RowRun {
    /// Row index.
    pub j: i32,
    /// Column index of the first cell.
    pub i_start: i32,
    /// Number of cells in the run.
    pub len: usize,
    /// Node index of the first cell.
    pub first: usize,
}

/// The lattice `((i + ½)h, (j + ½)h)` intersected with a domain.
///
/// Nodes are cell centers lying in the closed domain, ordered row by row.
/// Cells whose center is outside but which contain inside subsamples hand
/// their area to the nearest neighboring node.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    /// The domain being discretized.
    pub domain: DomainSpec<T>,
    /// Lattice pitch.
    pub h: T,
    /// Node positions (cell centers).
    pub nodes: Vec<Complex<T>>,
    /// Quadrature weight (area) per node.
    pub weights: Vec<T>,
    /// Lattice index `(i, j)` per node.
    pub cells: Vec<(i32, i32)>,
    /// Nodes that are not plain full cells.
    pub irregular: Vec<IrregularNode<T>>,
    /// Maximal runs of nodes along lattice rows.
    pub rows: Vec<RowRun>,
    regular: Vec<bool>,
    i0: i32,
    j0: i32,
    nx: usize,
    ny: usize,
    index: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl<T: Real> Grid<T> {
    /// Builds the clipped lattice of pitch `h`.
    pub fn build(domain: DomainSpec<T>, h: T) -> Result<Self> {
        if !(h > T::zero()) || h >= domain.diameter() / T::c(4.0) {
            return Err(Error::EmptyGrid { h: h.f64() });
        }
        let (lo, hi) = domain.bounding_box();
        let i0 = (lo.re / h).floor().to_i32().unwrap() - 1;
        let j0 = (lo.im / h).floor().to_i32().unwrap() - 1;
        let i1 = (hi.re / h).floor().to_i32().unwrap() + 1;
        let j1 = (hi.im / h).floor().to_i32().unwrap() + 1;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let half = T::c(0.5);
        let sub = T::n(SUBSAMPLES);
        let near = T::c(0.75) * h;
        let center = |i: i32, j: i32| Complex::new((T::c(i as f64) + half) * h, (T::c(j as f64) + half) * h);
        let subpoint = |i: i32, j: i32, p: usize, q: usize| {
            Complex::new(
                (T::c(i as f64) + (T::n(p) + half) / sub) * h,
                (T::c(j as f64) + (T::n(q) + half) / sub) * h,
            )
        };

        // Classify every cell: center inside, and the list of inside subsamples
        // (empty list with full flag when the whole cell is on one side).
        let mut center_in = vec![false; nx * ny];
        let mut partial: Vec<Option<Vec<Complex<T>>>> = vec![None; nx * ny];
        for jj in 0..ny {
            for ii in 0..nx {
                let (i, j) = (i0 + ii as i32, j0 + jj as i32);
                let c = center(i, j);
                let inside = domain.contains(c);
                center_in[jj * nx + ii] = inside;
                if domain.boundary_distance(c) <= near {
                    let mut pts = Vec::new();
                    for q in 0..SUBSAMPLES {
                        for p in 0..SUBSAMPLES {
                            let s = subpoint(i, j, p, q);
                            if domain.contains(s) {
                                pts.push(s);
                            }
                        }
                    }
                    partial[jj * nx + ii] = Some(pts);
                }
            }
        }

        let mut index = vec![NONE; nx * ny];
        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        for jj in 0..ny {
            for ii in 0..nx {
                if center_in[jj * nx + ii] {
                    index[jj * nx + ii] = nodes.len() as u32;
                    let (i, j) = (i0 + ii as i32, j0 + jj as i32);
                    nodes.push(center(i, j));
                    cells.push((i, j));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyGrid { h: h.f64() });
        }

        let full = SUBSAMPLES * SUBSAMPLES;
        let mut subs: Vec<Option<Vec<Complex<T>>>> = vec![None; nodes.len()];
        let mut counts = vec![full; nodes.len()];
        for (k, &(i, j)) in cells.iter().enumerate() {
            let flat = (j - j0) as usize * nx + (i - i0) as usize;
            if let Some(pts) = &partial[flat] {
                counts[k] = pts.len();
                if pts.len() < full {
                    subs[k] = Some(pts.clone());
                }
            }
        }
        // Orphan cells: center outside, some subsamples inside.
        for jj in 0..ny {
            for ii in 0..nx {
                let flat = jj * nx + ii;
                if center_in[flat] {
                    continue;
                }
                let pts = match &partial[flat] {
                    Some(p) if !p.is_empty() => p.clone(),
                    _ => continue,
                };
                let (i, j) = (i0 + ii as i32, j0 + jj as i32);
                let c = center(i, j);
                let mut best: Option<(T, usize)> = None;
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (a, b) = (ii as i32 + di, jj as i32 + dj);
                        if a < 0 || b < 0 || a >= nx as i32 || b >= ny as i32 {
                            continue;
                        }
                        let k = index[b as usize * nx + a as usize];
                        if k == NONE {
                            continue;
                        }
                        let d = (nodes[k as usize] - c).norm();
                        if best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, k as usize));
                        }
                    }
                }
                let target = match best {
                    Some((_, k)) => k,
                    None => {
                        let mut bk = 0;
                        let mut bd = T::infinity();
                        for (k, n) in nodes.iter().enumerate() {
                            let d = (n - c).norm();
                            if d < bd {
                                bd = d;
                                bk = k;
                            }
                        }
                        bk
                    }
                };
                let entry = subs[target].get_or_insert_with(|| {
                    let (ti, tj) = cells[target];
                    let mut own = Vec::with_capacity(full);
                    for q in 0..SUBSAMPLES {
                        for p in 0..SUBSAMPLES {
                            own.push(subpoint(ti, tj, p, q));
                        }
                    }
                    own
                });
                entry.extend(pts.iter().copied());
                counts[target] += pts.len();
            }
        }

        let wsub = h * h / T::n(full);
        let weights: Vec<T> = counts.iter().map(|&c| wsub * T::n(c)).collect();
        let mut regular = vec![true; nodes.len()];
        let mut irregular = Vec::new();
        for (k, s) in subs.into_iter().enumerate() {
            if let Some(pts) = s {
                regular[k] = false;
                irregular.push(IrregularNode { node: k, subsamples: pts });
            }
        }

        let mut rows: Vec<RowRun> = Vec::new();
        for (k, &(i, j)) in cells.iter().enumerate() {
            match rows.last_mut() {
                Some(r) if r.j == j && r.i_start + r.len as i32 == i => r.len += 1,
                _ => rows.push(RowRun { j, i_start: i, len: 1, first: k }),
            }
        }

        Ok(Self { domain, h, nodes, weights, cells, irregular, rows, regular, i0, j0, nx, ny, index })
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the grid has no nodes (never true for a built grid).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node index of lattice cell `(i, j)`, if that cell is a node.
    #[inline]
    pub fn node_at(&self, i: i32, j: i32) -> Option<usize> {
        let a = i - self.i0;
        let b = j - self.j0;
        if a < 0 || b < 0 || a >= self.nx as i32 || b >= self.ny as i32 {
            return None;
        }
        let k = self.index[b as usize * self.nx + a as usize];
        (k != NONE).then_some(k as usize)
    }

    /// True when node `k` is a full cell with no absorbed orphan area.
    #[inline]
    pub fn is_regular(&self, k: usize) -> bool {
        self.regular[k]
    }

    /// Lattice cell containing the point `z`.
    pub fn cell_of(&self, z: Complex<T>) -> (i32, i32) {
        ((z.re / self.h).floor().to_i32().unwrap_or(i32::MIN), (z.im / self.h).floor().to_i32().unwrap_or(i32::MIN))
    }

    /// Lattice cell center for index `(i, j)`.
    pub fn cell_center(&self, i: i32, j: i32) -> Complex<T> {
        let half = T::c(0.5);
        Complex::new((T::c(i as f64) + half) * self.h, (T::c(j as f64) + half) * self.h)
    }

    /// Extent of the lattice bounding box in cells `(i0, j0, nx, ny)`.
    pub fn extent(&self) -> (i32, i32, usize, usize) {
        (self.i0, self.j0, self.nx, self.ny)
    }

    /// Sum of quadrature weights.
    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Nodes at distance at least `margin` from the boundary.
    pub fn interior_nodes(&self, margin: T) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.domain.boundary_distance(self.nodes[k]) >= margin).collect()
    }

    /// Largest number of nodes in one lattice row or column.
    pub fn max_extent_nodes(&self) -> usize {
        let mut best = 0;
        let mut count_x = vec![0usize; self.ny];
        let mut count_y = vec![0usize; self.nx];
        for &(i, j) in &self.cells {
            count_x[(j - self.j0) as usize] += 1;
            count_y[(i - self.i0) as usize] += 1;
        }
        for c in count_x.into_iter().chain(count_y) {
            best = best.max(c);
        }
        best
    }

    /// Interpolates per-node values at `z`.
    ///
    /// Bilinear when the four surrounding cells are nodes; otherwise an affine
    /// least-squares fit through nodes within `2.5h`. The flag is set when no
    /// node lies within `2h` of `z` and the value is a first-order extrapolation.
    pub fn interpolate(&self, values: &[Complex<T>], z: Complex<T>) -> (Complex<T>, bool) {
        let h = self.h;
        let half = T::c(0.5);
        let u = z.re / h - half;
        let v = z.im / h - half;
        let i = u.floor().to_i32().unwrap_or(0);
        let j = v.floor().to_i32().unwrap_or(0);
        let fu = u - T::c(i as f64);
        let fv = v - T::c(j as f64);
        if let (Some(a), Some(b), Some(c), Some(d)) =
            (self.node_at(i, j), self.node_at(i + 1, j), self.node_at(i, j + 1), self.node_at(i + 1, j + 1))
        {
            let one = T::one();
            let val = values[a] * ((one - fu) * (one - fv))
                + values[b] * (fu * (one - fv))
                + values[c] * ((one - fu) * fv)
                + values[d] * (fu * fv);
            return (val, false);
        }
        let near = self.nodes_near(z, 2, T::c(2.5) * h);
        let close = near.iter().any(|&k| (self.nodes[k] - z).norm() <= T::c(2.0) * h);
        if close {
            if let Some(val) = self.affine_fit(values, &near, z) {
                return (val, false);
            }
            let k = *near
                .iter()
                .min_by(|&&a, &&b| (self.nodes[a] - z).norm().partial_cmp(&(self.nodes[b] - z).norm()).unwrap())
                .unwrap();
            return (values[k], false);
        }
        let mut bk = 0;
        let mut bd = T::infinity();
        for (k, n) in self.nodes.iter().enumerate() {
            let d = (n - z).norm();
            if d < bd {
                bd = d;
                bk = k;
            }
        }
        let nk = self.nodes[bk];
        let near = self.nodes_near(nk, 2, T::c(2.5) * h);
        let val = self.affine_fit(values, &near, z).unwrap_or(values[bk]);
        (val, true)
    }

    fn nodes_near(&self, z: Complex<T>, reach: i32, radius: T) -> Vec<usize> {
        let (ci, cj) = self.cell_of(z);
        let mut out = Vec::new();
        for j in cj - reach..=cj + reach {
            for i in ci - reach..=ci + reach {
                if let Some(k) = self.node_at(i, j) {
                    if (self.nodes[k] - z).norm() <= radius {
                        out.push(k);
                    }
                }
            }
        }
        out
    }

    fn affine_fit(&self, values: &[Complex<T>], near: &[usize], z: Complex<T>) -> Option<Complex<T>> {
        if near.len() < 3 {
            return None;
        }
        let h = self.h;
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[T::zero(); 3]; 3];
        let mut rhs = [zero; 3];
        for &k in near {
            let d = (self.nodes[k] - z) / h;
            let phi = [T::one(), d.re, d.im];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += phi[r] * phi[c];
                }
                rhs[r] += values[k] * phi[r];
            }
        }
        solve3(m, rhs).map(|x| x[0])
    }
}

/// Solves a 3x3 real system with complex right-hand side by Gaussian elimination.
fn solve3<T: Real>(mut m: [[T; 3]; 3], mut b: [Complex<T>; 3]) -> Option<[Complex<T>; 3]> {
    let scale = m.iter().flatten().fold(T::zero(), |a, &x| a.max(x.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()).unwrap();
        if m[piv][col].abs() <= scale * T::c(1e-6) {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= b[col] * f;
        }
    }
    let mut x = [Complex::new(T::zero(), T::zero()); 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in (r + 1)..3 {
            s -= x[c] * m[r][c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

/// A sampled complex, possibly vector-valued, function on a grid.
///
/// Values are stored node-major: component `c` of node `k` is `values[k * dim + c]`.
#[derive(Clone, Debug)]
pub struct GridField<T> {
    /// The shared grid.
    pub grid: Arc<Grid<T>>,
    /// Number of components per node.
    pub dim: usize,
    /// Node-major values.
    pub values: Vec<Complex<T>>,
}

impl<T: Real> GridField<T> {
    /// A scalar field sampled from `f` at the nodes.
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let values = grid.nodes.iter().map(|&z| f(z)).collect();
        Self { grid: grid.clone(), dim: 1, values }
    }

    /// A vector field with `dim` components sampled from `f`.
    pub fn from_fn_vec(grid: &Arc<Grid<T>>, dim: usize, f: impl Fn(Complex<T>, &mut [Complex<T>])) -> Self {
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len() * dim];
        for (k, &z) in grid.nodes.iter().enumerate() {
            f(z, &mut values[k * dim..(k + 1) * dim]);
        }
        Self { grid: grid.clone(), dim, values }
    }

    /// A scalar field from explicit per-node values.
    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>) -> Self {
        assert_eq!(values.len(), grid.len(), "one value per node");
        Self { grid: grid.clone(), dim: 1, values }
    }

    /// A vector field from node-major values.
    pub fn from_values_vec(grid: &Arc<Grid<T>>, dim: usize, values: Vec<Complex<T>>) -> Self {
        assert_eq!(values.len(), grid.len() * dim, "dim values per node");
        Self { grid: grid.clone(), dim, values }
    }

    /// The zero field with `dim` components.
    pub fn zeros(grid: &Arc<Grid<T>>, dim: usize) -> Self {
        Self { grid: grid.clone(), dim, values: vec![Complex::new(T::zero(), T::zero()); grid.len() * dim] }
    }

    /// Extracts component `c` as a scalar field.
    pub fn component(&self, c: usize) -> Self {
        let values = (0..self.grid.len()).map(|k| self.values[k * self.dim + c]).collect();
        Self { grid: self.grid.clone(), dim: 1, values }
    }

    /// Assembles a vector field from scalar fields on the same grid.
    pub fn stack(parts: &[Self]) -> Self {
        let grid = parts[0].grid.clone();
        let dim = parts.len();
        let mut values = Vec::with_capacity(grid.len() * dim);
        for k in 0..grid.len() {
            for p in parts {
                values.push(p.values[k]);
            }
        }
        Self { grid, dim, values }
    }

    /// Value of component `c` at node `k`.
    #[inline]
    pub fn at(&self, k: usize, c: usize) -> Complex<T> {
        self.values[k * self.dim + c]
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { grid: self.grid.clone(), dim: self.dim, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Componentwise combination of two fields on the same grid.
    pub fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "fields must share grid and dimension");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), dim: self.dim, values }
    }

    /// Pointwise conjugate.
    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Largest modulus over all values.
    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Largest modulus over the listed nodes.
    pub fn sup_norm_on(&self, nodes: &[usize]) -> T {
        let mut m = T::zero();
        for &k in nodes {
            for c in 0..self.dim {
                m = m.max(self.at(k, c).norm());
            }
        }
        m
    }

    /// True when every value is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Interpolated value of component `c` at `z` with the extrapolation flag.
    pub fn interpolate(&self, z: Complex<T>, c: usize) -> (Complex<T>, bool) {
        if self.dim == 1 {
            self.grid.interpolate(&self.values, z)
        } else {
            let comp: Vec<Complex<T>> = (0..self.grid.len()).map(|k| self.at(k, c)).collect();
            self.grid.interpolate(&comp, z)
        }
    }
}

/// Builds the grid of pitch `h` on `domain`, carrying the unit field.
pub fn build_grid<T: Real>(domain: DomainSpec<T>, h: T) -> Result<GridField<T>> {
    let grid = Arc::new(Grid::build(domain, h)?);
    Ok(GridField::from_fn(&grid, |_| Complex::new(T::one(), T::zero())))
}
