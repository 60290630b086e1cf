//! Real fields on uniform tensor-product grids, with zero extension outside
//! the grid, cubic interpolation and central finite differences.

use crate::error::{Error, Result};
use crate::Real;

/// Real samples on the tensor product of uniform axes, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<T> {
    /// Coordinates along each axis, strictly increasing and uniformly spaced.
    pub axes: Vec<Vec<T>>,
    /// Row-major samples.
    pub values: Vec<T>,
}

/// `n + 1` equally spaced points from `lo` to `hi`.
pub fn uniform_axis<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    (0..=n).map(|k| lo + (hi - lo) * T::n(k) / T::n(n)).collect()
}

impl<T: Real> TensorField<T> {
    /// Field with given samples; checks the axes and the sample count.
    pub fn new(axes: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        for (k, axis) in axes.iter().enumerate() {
            check_axis(axis).map_err(|e| Error::InvalidInput(format!("axis {k}: {e}")))?;
        }
        let len: usize = axes.iter().map(Vec::len).product();
        if values.len() != len {
            return Err(Error::InvalidInput(format!("{} samples for a grid of {len} points", values.len())));
        }
        Ok(Self { axes, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(axes: Vec<Vec<T>>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let len: usize = axes.iter().map(Vec::len).product();
        let mut point = vec![T::zero(); axes.len()];
        let mut values = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(&axes, flat, &mut point);
            values.push(f(&point));
        }
        Self::new(axes, values)
    }

    /// Number of axes.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of points along each axis.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Spacing of each axis.
    pub fn spacing(&self) -> Vec<T> {
        self.axes.iter().map(|a| a[1] - a[0]).collect()
    }

    /// Coordinates of the sample with flat index `flat`.
    pub fn point(&self, flat: usize, out: &mut [T]) {
        unflatten(&self.axes, flat, out);
    }

    /// Largest absolute sample.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Tensor cubic Lagrange interpolation at `p`; samples outside the grid
    /// count as zero.
    pub fn interpolate(&self, p: &[T]) -> T {
        let d = self.dim();
        let mut base = [0isize; MAX_DIM];
        let mut weights = [[T::zero(); 4]; MAX_DIM];
        for a in 0..d {
            let axis = &self.axes[a];
            let h = axis[1] - axis[0];
            let s = (p[a] - axis[0]) / h;
            let k = s.floor();
            let t = s - k;
            base[a] = k.to_isize().unwrap_or(isize::MIN / 2) - 1;
            weights[a] = cubic_weights(t);
        }
        let shape = self.shape();
        let mut acc = T::zero();
        for combo in 0..4usize.pow(d as u32) {
            let mut flat = 0usize;
            let mut w = T::one();
            let mut inside = true;
            let mut c = combo;
            for a in 0..d {
                let off = c % 4;
                c /= 4;
                let idx = base[a] + off as isize;
                if idx < 0 || idx >= shape[a] as isize {
                    inside = false;
                    break;
                }
                flat = flat * shape[a] + idx as usize;
                w *= weights[a][off];
            }
            if inside {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Mixed partial `∂^β` by second-order central differences, one axis at a
    /// time, with zero samples outside the grid.
    pub fn derivative(&self, beta: &[usize]) -> Vec<T> {
        let shape = self.shape();
        let mut values = self.values.clone();
        for (a, &order) in beta.iter().enumerate() {
            if order > 0 {
                let h = self.axes[a][1] - self.axes[a][0];
                values = diff_axis(&values, &shape, a, order, h);
            }
        }
        values
    }

    /// `max_{|β| ≤ k} sup |∂^β f|` with the differences of [`Self::derivative`].
    pub fn ck_norm(&self, k: usize) -> T {
        let mut best = T::zero();
        for beta in multi_indices(self.dim(), k) {
            let d = self.derivative(&beta);
            best = best.max(d.iter().fold(T::zero(), |m, v| m.max(v.abs())));
        }
        best
    }
}

/// Largest number of axes accepted by [`TensorField::interpolate`].
pub const MAX_DIM: usize = 6;

fn check_axis<T: Real>(axis: &[T]) -> std::result::Result<(), String> {
    if axis.len() < 2 {
        return Err("needs at least two points".into());
    }
    let h = axis[1] - axis[0];
    if !(h > T::zero()) {
        return Err("must be increasing".into());
    }
    let tol = T::c(1e-6) * h;
    for (k, &x) in axis.iter().enumerate() {
        if (x - (axis[0] + h * T::n(k))).abs() > tol {
            return Err("must be uniformly spaced".into());
        }
    }
    Ok(())
}

fn unflatten<T: Real>(axes: &[Vec<T>], mut flat: usize, out: &mut [T]) {
    for a in (0..axes.len()).rev() {
        let n = axes[a].len();
        out[a] = axes[a][flat % n];
        flat /= n;
    }
}

/// Lagrange weights of the nodes `-1, 0, 1, 2` at `t ∈ [0, 1)`.
fn cubic_weights<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = T::c(2.0);
    let six = T::c(6.0);
    [
        -t * (t - one) * (t - two) / six,
        (t + one) * (t - one) * (t - two) / two,
        -(t + one) * t * (t - two) / two,
        (t + one) * t * (t - one) / six,
    ]
}

/// All multi-indices in `d` variables with total order at most `k`, in
/// graded order.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut current = vec![0; d];
        fill(d, 0, total, &mut current, &mut out);
    }
    out
}

fn fill(d: usize, axis: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if d == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if axis == d - 1 {
        current[axis] = left;
        out.push(current.clone());
        return;
    }
    for v in (0..=left).rev() {
        current[axis] = v;
        fill(d, axis + 1, left - v, current, out);
    }
}

/// Symmetric central stencil of second-order accuracy for the `order`-th
/// derivative, as offsets `-p..=p` and unit-spacing weights.
pub fn central_stencil(order: usize) -> Vec<f64> {
    let p = order.div_ceil(2);
    let p = p.max(1);
    let offsets: Vec<f64> = (-(p as isize)..=p as isize).map(|k| k as f64).collect();
    fd_weights(order, &offsets)
}

/// Finite-difference weights for the `order`-th derivative at 0 on the given
/// offsets, by Fornberg's recursion.
pub fn fd_weights(order: usize, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

fn diff_axis<T: Real>(values: &[T], shape: &[usize], axis: usize, order: usize, h: T) -> Vec<T> {
    let weights: Vec<T> = central_stencil(order).into_iter().map(T::c).collect();
    let p = (weights.len() / 2) as isize;
    let scale = h.powi(order as i32);
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let mut out = vec![T::zero(); values.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let idx = ((flat / stride) % n) as isize;
        let mut acc = T::zero();
        for (k, &w) in weights.iter().enumerate() {
            let j = idx + k as isize - p;
            if j >= 0 && j < n as isize {
                let nb = (flat as isize + (j - idx) * stride as isize) as usize;
                acc += w * values[nb];
            }
        }
        *slot = acc / scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_match_textbook_weights() {
        assert_eq!(central_stencil(1), vec![-0.5, 0.0, 0.5]);
        assert_eq!(central_stencil(2), vec![1.0, -2.0, 1.0]);
        let s3 = central_stencil(3);
        for (a, b) in s3.iter().zip([-0.5, 1.0, 0.0, -1.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let axis = uniform_axis(-1.0f64, 1.0, 20);
        let f = TensorField::from_fn(vec![axis.clone(), axis], |p| p[0].powi(3) - 2.0 * p[0] * p[1] * p[1]).unwrap();
        for &(x, y) in &[(0.013, -0.31), (0.5, 0.77), (-0.62, 0.05)] {
            let exact: f64 = x * x * x - 2.0 * x * y * y;
            assert!((f.interpolate(&[x, y]) - exact).abs() < 1e-12);
        }
        assert_eq!(f.interpolate(&[3.0, 0.0]), 0.0);
    }

    #[test]
    fn multi_indices_are_graded() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(0, 3), vec![Vec::<usize>::new()]);
    }
}
