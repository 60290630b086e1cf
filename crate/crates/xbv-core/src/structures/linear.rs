//! Linear complex structures on `R^{2n}` given by `(0,1)` vector fields.
//!
//! Real vectors use components `(x_1, ..., x_n, y_1, ..., y_n)`. A matrix `J`
//! here always acts on component vectors, so the standard structure
//! `J ∂_{x_k} = ∂_{y_k}` is `[[0, -I], [I, 0]]`; the transpose of this
//! matrix describes the action on the basis row `(∂_x, ∂_y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex matrix.
pub type CMat = DMatrix<Complex<f64>>;
/// Real matrix.
pub type RMat = DMatrix<f64>;
/// Complex vector.
pub type CVec = DVector<Complex<f64>>;

/// Smallest relative singular value accepted as invertible.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Power iterations of [`operator_norm`].
pub const POWER_ITERATIONS: usize = 200;
/// Relative stopping tolerance of [`operator_norm`].
pub const POWER_TOL: f64 = 1e-12;

/// The structure whose `(0,1)` space is spanned by
/// `X_j = Σ_k (b_{jk} ∂_{z̄_k} + a_{jk} ∂_{z_k})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearStructure {
    /// Complex dimension.
    pub n: usize,
    /// Coefficients of `∂_z`.
    pub a: CMat,
    /// Coefficients of `∂_z̄`.
    pub b: CMat,
    /// Real `2n × 2n` matrix `K` with `J^t = (K^t)^{-1} J_st K^t` on basis rows.
    pub k: RMat,
    /// The structure acting on component vectors.
    pub j: RMat,
}

impl LinearStructure {
    /// `max |J² + I|` entrywise.
    pub fn square_residual(&self) -> f64 {
        square_residual(&self.j)
    }
}

/// `max |J² + I|` entrywise.
pub fn square_residual(j: &RMat) -> f64 {
    let sq = j * j + RMat::identity(j.nrows(), j.ncols());
    sq.amax()
}

/// The standard structure `[[0, -I], [I, 0]]` on component vectors.
pub fn j_standard(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(n + k, k)] = 1.0;
        j[(k, n + k)] = -1.0;
    }
    j
}

/// The structure of `A`, `B` after checking that `[[B, A], [Ā, B̄]]` is
/// invertible and that `J² = -I`.
///
/// With `U_j + i V_j = 2X_j` the structure satisfies `J U_j = V_j`. On basis
/// rows this reads `J^t = (K^t)^{-1} J_st K^t` where
/// `K = [[Re(B+A)^t, Im(A+B)^t], [Im(A−B)^t, Re(B−A)^t]]`.
pub fn j_from_ab(a: &CMat, b: &CMat) -> Result<LinearStructure> {
    let n = a.nrows();
    if n == 0 || a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::InvalidInput("A and B must be square of the same size".into()));
    }
    let mut block = CMat::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(b);
    block.view_mut((0, n), (n, n)).copy_from(a);
    block.view_mut((n, 0), (n, n)).copy_from(&a.map(|v| v.conj()));
    block.view_mut((n, n), (n, n)).copy_from(&b.map(|v| v.conj()));
    check_invertible(&block, "block matrix [[B, A], [conj A, conj B]]")?;

    let re = |m: CMat| m.map(|v| v.re);
    let im = |m: CMat| m.map(|v| v.im);
    let mut k = RMat::zeros(2 * n, 2 * n);
    k.view_mut((0, 0), (n, n)).copy_from(&re(b + a).transpose());
    k.view_mut((0, n), (n, n)).copy_from(&im(a + b).transpose());
    k.view_mut((n, 0), (n, n)).copy_from(&im(a - b).transpose());
    k.view_mut((n, n), (n, n)).copy_from(&re(b - a).transpose());
    let kt = k.transpose();
    let kt_inv = kt.clone().try_inverse().ok_or_else(|| Error::Singular("K is singular".into()))?;
    let j_st_rows = j_standard(n).transpose();
    let j = (kt_inv * j_st_rows * kt).transpose();
    check_square(&j)?;
    Ok(LinearStructure { n, a: a.clone(), b: b.clone(), k, j })
}

/// The structure whose `(0,1)` space is spanned by the rows of `fields`,
/// written in components `(∂_{x_1}, ..., ∂_{x_n}, ∂_{y_1}, ..., ∂_{y_n})`.
pub fn j_from_fields(fields: &CMat) -> Result<RMat> {
    let n = fields.nrows();
    if n == 0 || fields.ncols() != 2 * n {
        return Err(Error::InvalidInput("need n fields with 2n components".into()));
    }
    let mut p = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        for c in 0..2 * n {
            p[(c, j)] = fields[(j, c)].re;
            p[(c, n + j)] = fields[(j, c)].im;
        }
    }
    let p_inv = p.clone().try_inverse().ok_or_else(|| Error::Singular("fields do not span a (0,1) space".into()))?;
    let j = &p * j_standard(n) * p_inv;
    check_square(&j)?;
    Ok(j)
}

/// `(A, B)` with `X_j = Σ_k a_{jk} ∂_{z_k} + b_{jk} ∂_{z̄_k}` for fields in
/// real components, using `∂_x = ∂_z + ∂_z̄` and `∂_y = i(∂_z − ∂_z̄)`.
pub fn fields_to_ab(fields: &CMat) -> (CMat, CMat) {
    let n = fields.nrows();
    let i = Complex::new(0.0, 1.0);
    let a = CMat::from_fn(n, n, |j, k| fields[(j, k)] + i * fields[(j, n + k)]);
    let b = CMat::from_fn(n, n, |j, k| fields[(j, k)] - i * fields[(j, n + k)]);
    (a, b)
}

/// Fields in real components with `X_j = Σ_k a_{jk} ∂_{z_k} + b_{jk} ∂_{z̄_k}`.
pub fn ab_to_fields(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let half = Complex::new(0.5, 0.0);
    let ihalf = Complex::new(0.0, 0.5);
    CMat::from_fn(n, 2 * n, |j, c| if c < n { half * (b[(j, c)] + a[(j, c)]) } else { ihalf * (b[(j, c - n)] - a[(j, c - n)]) })
}

/// Fields pushed forward by the real linear map `r` of `R^{2n}`.
pub fn push_forward(fields: &CMat, r: &RMat) -> CMat {
    let rc = r.map(|v| Complex::new(v, 0.0));
    (rc * fields.transpose()).transpose()
}

/// The normalization `a = B^{-1} A` of a single pair, with its
/// operator norm.
pub fn normalize(a: &CMat, b: &CMat) -> Result<(CMat, f64)> {
    check_invertible(b, "B")?;
    let inv = b.clone().try_inverse().ok_or_else(|| Error::Singular("B is singular".into()))?;
    let an = inv * a;
    let norm = complex_norm(&an);
    Ok((an, norm))
}

/// Spectral norm of a real matrix by power iteration on `ΔᵗΔ`.
///
/// Starts from the all-ones vector plus a fixed perturbation, iterates at most
/// [`POWER_ITERATIONS`] times and stops once the Rayleigh quotient changes by
/// less than [`POWER_TOL`] relative.
pub fn operator_norm(delta: &RMat) -> f64 {
    let n = delta.ncols();
    if n == 0 || delta.amax() == 0.0 {
        return 0.0;
    }
    let gram = delta.transpose() * delta;
    let mut v = DVector::from_fn(n, |k, _| 1.0 + 0.1 * (k as f64 + 1.0).sin());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = &gram * &v;
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w / wn;
        let done = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Spectral norm of a complex matrix from its singular values.
pub fn complex_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub(crate) fn check_invertible(m: &CMat, what: &str) -> Result<()> {
    let sv = m.clone().svd(false, false).singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0) || lo <= SINGULAR_TOL * hi {
        return Err(Error::Singular(format!("{what} is not invertible (singular values {lo:e} .. {hi:e})")));
    }
    Ok(())
}

fn check_square(j: &RMat) -> Result<()> {
    let res = square_residual(j);
    if !(res <= 1e-9 * (1.0 + j.amax() * j.amax())) {
        return Err(Error::Singular(format!("J^2 + I has residual {res:e}")));
    }
    Ok(())
}
