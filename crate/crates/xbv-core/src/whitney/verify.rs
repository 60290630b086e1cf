//! Finite-difference checks of jet reproduction, support and norm control.

use super::extend::JetFamily;
use super::tensor::TensorField;
use crate::error::{Error, Result};
use crate::Real;

/// Outcome of [`verify_jet`].
#[derive(Clone, Debug, PartialEq)]
pub struct JetReport<T> {
    /// `(I, max_x |∂_y^I Ef(x, 0) - f_I(x)|)` for every listed index.
    pub deviations: Vec<(Vec<usize>, T)>,
    /// Largest deviation over all listed indices.
    pub max_deviation: T,
    /// `max |Ef|` over grid points outside the open unit ball.
    pub support_violation: T,
    /// `support_violation == 0`.
    pub support_ok: bool,
}

/// Compares second-order central differences of `ef` on `{y = 0}` with the
/// listed jets and checks that `ef` vanishes outside the unit ball.
///
/// `ef` must live on `jets.x_axes × y^m` with a `y` axis containing 0, as
/// produced by [`super::whitney_extend`].
pub fn verify_jet<T: Real>(ef: &TensorField<T>, jets: &JetFamily<T>) -> Result<JetReport<T>> {
    let (n, m) = (jets.n, jets.m);
    if ef.dim() != n + m || ef.axes[..n] != jets.x_axes[..] {
        return Err(Error::InvalidInput("extension grid does not match the jet grid".into()));
    }
    let zero_idx: Vec<usize> = (n..n + m).map(|a| zero_index(&ef.axes[a])).collect::<Result<_>>()?;
    let shape = ef.shape();
    let xlen: usize = shape[..n].iter().product();
    let ylen: usize = shape[n..].iter().product();
    let mut yflat = 0usize;
    for (k, &z) in zero_idx.iter().enumerate() {
        yflat = yflat * shape[n + k] + z;
    }

    let mut deviations = Vec::with_capacity(jets.entries.len());
    let mut max_deviation = T::zero();
    for e in &jets.entries {
        let mut beta = vec![0; n];
        beta.extend_from_slice(&e.index);
        let d = ef.derivative(&beta);
        let dev = (0..xlen).map(|xi| (d[xi * ylen + yflat] - e.values[xi]).abs()).fold(T::zero(), T::max);
        max_deviation = max_deviation.max(dev);
        deviations.push((e.index.clone(), dev));
    }

    let mut point = vec![T::zero(); n + m];
    let mut support_violation = T::zero();
    for (flat, v) in ef.values.iter().enumerate() {
        ef.point(flat, &mut point);
        let r2: T = point.iter().map(|&x| x * x).sum();
        if r2 >= T::one() {
            support_violation = support_violation.max(v.abs());
        }
    }
    Ok(JetReport { deviations, max_deviation, support_violation, support_ok: support_violation == T::zero() })
}

/// `‖Ef‖_k / Σ_{|I| ≤ k} ‖f_I‖_{k-|I|}` with finite-difference `C^k` norms;
/// the ratio estimates the constant of the norm bound at order `k`.
pub fn norm_ratio<T: Real>(ef: &TensorField<T>, jets: &JetFamily<T>, k: usize) -> T {
    let denom: T = jets
        .entries
        .iter()
        .filter_map(|e| {
            let order = e.index.iter().sum::<usize>();
            (order <= k).then(|| jets.field(&e.index).ck_norm(k - order))
        })
        .sum();
    ef.ck_norm(k) / denom
}

fn zero_index<T: Real>(axis: &[T]) -> Result<usize> {
    let h = axis[1] - axis[0];
    axis.iter()
        .position(|&y| y.abs() <= T::c(1e-9) * h)
        .ok_or_else(|| Error::Resolution("the y axis does not contain 0".into()))
}
