//! A one-parameter family of structures on `R^4` deforming `J_st` into
//! `-J_st`, and normalization of variable coefficient fields.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::linear::{check_invertible, complex_norm, j_from_fields, CMat, CVec, RMat};
use crate::error::{Error, Result};

/// The family member at parameter `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleStructure {
    /// Parameter `t ∈ [0, π]`.
    pub t: f64,
    /// Rows `X₁ = cos t ∂_{x₁} + sin t ∂_{x₂} + i ∂_{y₁}` and
    /// `X₂ = −sin t ∂_{x₁} + cos t ∂_{x₂} + i ∂_{y₂}` in real components.
    pub fields: CMat,
    /// Normalized coefficients `[[0, −c], [c, 0]]`, `c = cos t / (1 + sin t)`,
    /// in the coordinates of [`example_coordinates`].
    pub a: CMat,
    /// The structure on component vectors of `R^4`.
    pub j: RMat,
}

/// Builds the family member at `t`; rejects `t ∉ [0, π]`.
pub fn example_family(t: f64) -> Result<ExampleStructure> {
    if !(0.0..=std::f64::consts::PI).contains(&t) {
        return Err(Error::InvalidInput(format!("parameter {t} outside [0, pi]")));
    }
    let (s, c) = t.sin_cos();
    let r = |v: f64| Complex::new(v, 0.0);
    let i = Complex::new(0.0, 1.0);
    let zero = r(0.0);
    let fields = DMatrix::from_row_slice(2, 4, &[r(c), r(s), i, zero, r(-s), r(c), zero, i]);
    let q = c / (1.0 + s);
    let a = DMatrix::from_row_slice(2, 2, &[zero, r(-q), r(q), zero]);
    let j = j_from_fields(&fields)?;
    Ok(ExampleStructure { t, fields, a, j })
}

/// The real linear map `(x, y) ↦ (Re w, Im w)` of the coordinates
/// `w₁ = (x₂ + i y₁)/√2`, `w₂ = (−x₁ + i y₂)/√2`.
pub fn example_coordinates() -> RMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(4, 4, &[0.0, s, 0.0, 0.0, -s, 0.0, 0.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0, s])
}

/// Coefficients of a variable structure in the coordinates that kill `A` at
/// a point.
#[derive(Clone, Debug)]
pub struct NormalizedField {
    /// Base point `p`.
    pub at: CVec,
    /// `P = B̄^t(p)` in `z = p + P w + Q w̄`.
    pub p: CMat,
    /// `Q = A^t(p)`.
    pub q: CMat,
    /// `(w, a(w))` with `X = ∂_w̄ + a ∂_w` up to an invertible recombination.
    pub samples: Vec<(CVec, CMat)>,
    /// Largest operator norm of `a` over the samples.
    pub max_norm: f64,
}

/// Pulls a structure `X_j = Σ_k b_{jk}(z) ∂_{z̄_k} + a_{jk}(z) ∂_{z_k}` back
/// under `z = p + B̄^t(p) w + A^t(p) w̄` and normalizes it to the form
/// `∂_{w̄_j} + Σ_k a_{jk}(w) ∂_{w_k}` at each sample `w`.
///
/// The change of variables sends `∂_{w̄}` to `X` at `p`, so `a(0) = 0`.
/// Fails when `[[B, A], [Ā, B̄]]` is singular at `p` or when `‖a(w)‖ ≥ 1`
/// at some sample.
pub fn standard_form(
    field: impl Fn(&CVec) -> (CMat, CMat),
    at: &CVec,
    samples: &[CVec],
) -> Result<NormalizedField> {
    let n = at.len();
    let (a0, b0) = field(at);
    if a0.shape() != (n, n) || b0.shape() != (n, n) {
        return Err(Error::InvalidInput("coefficient matrices must be n x n".into()));
    }
    let mut block = CMat::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&b0);
    block.view_mut((0, n), (n, n)).copy_from(&a0);
    block.view_mut((n, 0), (n, n)).copy_from(&a0.map(|v| v.conj()));
    block.view_mut((n, n), (n, n)).copy_from(&b0.map(|v| v.conj()));
    check_invertible(&block, "block matrix at the base point")?;
    let p = b0.map(|v| v.conj()).transpose();
    let q = a0.transpose();

    // Rows of m express (∂_w, ∂_w̄) in (∂_z, ∂_z̄).
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&p.transpose());
    m.view_mut((0, n), (n, n)).copy_from(&q.map(|v| v.conj()).transpose());
    m.view_mut((n, 0), (n, n)).copy_from(&q.transpose());
    m.view_mut((n, n), (n, n)).copy_from(&p.map(|v| v.conj()).transpose());
    let m_inv = m.try_inverse().ok_or_else(|| Error::Singular("coordinate change is singular".into()))?;

    let mut out = Vec::with_capacity(samples.len());
    let mut max_norm: f64 = 0.0;
    for w in samples {
        if w.len() != n {
            return Err(Error::InvalidInput("sample dimension differs from the base point".into()));
        }
        let z = at + &p * w + &q * w.map(|v| v.conj());
        let (a, b) = field(&z);
        let mut ab = CMat::zeros(n, 2 * n);
        ab.view_mut((0, 0), (n, n)).copy_from(&a);
        ab.view_mut((0, n), (n, n)).copy_from(&b);
        let coeffs = ab * &m_inv;
        let aw = coeffs.view((0, 0), (n, n)).into_owned();
        let bw = coeffs.view((0, n), (n, n)).into_owned();
        let bw_inv = bw.try_inverse().ok_or_else(|| Error::Singular(format!("B is singular at {z}")))?;
        let an = bw_inv * aw;
        let norm = complex_norm(&an);
        if !(norm < 1.0) {
            return Err(Error::NormTooLarge { norm, threshold: 1.0 });
        }
        max_norm = max_norm.max(norm);
        out.push((w.clone(), an));
    }
    Ok(NormalizedField { at: at.clone(), p, q, samples: out, max_norm })
}
