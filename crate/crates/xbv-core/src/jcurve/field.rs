//! Variable structures `X_j = Σ_k b_{jk}(z) ∂_{z̄_k} + a_{jk}(z) ∂_{z_k}` on a
//! polydisc of `C^n`.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structures::{j_from_ab, CMat, CVec, RMat};

/// Default polydisc radius of the coefficient domain.
pub const DEFAULT_DOMAIN_RADIUS: f64 = 2.0;

type Coefficients = dyn Fn(&CVec) -> (CMat, CMat) + Send + Sync;

/// A structure given by coefficient matrices `A(z)`, `B(z)` on the polydisc
/// `{|z_k| < radius}`.
#[derive(Clone)]
pub struct StructureField {
    /// Complex dimension.
    pub n: usize,
    /// Polydisc radius of the domain `Ω`.
    pub radius: f64,
    coeffs: Arc<Coefficients>,
}

impl std::fmt::Debug for StructureField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StructureField").field("n", &self.n).field("radius", &self.radius).finish()
    }
}

impl StructureField {
    /// General coefficients `z ↦ (A(z), B(z))`.
    pub fn new(n: usize, radius: f64, f: impl Fn(&CVec) -> (CMat, CMat) + Send + Sync + 'static) -> Result<Self> {
        if n == 0 || !(radius > 0.0) {
            return Err(Error::InvalidInput("structure needs n >= 1 and a positive domain radius".into()));
        }
        Ok(Self { n, radius, coeffs: Arc::new(f) })
    }

    /// Normalized coefficients `B ≡ I` with the given `A(z)`.
    pub fn normalized(n: usize, radius: f64, a: impl Fn(&CVec) -> CMat + Send + Sync + 'static) -> Result<Self> {
        Self::new(n, radius, move |z| (a(z), CMat::identity(n, n)))
    }

    /// `A(z) = A₀ + Σ_k z_k A_k` with `B ≡ I`.
    pub fn affine(a0: CMat, linear: Vec<CMat>, radius: f64) -> Result<Self> {
        let n = a0.nrows();
        if a0.shape() != (n, n) || linear.iter().any(|m| m.shape() != (n, n)) || !(linear.is_empty() || linear.len() == n)
        {
            return Err(Error::InvalidInput("affine structure needs n x n matrices and n linear terms".into()));
        }
        Self::normalized(n, radius, move |z| {
            let mut a = a0.clone();
            for (zk, m) in z.iter().zip(&linear) {
                a += m * *zk;
            }
            a
        })
    }

    /// Whether `z` lies in the open polydisc.
    pub fn contains(&self, z: &CVec) -> bool {
        z.len() == self.n && z.iter().all(|v| v.norm() < self.radius)
    }

    /// `(A(z), B(z))`.
    pub fn ab(&self, z: &CVec) -> (CMat, CMat) {
        (self.coeffs)(z)
    }

    /// `A(z)`.
    pub fn a(&self, z: &CVec) -> CMat {
        (self.coeffs)(z).0
    }

    /// The structure at the real point `p = (x, y)` acting on component vectors.
    pub fn j_at(&self, p: &DVector<f64>) -> Result<RMat> {
        let z = to_complex(p);
        let (a, b) = self.ab(&z);
        Ok(j_from_ab(&a, &b)?.j)
    }

    /// The field `z ↦ (A(μz), B(μz))` on the polydisc of radius `radius / μ`.
    pub fn dilated(&self, mu: f64) -> Self {
        let inner = self.coeffs.clone();
        Self {
            n: self.n,
            radius: self.radius / mu,
            coeffs: Arc::new(move |z: &CVec| inner(&z.map(|v| v * mu))),
        }
    }
}

/// `(x₁, …, x_n, y₁, …, y_n) ↦ (x₁ + i y₁, …)`.
pub fn to_complex(p: &DVector<f64>) -> CVec {
    let n = p.len() / 2;
    CVec::from_fn(n, |k, _| Complex::new(p[k], p[n + k]))
}

/// `(z₁, …, z_n) ↦ (Re z, Im z)`.
pub fn to_real(z: &CVec) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |k, _| if k < n { z[k].re } else { z[k - n].im })
}

/// JSON description of an affine structure `A(z) = A₀ + Σ_k z_k A_k`,
/// `B ≡ I`; complex entries are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    /// Complex dimension.
    pub n: usize,
    /// Domain polydisc radius.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// `A₀`, row-major.
    #[serde(default)]
    pub a0: Vec<Vec<[f64; 2]>>,
    /// `A_k` for `k = 1..n`, each row-major; empty for constant `A`.
    #[serde(default)]
    pub linear: Vec<Vec<Vec<[f64; 2]>>>,
}

fn default_radius() -> f64 {
    DEFAULT_DOMAIN_RADIUS
}

impl StructureSpec {
    /// Builds the field.
    pub fn build(&self) -> Result<StructureField> {
        let n = self.n;
        let a0 = if self.a0.is_empty() { CMat::zeros(n, n) } else { parse_matrix(&self.a0, n)? };
        let linear = self.linear.iter().map(|m| parse_matrix(m, n)).collect::<Result<Vec<_>>>()?;
        StructureField::affine(a0, linear, self.radius)
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], n: usize) -> Result<CMat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("expected a {n} x {n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}
