//! Search for a tangent vector whose images under two structures lie on the
//! same side of a hyperplane.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{operator_norm, RMat};
use crate::error::{Error, Result};

/// Score above which a candidate counts as a certificate.
pub const CERTIFICATE_THRESHOLD: f64 = 1e-8;
/// Local ascent steps after the lattice search.
pub const ASCENT_STEPS: usize = 20;
/// Seed of the quasi-uniform directions used when `dim T₀M ≥ 4`.
pub const SEARCH_SEED: u64 = 0x5eed_cafe;

/// A hyperplane through the origin of `R^{2n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    /// Unit normal.
    pub normal: Vec<f64>,
}

impl Hyperplane {
    /// Normalizes `normal`; rejects zero or non-finite input.
    pub fn new(normal: Vec<f64>) -> Result<Self> {
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidInput("hyperplane normal must be nonzero and finite".into()));
        }
        Ok(Self { normal: normal.into_iter().map(|v| v / len).collect() })
    }

    /// The coordinate hyperplane `{e_k · v = 0}` in dimension `dim`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut normal = vec![0.0; dim];
        normal[k] = 1.0;
        Self { normal }
    }

    fn normal_vec(&self) -> DVector<f64> {
        DVector::from_vec(self.normal.clone())
    }
}

/// Outcome of the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    /// A valid certificate was found.
    Found,
    /// No candidate passed the threshold; this does not prove nonexistence.
    NoneFound,
    /// No candidate passed and `‖J² − J¹‖` is at the limit value 2.
    Degenerate,
}

/// A tangent vector `v` with the signed normal components of `J¹v` and `J²v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCertificate {
    /// Unit vector in `T₀M` maximizing the score.
    pub v: Vec<f64>,
    /// `ν · J¹v`.
    pub s1: f64,
    /// `ν · J²v`.
    pub s2: f64,
    /// Search outcome.
    pub status: CertificateStatus,
    /// `‖J² − J¹‖`.
    pub distance: f64,
}

impl SideCertificate {
    /// Checks `v · ν = 0`, `|v| = 1` and `s₁ s₂ > 0` to the given tolerance.
    pub fn is_valid(&self, plane: &Hyperplane, tol: f64) -> bool {
        let dot: f64 = self.v.iter().zip(&plane.normal).map(|(a, b)| a * b).sum();
        let len = self.v.iter().map(|a| a * a).sum::<f64>().sqrt();
        dot.abs() <= tol && (len - 1.0).abs() <= tol && self.s1 * self.s2 > 0.0
    }
}

/// `max_σ min(σ s₁, σ s₂)`, positive exactly when `s₁` and `s₂` share a sign.
fn score(s1: f64, s2: f64) -> f64 {
    s1.min(s2).max(-(s1.max(s2)))
}

/// Searches unit vectors of `T₀M` for one whose images `J¹v`, `J²v` lie on
/// the same side of `M`.
///
/// Candidates come from a Fibonacci lattice of `density` points when
/// `dim T₀M = 3`, equally spaced angles when it is 2, `±` the basis vector
/// when it is 1, and seeded Gaussian directions otherwise. The best candidate
/// (lowest index on ties) is refined by a pattern search of
/// [`ASCENT_STEPS`] steps.
pub fn find_side_certificate(j1: &RMat, j2: &RMat, plane: &Hyperplane, density: usize) -> Result<SideCertificate> {
    let dim = plane.normal.len();
    if j1.shape() != (dim, dim) || j2.shape() != (dim, dim) || dim < 2 {
        return Err(Error::InvalidInput("structures and hyperplane dimensions differ".into()));
    }
    let nu = plane.normal_vec();
    let basis = tangent_basis(&nu);
    let d = basis.len();
    let r1 = j1.transpose() * &nu;
    let r2 = j2.transpose() * &nu;
    // Normal components of J^i v as linear forms in the tangent coordinates.
    let f1: Vec<f64> = basis.iter().map(|b| r1.dot(b)).collect();
    let f2: Vec<f64> = basis.iter().map(|b| r2.dot(b)).collect();
    let eval = |c: &[f64]| -> (f64, f64) {
        (c.iter().zip(&f1).map(|(a, b)| a * b).sum(), c.iter().zip(&f2).map(|(a, b)| a * b).sum())
    };

    let candidates = sphere_points(d, density.max(2));
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|c| {
            let (s1, s2) = eval(c);
            score(s1, s2)
        })
        .collect();
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    let mut c = candidates[best].clone();
    let mut current = scores[best];
    let mut step = 0.5 / (density as f64).sqrt().max(1.0);
    for _ in 0..ASCENT_STEPS {
        let mut improved = false;
        for axis in 0..d {
            for sign in [1.0, -1.0] {
                let mut trial = c.clone();
                trial[axis] += sign * step;
                let len = trial.iter().map(|v| v * v).sum::<f64>().sqrt();
                trial.iter_mut().for_each(|v| *v /= len);
                let (s1, s2) = eval(&trial);
                let s = score(s1, s2);
                if s > current {
                    current = s;
                    c = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let mut v = DVector::zeros(dim);
    for (ck, b) in c.iter().zip(&basis) {
        v += b * *ck;
    }
    v -= &nu * v.dot(&nu);
    v /= v.norm();
    let s1 = nu.dot(&(j1 * &v));
    let s2 = nu.dot(&(j2 * &v));
    let distance = operator_norm(&(j2 - j1));
    let status = if score(s1, s2) > CERTIFICATE_THRESHOLD {
        CertificateStatus::Found
    } else if distance >= 2.0 - 1e-8 {
        CertificateStatus::Degenerate
    } else {
        CertificateStatus::NoneFound
    };
    Ok(SideCertificate { v: v.iter().copied().collect(), s1, s2, status, distance })
}

/// Orthonormal basis of `ν^⊥` by Gram-Schmidt on the coordinate vectors.
fn tangent_basis(nu: &DVector<f64>) -> Vec<DVector<f64>> {
    let dim = nu.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim - 1);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| nu[a].abs().total_cmp(&nu[b].abs()));
    for &k in &order {
        if basis.len() == dim - 1 {
            break;
        }
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        e -= nu * nu.dot(&e);
        for b in &basis {
            e -= b * b.dot(&e);
        }
        let len = e.norm();
        if len > 1e-8 {
            basis.push(e / len);
        }
    }
    basis
}

/// Deterministic, roughly uniform points on the unit sphere of `R^d`.
pub fn sphere_points(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
            (0..count)
                .map(|_| {
                    let mut p: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let len = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    p.iter_mut().for_each(|v| *v /= len);
                    p
                })
                .collect()
        }
    }
}
