//! Direction sets whose `m`-th powers `(v_j · ξ)^m` span every monomial of
//! degree `m ≤ k`, and their deformation under perturbed directions.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::whitney::multi_indices;

/// Largest accepted condition number of a Vandermonde solve.
pub const MAX_CONDITION: f64 = 1e12;
/// Random test vectors used to verify the identity before returning.
pub const IDENTITY_SAMPLES: usize = 50;
/// Relative error allowed in the identity check.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Seed of the identity test vectors.
pub const IDENTITY_SEED: u64 = 0xd1ec_7105;

/// Coefficients `c_{α,j}` with `ξ^α = Σ_j c_{α,j} (v_j · ξ)^m` for `|α| = m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    /// Degree `m`.
    pub degree: usize,
    /// Multi-indices of degree `m` in graded order; row labels of `c`.
    pub alphas: Vec<Vec<usize>>,
    /// `c[(row, j)]` for each `α` and direction `j`.
    pub c: DMatrix<f64>,
}

impl CoefficientTable {
    /// Row of `alpha`, if it has this degree.
    pub fn row(&self, alpha: &[usize]) -> Option<usize> {
        self.alphas.iter().position(|a| a == alpha)
    }
}

/// Directions `v_j = (1, v'_j)`, `|v'_j| < ε`, with coefficient tables for
/// every degree `1 ≤ m ≤ k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    /// Dimension.
    pub n: usize,
    /// Highest degree.
    pub k: usize,
    /// Bound on `|v'_j|`.
    pub eps: f64,
    /// The directions.
    pub vectors: Vec<DVector<f64>>,
    /// `tables[m − 1]` holds degree `m`.
    pub tables: Vec<CoefficientTable>,
    /// Largest Vandermonde condition number met during the construction.
    pub condition: f64,
}

impl DirectionSet {
    /// Number of directions `N`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Whether the set is empty (never true for a built set).
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The table of degree `m`.
    pub fn table(&self, m: usize) -> Option<&CoefficientTable> {
        self.tables.get(m.checked_sub(1)?)
    }

    /// Largest `|ξ^α − Σ_j c_{α,j} (v_j · ξ)^{|α|}| / |ξ|^{|α|}` over all
    /// tabulated `α`.
    pub fn identity_error(&self, xi: &DVector<f64>) -> f64 {
        let dots: Vec<f64> = self.vectors.iter().map(|v| v.dot(xi)).collect();
        let mut worst: f64 = 0.0;
        for table in &self.tables {
            let m = table.degree as i32;
            let scale = xi.norm().powi(m).max(f64::MIN_POSITIVE);
            for (row, alpha) in table.alphas.iter().enumerate() {
                let mono = monomial(xi.as_slice(), alpha);
                let sum: f64 = dots.iter().enumerate().map(|(j, d)| table.c[(row, j)] * d.powi(m)).sum();
                worst = worst.max((mono - sum).abs() / scale);
            }
        }
        worst
    }
}

/// `ξ^α`.
pub fn monomial(xi: &[f64], alpha: &[usize]) -> f64 {
    xi.iter().zip(alpha).map(|(x, &a)| x.powi(a as i32)).product()
}

/// Multi-indices of exact degree `m` in `n` variables, graded order.
pub fn degree_indices(n: usize, m: usize) -> Vec<Vec<usize>> {
    multi_indices(n, m).into_iter().filter(|a| a.iter().sum::<usize>() == m).collect()
}

fn binomial(m: usize, q: usize) -> f64 {
    (0..q).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

/// Builds a direction set by induction on `n`.
///
/// For `n = 1` the only direction is `1`. Given a set `w_l` for `n − 1` built
/// with `ε/2`, the new directions are `(w_l, λ_j)` with `λ_j = ε j / (2k)`,
/// `j = 0, …, k`: a monomial `ξ_n^i P(ξ')` of degree `m` is expanded through
/// `P = Σ_l c'_l (w_l · ξ')^{m−i}`, and each `ξ_n^i (w_l · ξ')^{m−i}` through
/// the Vandermonde system `Σ_{j ≤ m} d_j C(m, q) λ_j^q = δ_{qi}`. The identity
/// is checked on [`IDENTITY_SAMPLES`] seeded random vectors before returning.
pub fn build_direction_set(n: usize, k: usize, eps: f64) -> Result<DirectionSet> {
    if n == 0 || k == 0 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput("need n >= 1, k >= 1 and 0 < eps < 1".into()));
    }
    let (vectors, tables, condition) = build(n, k, eps)?;
    let tables = tables
        .into_iter()
        .enumerate()
        .map(|(i, c)| CoefficientTable { degree: i + 1, alphas: degree_indices(n, i + 1), c })
        .collect();
    let set = DirectionSet { n, k, eps, vectors, tables, condition };
    let mut rng = ChaCha8Rng::seed_from_u64(IDENTITY_SEED);
    for _ in 0..IDENTITY_SAMPLES {
        let xi = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let err = set.identity_error(&xi);
        if !(err <= IDENTITY_TOL) {
            return Err(Error::Singular(format!("direction identity fails with relative error {err:e}")));
        }
    }
    Ok(set)
}

type Built = (Vec<DVector<f64>>, Vec<DMatrix<f64>>, f64);

fn build(n: usize, k: usize, eps: f64) -> Result<Built> {
    if n == 1 {
        let tables = (1..=k).map(|_| DMatrix::from_element(1, 1, 1.0)).collect();
        return Ok((vec![DVector::from_element(1, 1.0)], tables, 1.0));
    }
    let (w, tw, mut condition) = build(n - 1, k, 0.5 * eps)?;
    let lambda: Vec<f64> = (0..=k).map(|j| eps * j as f64 / (2 * k) as f64).collect();
    let per = k + 1;
    let mut vectors = Vec::with_capacity(w.len() * per);
    for wl in &w {
        for &lj in &lambda {
            let mut v = DVector::zeros(n);
            v.rows_mut(0, n - 1).copy_from(wl);
            v[n - 1] = lj;
            vectors.push(v);
        }
    }
    let mut tables = Vec::with_capacity(k);
    for m in 1..=k {
        let vander = DMatrix::from_fn(m + 1, m + 1, |q, j| binomial(m, q) * lambda[j].powi(q as i32));
        let sv = vander.clone().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Singular(format!(
                "Vandermonde condition number {cond:e} at degree {m}; use a larger eps to spread the directions"
            )));
        }
        condition = condition.max(cond);
        let lu = vander.lu();
        let alphas = degree_indices(n, m);
        let mut c = DMatrix::zeros(alphas.len(), vectors.len());
        for (row, alpha) in alphas.iter().enumerate() {
            let i = alpha[n - 1];
            let mut rhs = DVector::zeros(m + 1);
            rhs[i] = 1.0;
            let d = lu.solve(&rhs).ok_or_else(|| Error::Singular("Vandermonde system is singular".into()))?;
            // Expansion of ξ'^{α'} in powers of w_l · ξ'.
            let inner: Vec<f64> = if m == i {
                let mut e = vec![0.0; w.len()];
                e[0] = 1.0;
                e
            } else {
                let sub = &tw[m - i - 1];
                let sub_row = degree_indices(n - 1, m - i).iter().position(|a| a[..] == alpha[..n - 1]).unwrap();
                (0..w.len()).map(|l| sub[(sub_row, l)]).collect()
            };
            for (l, cl) in inner.iter().enumerate() {
                if *cl == 0.0 {
                    continue;
                }
                for j in 0..=m {
                    c[(row, l * per + j)] += cl * d[j];
                }
            }
        }
        tables.push(c);
    }
    Ok((vectors, tables, condition))
}

/// Coefficients `Q_{α,j}(u)` for perturbed directions `u_j`, one matrix per
/// degree in the row order of [`DirectionSet::tables`].
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedTable {
    /// `q[m − 1][(row, j)] = Q_{α,j}(u)`.
    pub q: Vec<DMatrix<f64>>,
    /// Spectral norm of the correction `Q̃` per degree.
    pub correction_norms: Vec<f64>,
    /// `max_j |u_j − v_j|`.
    pub deviation: f64,
}

/// Solves `ξ^α = Σ_j Q_{α,j}(u) (u_j · ξ)^m` near the reference directions.
///
/// With `E(u)_{j,β} = (m!/β!) u_j^β` the expansion reads
/// `ξ^α = Σ_j c_{α,j} (u_j · ξ)^m + Σ_β Q̃_{αβ} ξ^β`, `Q̃ = I − C E(u)`, so
/// `Q(u) = (I − Q̃)^{-1} C`. Fails when `max_j |u_j − v_j| ≥ delta` or when
/// `I − Q̃` has condition number above [`MAX_CONDITION`]. The norms `‖Q̃‖`
/// are reported; below one the inverse is also a convergent Neumann series,
/// but since `‖C‖` grows like `ε^{−k}` that bound only admits perturbations of
/// order `ε^k`.
pub fn perturb_coefficients(ds: &DirectionSet, u: &[DVector<f64>], delta: f64) -> Result<PerturbedTable> {
    if u.len() != ds.len() || u.iter().any(|v| v.len() != ds.n) {
        return Err(Error::InvalidInput(format!("need {} perturbed vectors in R^{}", ds.len(), ds.n)));
    }
    let deviation = u.iter().zip(&ds.vectors).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if !(deviation < delta) {
        return Err(Error::Singular(format!("perturbation {deviation:e} is not below delta = {delta:e}")));
    }
    let mut q = Vec::with_capacity(ds.k);
    let mut correction_norms = Vec::with_capacity(ds.k);
    for table in &ds.tables {
        let m = table.degree;
        let betas = &table.alphas;
        let e = DMatrix::from_fn(u.len(), betas.len(), |j, b| {
            let beta = &betas[b];
            let multinomial = factorial(m) / beta.iter().map(|&v| factorial(v)).product::<f64>();
            multinomial * monomial(u[j].as_slice(), beta)
        });
        let ce = &table.c * e;
        let correction = DMatrix::identity(ce.nrows(), ce.ncols()) - &ce;
        let norm = correction.clone().svd(false, false).singular_values.max();
        let sv = ce.clone().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Singular(format!(
                "correction system at degree {m} has condition number {cond:e}; the perturbed directions are degenerate"
            )));
        }
        let qm = ce.lu().solve(&table.c).ok_or_else(|| Error::Singular("correction system is singular".into()))?;
        q.push(qm);
        correction_norms.push(norm);
    }
    Ok(PerturbedTable { q, correction_norms, deviation })
}
