//! Sample-based Hölder norm estimates.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, GridField};
use super::wirtinger::wirtinger;
use crate::error::{Error, Result};
use crate::Real;

/// Radius, in lattice steps, of the near-diagonal pair set.
pub const NEAR_PAIR_RADIUS: i32 = 8;
/// Number of random far pairs in the standard pair set.
pub const FAR_PAIRS: usize = 100_000;
/// Seed of the far-pair sampler.
pub const PAIR_SEED: u64 = 0x5eed_0001;

/// Hölder estimate of the order-`k` derivatives of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport<T> {
    /// Derivative order.
    pub k: usize,
    /// Hölder exponent.
    pub alpha: T,
    /// `sup_norms[j]` is the largest sup-norm among derivatives of order `j ≤ k`.
    pub sup_norms: Vec<T>,
    /// Largest difference quotient of the order-`k` derivatives over the pair set.
    pub seminorm: T,
    /// Node pair attaining the seminorm.
    pub argmax: Option<(Complex<T>, Complex<T>)>,
}

impl<T: Real> HolderReport<T> {
    /// `Σ_j sup_norms[j] + seminorm`, the `C^{k+α}` norm estimate.
    pub fn norm(&self) -> T {
        self.sup_norms.iter().copied().sum::<T>() + self.seminorm
    }
}

/// A deterministic list of node pairs.
#[derive(Clone, Debug, Default)]
pub struct PairSet {
    /// Node index pairs.
    pub pairs: Vec<(usize, usize)>,
}

impl PairSet {
    /// All pairs within `NEAR_PAIR_RADIUS` lattice steps plus `FAR_PAIRS` seeded random pairs.
    pub fn standard<T: Real>(grid: &Grid<T>) -> Self {
        let mut s = Self::near_diagonal(grid, NEAR_PAIR_RADIUS);
        s.extend(&Self::random(grid, FAR_PAIRS, PAIR_SEED));
        s
    }

    /// Pairs of nodes whose lattice offset has length at most `radius`.
    pub fn near_diagonal<T: Real>(grid: &Grid<T>, radius: i32) -> Self {
        let mut pairs = Vec::new();
        let r2 = radius * radius;
        for (k, &(i, j)) in grid.cells.iter().enumerate() {
            for dj in 0..=radius {
                for di in -radius..=radius {
                    if (dj == 0 && di <= 0) || di * di + dj * dj > r2 {
                        continue;
                    }
                    if let Some(l) = grid.node_at(i + di, j + dj) {
                        pairs.push((k, l));
                    }
                }
            }
        }
        Self { pairs }
    }

    /// `count` uniformly random distinct-node pairs from a seeded generator.
    pub fn random<T: Real>(grid: &Grid<T>, count: usize, seed: u64) -> Self {
        let n = grid.len();
        let mut pairs = Vec::with_capacity(count);
        if n < 2 {
            return Self { pairs };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while pairs.len() < count {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                pairs.push((a, b));
            }
        }
        Self { pairs }
    }

    /// Appends the pairs of `other`.
    pub fn extend(&mut self, other: &Self) {
        self.pairs.extend_from_slice(&other.pairs);
    }
}

/// All mixed Wirtinger derivatives `∂_z^p ∂_z̄^{j−p}` for `j = 0..=k`.
pub fn derivative_levels<T: Real>(field: &GridField<T>, k: usize) -> Vec<Vec<GridField<T>>> {
    let mut levels = vec![vec![field.clone()]];
    for _ in 0..k {
        let last = levels.last().unwrap();
        let mut next = Vec::with_capacity(last.len() + 1);
        for f in last {
            next.push(wirtinger(f).dz);
        }
        next.push(wirtinger(last.last().unwrap()).dzbar);
        levels.push(next);
    }
    levels
}

/// Estimates the `C^{k+α}` data of `field` over the standard pair set.
pub fn holder_estimate<T: Real>(field: &GridField<T>, k: usize, alpha: T) -> Result<HolderReport<T>> {
    let pairs = PairSet::standard(&field.grid);
    holder_estimate_with(field, k, alpha, &pairs)
}

/// Estimates the `C^{k+α}` data of `field` over an explicit pair set.
pub fn holder_estimate_with<T: Real>(
    field: &GridField<T>,
    k: usize,
    alpha: T,
    pairs: &PairSet,
) -> Result<HolderReport<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if field.grid.max_extent_nodes() < 2 * k + 3 {
        return Err(Error::Resolution(format!("order {k} needs at least {} nodes per axis", 2 * k + 3)));
    }
    let levels = derivative_levels(field, k);
    let sup_norms = levels.iter().map(|l| l.iter().map(|f| f.sup_norm()).fold(T::zero(), T::max)).collect();
    let nodes = &field.grid.nodes;
    let mut seminorm = T::zero();
    let mut argmax = None;
    for g in &levels[k] {
        for &(a, b) in &pairs.pairs {
            let d = (nodes[a] - nodes[b]).norm();
            if d == T::zero() {
                continue;
            }
            let scale = d.powf(alpha);
            for c in 0..g.dim {
                let q = (g.at(a, c) - g.at(b, c)).norm() / scale;
                if q > seminorm {
                    seminorm = q;
                    argmax = Some((nodes[a], nodes[b]));
                }
            }
        }
    }
    Ok(HolderReport { k, alpha, sup_norms, seminorm, argmax })
}
