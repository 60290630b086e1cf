//! Finite-difference Wirtinger derivatives on lattice grids.

use num_complex::Complex;

use super::grid::GridField;
use crate::Real;

/// Result of [`wirtinger`].
#[derive(Clone, Debug)]
pub struct Wirtinger<T> {
    /// `∂_z f = (∂_x − i∂_y) f / 2`.
    pub dz: GridField<T>,
    /// `∂_z̄ f = (∂_x + i∂_y) f / 2`.
    pub dzbar: GridField<T>,
    /// Nodes where some axis fell back to a first-order or empty stencil.
    pub degenerate: Vec<usize>,
}

/// Stencil quality for one axis at one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stencil {
    Central,
    SecondOneSided,
    FirstOrder,
    Missing,
}

/// Partial derivatives `(∂_x f, ∂_y f)` of every component.
///
/// Central differences where both neighbors exist, second-order one-sided
/// three-point stencils otherwise, and first-order differences as a last resort.
pub fn partials<T: Real>(field: &GridField<T>) -> (GridField<T>, GridField<T>, Vec<usize>) {
    let g = &field.grid;
    let dim = field.dim;
    let n = g.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut dx = vec![zero; n * dim];
    let mut dy = vec![zero; n * dim];
    let mut degenerate = Vec::new();
    let inv2h = T::one() / (T::c(2.0) * g.h);
    let invh = T::one() / g.h;
    let three = T::c(3.0);
    let four = T::c(4.0);
    for k in 0..n {
        let (i, j) = g.cells[k];
        let mut bad = false;
        for axis in 0..2 {
            let nb = |s: i32| if axis == 0 { g.node_at(i + s, j) } else { g.node_at(i, j + s) };
            let (m1, p1) = (nb(-1), nb(1));
            let out = if axis == 0 { &mut dx } else { &mut dy };
            let kind = match (m1, p1) {
                (Some(a), Some(b)) => {
                    for c in 0..dim {
                        out[k * dim + c] = (field.at(b, c) - field.at(a, c)) * inv2h;
                    }
                    Stencil::Central
                }
                _ => {
                    let (p2, m2) = (nb(2), nb(-2));
                    if let (Some(b1), Some(b2)) = (p1, p2) {
                        for c in 0..dim {
                            out[k * dim + c] =
                                (field.at(k, c) * (-three) + field.at(b1, c) * four - field.at(b2, c)) * inv2h;
                        }
                        Stencil::SecondOneSided
                    } else if let (Some(a1), Some(a2)) = (m1, m2) {
                        for c in 0..dim {
                            out[k * dim + c] =
                                (field.at(k, c) * three - field.at(a1, c) * four + field.at(a2, c)) * inv2h;
                        }
                        Stencil::SecondOneSided
                    } else if let Some(b1) = p1 {
                        for c in 0..dim {
                            out[k * dim + c] = (field.at(b1, c) - field.at(k, c)) * invh;
                        }
                        Stencil::FirstOrder
                    } else if let Some(a1) = m1 {
                        for c in 0..dim {
                            out[k * dim + c] = (field.at(k, c) - field.at(a1, c)) * invh;
                        }
                        Stencil::FirstOrder
                    } else {
                        Stencil::Missing
                    }
                }
            };
            bad |= matches!(kind, Stencil::FirstOrder | Stencil::Missing);
        }
        if bad {
            degenerate.push(k);
        }
    }
    (
        GridField { grid: g.clone(), dim, values: dx },
        GridField { grid: g.clone(), dim, values: dy },
        degenerate,
    )
}

/// Wirtinger derivatives `∂_z f` and `∂_z̄ f` of every component.
pub fn wirtinger<T: Real>(field: &GridField<T>) -> Wirtinger<T> {
    let (dx, dy, degenerate) = partials(field);
    let half = T::c(0.5);
    let i = Complex::new(T::zero(), T::one());
    let dz = dx.zip(&dy, |a, b| (a - b * i) * half);
    let dzbar = dx.zip(&dy, |a, b| (a + b * i) * half);
    Wirtinger { dz, dzbar, degenerate }
}
