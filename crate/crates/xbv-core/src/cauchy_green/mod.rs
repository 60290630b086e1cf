//! Singular integral operators: the Cauchy-Green transform `T`, the Beurling
//! transform `S = ∂_z T`, the boundary Cauchy transform, the Hilbert conjugate
//! operator on the circle, and kernels deformed by a map `τ`.

mod boundary;
mod engine;
mod kernel;
mod lattice;
mod tau;

use num_complex::Complex;

pub use boundary::{hilbert_conjugate, hilbert_conjugate_on, op_c_boundary, ContourValues, MIN_CONTOUR_SAMPLES};
pub use engine::CauchyGreen;
pub use kernel::{boundary_conj_term, square_cauchy, Desingularization, KernelConfig};
pub use tau::{
    check_separation, op_c0_tau, op_t0_s0_tau, tau_wirtinger, C0Values, Deformation, FnDeformation, GridDeformation,
    Identity, DEFAULT_SEPARATION,
};

use crate::domain_grid::GridField;
use crate::error::Result;
use crate::Real;

/// `Tf` at `eval_points`, node-major in the components of `field`.
pub fn op_t<T: Real>(field: &GridField<T>, eval_points: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    Ok(CauchyGreen::new(&field.grid, KernelConfig::default())?.t_points(field, eval_points))
}

/// `Sf` at `eval_points`, node-major in the components of `field`.
pub fn op_s<T: Real>(
    field: &GridField<T>,
    config: KernelConfig<T>,
    eval_points: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    Ok(CauchyGreen::new(&field.grid, config)?.s_points(field, eval_points))
}

/// `Tf` at every node of the field's grid.
pub fn op_t_nodes<T: Real>(field: &GridField<T>) -> Result<GridField<T>> {
    Ok(CauchyGreen::new(&field.grid, KernelConfig::default())?.t_nodes(field))
}

/// `Sf` at every node of the field's grid.
pub fn op_s_nodes<T: Real>(field: &GridField<T>, config: KernelConfig<T>) -> Result<GridField<T>> {
    Ok(CauchyGreen::new(&field.grid, config)?.s_nodes(field))
}
