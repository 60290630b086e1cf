//! Numerical machinery for Beltrami-type structures on planar domains.
//!
//! The crate provides Cauchy-Green and Beurling singular integral operators on
//! cell-centered grids, Neumann-series solvers for Beltrami integro-differential
//! equations, isothermal coordinates, Whitney jet extension, linear and almost
//! complex structures, pseudoholomorphic discs, directional derivative
//! reconstruction and the boundary-regularity experiments built on them.
//!
//! Grid routines are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the common `f64` instantiation.

// Range checks are written as `!(x > lo)` so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beltrami;
pub mod cauchy_green;
pub mod deriv_recon;
pub mod domain_grid;
pub mod error;
pub mod experiments;
pub mod io;
pub mod jcurve;
pub mod real;
pub mod structures;
pub mod whitney;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use real::Real;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;
/// Single precision complex scalar.
pub type C32 = Complex<f32>;
/// Double precision grid field.
pub type GridField64 = domain_grid::GridField<f64>;
/// Single precision grid field.
pub type GridField32 = domain_grid::GridField<f32>;
/// Double precision domain.
pub type DomainSpec64 = domain_grid::DomainSpec<f64>;
