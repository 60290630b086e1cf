//! Neumann-series inversion of `I + T a ∂_z`, the linear Beltrami
//! integro-differential equation, its equivalence with the differential form
//! plus a boundary Cauchy condition, and isothermal coordinates.

mod isothermal;
mod neumann;

pub use isothermal::{cutoff, isothermal, transform_check, IsothermalOptions, IsothermalReport, MAX_HALVINGS};
pub use neumann::{
    core_nodes, matrix_norm, neumann_invert, neumann_invert_with, probe_points, solve_linear_beltrami,
    verify_equivalence, BeltramiCoefficient, Derivative, NeumannOptions, SolveReport, CORE_MARGIN,
    DEFAULT_MAX_TERMS, DEFAULT_THRESHOLD, DEFAULT_TOL, DIVERGENCE_RUN, PROBES, PROBE_RADIUS,
};
